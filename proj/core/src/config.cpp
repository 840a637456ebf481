#include "focus/config.hpp"

#include <tuple>

#include <fmt/format.h>

#include "focus/error.hpp"
#include "focus/text_io.hpp"

namespace focus {

std::string Config::to_text() const {
  return fmt::format(
      "profile={}\nk={}\nl_s={}\nt={}\nm={}\nprecision_target={}\nrecall_target={}\n", profile_id, k,
      l_s, text::format_fixed6(t), m, text::format_fixed6(targets.precision),
      text::format_fixed6(targets.recall));
}

Config Config::parse(std::string_view body) {
  const auto kv = text::parse_key_values(body);
  static constexpr std::string_view kKeys[] = {"profile", "k", "l_s", "t", "m", "precision_target",
                                               "recall_target"};
  for (const auto& [key, _] : kv) {
    bool known = false;
    for (auto k : kKeys) known = known || key == k;
    if (!known) throw Error(Errc::FormatError, fmt::format("unknown config key '{}'", key));
  }
  auto req = [&](std::string_view key) -> const std::string& {
    auto it = kv.find(std::string(key));
    if (it == kv.end()) throw Error(Errc::FormatError, fmt::format("config missing '{}'", key));
    return it->second;
  };
  Config cfg;
  cfg.profile_id = req("profile");
  cfg.k = text::parse_u32(req("k"));
  cfg.l_s = text::parse_u32(req("l_s"));
  cfg.t = text::parse_double(req("t"));
  cfg.m = text::parse_u32(req("m"));
  cfg.targets.precision = text::parse_double(req("precision_target"));
  cfg.targets.recall = text::parse_double(req("recall_target"));
  return cfg;
}

Config Config::load(const std::filesystem::path& path) { return parse(text::read_file(path)); }

void Config::save(const std::filesystem::path& path) const { text::write_file_atomic(path, to_text()); }

bool config_less(const Config& a, const Config& b) {
  return std::tie(a.profile_id, a.k, a.l_s, a.t, a.m, a.targets.precision, a.targets.recall) <
         std::tie(b.profile_id, b.k, b.l_s, b.t, b.m, b.targets.precision, b.targets.recall);
}

Config validate_config(const Config& cfg, const ProfileRegistry& registry) {
  const auto* profile = registry.find(cfg.profile_id);
  if (!profile) throw Error(Errc::UnknownProfile, fmt::format("profile '{}' not registered", cfg.profile_id));
  if (cfg.k < 1 || cfg.k > profile->output_length()) {
    throw Error(Errc::KOutOfRange, fmt::format("k={} outside [1, {}] for profile '{}'", cfg.k,
                                               profile->output_length(), cfg.profile_id));
  }
  if (cfg.m < 1) throw Error(Errc::NonPositiveM, "m must be at least 1");
  if (!(cfg.t >= 0.0)) throw Error(Errc::InvalidConfig, "t must be non-negative");
  if (cfg.l_s < 1) throw Error(Errc::InvalidConfig, "l_s must be at least 1");
  if (profile->kind == ProfileKind::Specialized && cfg.l_s != profile->l_s()) {
    throw Error(Errc::InvalidConfig, fmt::format("l_s={} but profile '{}' distinguishes {} classes",
                                                 cfg.l_s, cfg.profile_id, profile->l_s()));
  }
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(cfg.targets.precision) || !in_unit(cfg.targets.recall)) {
    throw Error(Errc::InvalidConfig, "accuracy targets must lie in [0, 1]");
  }
  return cfg;
}

}  // namespace focus
