#include "focus/profile.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "focus/error.hpp"
#include "focus/text_io.hpp"

namespace focus {

std::string_view to_string(ProfileKind kind) noexcept {
  switch (kind) {
    case ProfileKind::GroundTruth: return "GROUND_TRUTH";
    case ProfileKind::GenericCheap: return "GENERIC_CHEAP";
    case ProfileKind::Specialized: return "SPECIALIZED";
  }
  return "GENERIC_CHEAP";
}

ProfileKind parse_profile_kind(std::string_view s) {
  if (s == "GROUND_TRUTH") return ProfileKind::GroundTruth;
  if (s == "GENERIC_CHEAP") return ProfileKind::GenericCheap;
  if (s == "SPECIALIZED") return ProfileKind::Specialized;
  throw Error(Errc::FormatError, fmt::format("unknown profile kind '{}'", s));
}

double RankModel::inclusion(std::size_t k, std::size_t output_length) const {
  if (k == 0) return 0.0;
  if (k >= output_length) return 1.0;
  return 1.0 - (1.0 - p1) * std::pow(rho, static_cast<double>(k - 1));
}

std::size_t RankModel::sample_rank(double u, std::size_t output_length) const {
  if (output_length <= 1 || u <= p1) return 1;
  std::size_t k;
  if (rho <= 0.0) {
    k = 2;
  } else {
    // (1-p1) rho^(k-1) <= 1-u  =>  k-1 >= log((1-u)/(1-p1)) / log(rho)
    const double steps = std::log((1.0 - u) / (1.0 - p1)) / std::log(rho);
    const double ceil_steps = std::ceil(steps);
    if (!std::isfinite(ceil_steps) || ceil_steps >= static_cast<double>(output_length)) {
      return output_length;
    }
    k = 1 + static_cast<std::size_t>(std::max(0.0, ceil_steps));
    // Guard the closed form against rounding at step boundaries.
    while (k > 1 && inclusion(k - 1, output_length) >= u) --k;
    while (k < output_length && inclusion(k, output_length) < u) ++k;
  }
  return std::min(k, output_length);
}

std::size_t ClassifierProfile::output_length() const noexcept {
  return kind == ProfileKind::Specialized ? class_set.size() : vocabulary;
}

std::uint32_t ClassifierProfile::l_s() const noexcept {
  return kind == ProfileKind::Specialized ? static_cast<std::uint32_t>(class_set.size() - 1)
                                          : vocabulary;
}

ClassId ClassifierProfile::map_class(ClassId true_class) const {
  if (kind != ProfileKind::Specialized) return true_class;
  return emits(true_class) ? true_class : kOtherClass;
}

bool ClassifierProfile::emits(ClassId c) const {
  if (kind != ProfileKind::Specialized) return !c.is_other() && c.value < vocabulary;
  return std::find(class_set.begin(), class_set.end(), c) != class_set.end();
}

std::string specialized_profile_id(std::string_view base_id, std::uint32_t l_s) {
  return fmt::format("{}.s{}", base_id, l_s);
}

ClassifierProfile specialize_profile(const ClassifierProfile& base,
                                     const std::map<ClassId, std::uint64_t>& class_histogram,
                                     std::uint32_t l_s, const SpecializationOptions& options) {
  if (class_histogram.empty()) throw Error(Errc::EmptyHistogram, "cannot specialize on an empty histogram");
  if (l_s == 0) throw Error(Errc::InvalidConfig, "l_s must be at least 1");
  if (options.cost_factor < 1.0 || options.rho_shrink < 0.0 || options.rho_shrink > 1.0) {
    throw Error(Errc::InvalidConfig, "specialization factor must be >= 1 and rho shrink in [0,1]");
  }

  std::vector<std::pair<ClassId, std::uint64_t>> ranked;
  for (const auto& [cls, count] : class_histogram) {
    if (!cls.is_other() && count > 0) ranked.emplace_back(cls, count);
  }
  if (ranked.empty()) throw Error(Errc::EmptyHistogram, "histogram has no positive counts");
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (l_s > base.vocabulary) {
    throw Error(Errc::InvalidConfig, fmt::format("l_s={} exceeds vocabulary {}", l_s, base.vocabulary));
  }
  if (ranked.size() > l_s) ranked.resize(l_s);
  // Unseen classes all have count zero, so the tie rule pads with the
  // smallest unused ids.
  std::vector<ClassId> padding;
  for (std::uint32_t v = 0; ranked.size() + padding.size() < l_s && v < base.vocabulary; ++v) {
    if (!class_histogram.count(ClassId{v}) || class_histogram.at(ClassId{v}) == 0) padding.push_back(ClassId{v});
  }

  ClassifierProfile out;
  out.kind = ProfileKind::Specialized;
  out.base_id = base.id;
  out.vocabulary = base.vocabulary;
  out.rank_model = {base.rank_model.p1, base.rank_model.rho * options.rho_shrink};
  out.cost_units = base.cost_units / options.cost_factor;
  out.feature_noise_sigma = base.feature_noise_sigma;
  for (const auto& entry : ranked) out.class_set.push_back(entry.first);
  out.class_set.insert(out.class_set.end(), padding.begin(), padding.end());
  out.class_set.push_back(kOtherClass);
  out.id = specialized_profile_id(base.id, out.l_s());
  return out;
}

ProfileRegistry ProfileRegistry::defaults(std::uint32_t vocabulary) {
  ProfileRegistry reg(vocabulary);
  ClassifierProfile gt;
  gt.id = "gt";
  gt.kind = ProfileKind::GroundTruth;
  gt.rank_model = {1.0, 0.0};
  gt.cost_units = 58.0;
  gt.vocabulary = vocabulary;
  reg.add(gt);

  ClassifierProfile generic;
  generic.id = "generic";
  generic.kind = ProfileKind::GenericCheap;
  generic.rank_model = {0.66, 0.974};
  generic.cost_units = 7.25;
  generic.feature_noise_sigma = 0.01;
  generic.vocabulary = vocabulary;
  reg.add(generic);
  return reg;
}

namespace {

void check_profile(const ClassifierProfile& p, std::uint32_t vocabulary) {
  if (p.id.empty()) throw Error(Errc::FormatError, "profile without id");
  if (p.vocabulary != vocabulary) {
    throw Error(Errc::InvalidConfig, fmt::format("profile '{}' vocabulary {} != registry {}", p.id,
                                                 p.vocabulary, vocabulary));
  }
  const auto& rm = p.rank_model;
  if (!(rm.p1 > 0.0 && rm.p1 <= 1.0) || !(rm.rho >= 0.0 && rm.rho < 1.0)) {
    throw Error(Errc::InvalidConfig, fmt::format("profile '{}' needs p1 in (0,1] and rho in [0,1)", p.id));
  }
  if (!(p.cost_units > 0.0)) throw Error(Errc::InvalidConfig, fmt::format("profile '{}' cost must be positive", p.id));
  if (p.feature_noise_sigma < 0.0) throw Error(Errc::InvalidConfig, fmt::format("profile '{}' noise sigma < 0", p.id));
  if (p.kind == ProfileKind::GroundTruth && rm.p1 != 1.0) {
    throw Error(Errc::InvalidConfig, "ground-truth profile must rank the true class first (p1 = 1)");
  }
  if (p.kind == ProfileKind::Specialized) {
    if (p.class_set.size() < 2 || !p.class_set.back().is_other()) {
      throw Error(Errc::InvalidConfig, fmt::format("specialized profile '{}' needs classes plus trailing OTHER", p.id));
    }
    for (std::size_t i = 0; i + 1 < p.class_set.size(); ++i) {
      const auto c = p.class_set[i];
      if (c.is_other() || c.value >= vocabulary) {
        throw Error(Errc::InvalidConfig, fmt::format("specialized profile '{}' has bad class", p.id));
      }
      if (std::find(p.class_set.begin(), p.class_set.begin() + static_cast<long>(i), c) !=
          p.class_set.begin() + static_cast<long>(i)) {
        throw Error(Errc::InvalidConfig, fmt::format("specialized profile '{}' repeats a class", p.id));
      }
    }
  } else if (!p.class_set.empty()) {
    throw Error(Errc::InvalidConfig, fmt::format("only specialized profiles carry a class_set ('{}')", p.id));
  }
}

}  // namespace

void ProfileRegistry::add(ClassifierProfile profile) {
  check_profile(profile, vocabulary_);
  if (profile.kind == ProfileKind::GroundTruth) {
    for (const auto& p : profiles_) {
      if (p.kind == ProfileKind::GroundTruth && p.id != profile.id) {
        throw Error(Errc::InvalidConfig, "registry already has a ground-truth profile");
      }
    }
  }
  auto it = std::find_if(profiles_.begin(), profiles_.end(),
                         [&](const ClassifierProfile& p) { return p.id == profile.id; });
  if (it != profiles_.end()) {
    *it = std::move(profile);
  } else {
    profiles_.push_back(std::move(profile));
  }
}

const ClassifierProfile* ProfileRegistry::find(std::string_view id) const {
  for (const auto& p : profiles_) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

const ClassifierProfile& ProfileRegistry::at(std::string_view id) const {
  const auto* p = find(id);
  if (!p) throw Error(Errc::UnknownProfile, fmt::format("no profile '{}' in registry", id));
  return *p;
}

const ClassifierProfile& ProfileRegistry::ground_truth() const {
  for (const auto& p : profiles_) {
    if (p.kind == ProfileKind::GroundTruth) return p;
  }
  throw Error(Errc::UnknownProfile, "registry has no GROUND_TRUTH profile");
}

CostModel ProfileRegistry::cost_model() const {
  CostModel cm;
  cm.gt_cost = ground_truth().cost_units;
  for (const auto& p : profiles_) {
    if (p.cost_units > cm.gt_cost) {
      throw Error(Errc::InvalidConfig,
                  fmt::format("profile '{}' costs more than the ground-truth model", p.id));
    }
    cm.cost_per_inference[p.id] = p.cost_units;
  }
  return cm;
}

std::string ProfileRegistry::to_text() const {
  std::string out = "# focus profile registry\n";
  out += fmt::format("vocabulary={}\n", vocabulary_);
  out += fmt::format("specialization_factor={}\n", text::format_sig9(specialization_.cost_factor));
  out += fmt::format("specialization_rho_shrink={}\n", text::format_sig9(specialization_.rho_shrink));
  for (const auto& p : profiles_) {
    out += "\n[profile]\n";
    out += fmt::format("id={}\n", p.id);
    out += fmt::format("kind={}\n", to_string(p.kind));
    if (!p.base_id.empty()) out += fmt::format("base={}\n", p.base_id);
    out += fmt::format("p1={}\n", text::format_sig9(p.rank_model.p1));
    out += fmt::format("rho={}\n", text::format_sig9(p.rank_model.rho));
    out += fmt::format("cost_units={}\n", text::format_sig9(p.cost_units));
    out += fmt::format("feature_noise_sigma={}\n", text::format_sig9(p.feature_noise_sigma));
    if (p.kind == ProfileKind::Specialized) {
      std::string classes;
      for (std::size_t i = 0; i < p.class_set.size(); ++i) {
        if (i) classes.push_back(',');
        classes += class_label(p.class_set[i]);
      }
      out += fmt::format("class_set={}\n", classes);
    }
  }
  return out;
}

ProfileRegistry ProfileRegistry::parse(std::string_view text_body) {
  // Split into the registry preamble and one chunk per [profile] block.
  std::vector<std::string> chunks(1);
  for (auto raw : text::split(text_body, '\n')) {
    if (text::trim(raw) == "[profile]") {
      chunks.emplace_back();
      continue;
    }
    chunks.back().append(raw);
    chunks.back().push_back('\n');
  }

  const auto head = text::parse_key_values(chunks.front());
  auto req = [](const std::map<std::string, std::string>& kv, const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw Error(Errc::FormatError, fmt::format("profile registry missing '{}'", key));
    return it->second;
  };

  ProfileRegistry reg(text::parse_u32(req(head, "vocabulary")));
  SpecializationOptions spec;
  if (auto it = head.find("specialization_factor"); it != head.end()) spec.cost_factor = text::parse_double(it->second);
  if (auto it = head.find("specialization_rho_shrink"); it != head.end()) spec.rho_shrink = text::parse_double(it->second);
  reg.specialization_ = spec;

  for (std::size_t i = 1; i < chunks.size(); ++i) {
    const auto kv = text::parse_key_values(chunks[i]);
    ClassifierProfile p;
    p.vocabulary = reg.vocabulary_;
    p.id = req(kv, "id");
    p.kind = parse_profile_kind(req(kv, "kind"));
    p.rank_model.p1 = text::parse_double(req(kv, "p1"));
    p.rank_model.rho = text::parse_double(req(kv, "rho"));
    p.cost_units = text::parse_double(req(kv, "cost_units"));
    p.feature_noise_sigma = text::parse_double(req(kv, "feature_noise_sigma"));
    if (auto it = kv.find("base"); it != kv.end()) p.base_id = it->second;
    if (auto it = kv.find("class_set"); it != kv.end()) {
      for (auto tok : text::split(it->second, ',')) {
        tok = text::trim(tok);
        p.class_set.push_back(tok == "OTHER" ? kOtherClass : ClassId{text::parse_u32(tok)});
      }
    }
    if (reg.find(p.id)) throw Error(Errc::FormatError, fmt::format("duplicate profile id '{}'", p.id));
    reg.add(std::move(p));
  }
  return reg;
}

ProfileRegistry ProfileRegistry::load(const std::filesystem::path& path) {
  return parse(text::read_file(path));
}

void ProfileRegistry::save(const std::filesystem::path& path) const {
  text::write_file_atomic(path, to_text());
}

}  // namespace focus
