#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "focus/profile.hpp"
#include "focus/types.hpp"

namespace focus {

/// The tunable tuple chosen per stream: ingest classifier, K, L_s, T, M.
struct Config {
  std::string profile_id;
  std::uint32_t k = 1;
  std::uint32_t l_s = 1;
  double t = 0.0;  // cluster join threshold (L2)
  std::uint32_t m = 100;  // live-cluster cap
  AccuracyTarget targets;

  /// Canonical key=value text; reals use six decimals.
  std::string to_text() const;
  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  bool operator==(const Config&) const = default;
};

/// Lexicographic order on (profile, k, l_s, t, m); the tuner's final tie-break.
bool config_less(const Config& a, const Config& b);

/// Returns cfg unchanged when it is consistent with the registry.
Config validate_config(const Config& cfg, const ProfileRegistry& registry);

}  // namespace focus
