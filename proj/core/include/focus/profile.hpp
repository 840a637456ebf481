#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "focus/types.hpp"

namespace focus {

enum class ProfileKind { GroundTruth, GenericCheap, Specialized };

std::string_view to_string(ProfileKind kind) noexcept;
ProfileKind parse_profile_kind(std::string_view s);

/// Probability that the true class shows up within the top-k output:
///   p(k) = 1 - (1 - p1) * rho^(k-1),  with p(output_length) forced to 1.
struct RankModel {
  double p1 = 1.0;
  double rho = 0.0;

  double inclusion(std::size_t k, std::size_t output_length) const;
  /// Inverse-CDF draw: smallest k with inclusion(k) >= u, for u in [0,1).
  std::size_t sample_rank(double u, std::size_t output_length) const;

  bool operator==(const RankModel&) const = default;
};

struct ClassifierProfile {
  std::string id;
  ProfileKind kind = ProfileKind::GenericCheap;
  RankModel rank_model;
  double cost_units = 1.0;
  double feature_noise_sigma = 0.0;
  std::uint32_t vocabulary = 1000;
  /// SPECIALIZED only: the l_s kept classes in frequency order, then OTHER.
  std::vector<ClassId> class_set;
  /// SPECIALIZED only: profile this one was derived from (informational).
  std::string base_id;

  std::size_t output_length() const noexcept;
  std::uint32_t l_s() const noexcept;
  /// Classes outside a specialized class_set collapse to OTHER.
  ClassId map_class(ClassId true_class) const;
  bool emits(ClassId c) const;

  bool operator==(const ClassifierProfile&) const = default;
};

struct SpecializationOptions {
  double cost_factor = 10.0;  // specialized model is this many times cheaper
  double rho_shrink = 0.7;    // rank-model tail multiplier

  bool operator==(const SpecializationOptions&) const = default;
};

/// Keeps the l_s most frequent classes (ties: smaller id) plus OTHER, so the
/// class set always has l_s + 1 entries. Throws when l_s exceeds the vocabulary.
ClassifierProfile specialize_profile(const ClassifierProfile& base,
                                     const std::map<ClassId, std::uint64_t>& class_histogram,
                                     std::uint32_t l_s,
                                     const SpecializationOptions& options = {});

std::string specialized_profile_id(std::string_view base_id, std::uint32_t l_s);

class ProfileRegistry {
 public:
  explicit ProfileRegistry(std::uint32_t vocabulary = 1000) : vocabulary_(vocabulary) {}

  /// GT at 58 units, one generic cheap model 8x cheaper.
  static ProfileRegistry defaults(std::uint32_t vocabulary = 1000);

  static ProfileRegistry parse(std::string_view text);
  static ProfileRegistry load(const std::filesystem::path& path);
  std::string to_text() const;
  void save(const std::filesystem::path& path) const;

  /// Replaces an existing profile with the same id.
  void add(ClassifierProfile profile);

  const ClassifierProfile* find(std::string_view id) const;
  const ClassifierProfile& at(std::string_view id) const;
  const ClassifierProfile& ground_truth() const;
  const std::vector<ClassifierProfile>& profiles() const noexcept { return profiles_; }

  CostModel cost_model() const;
  std::uint32_t vocabulary() const noexcept { return vocabulary_; }
  const SpecializationOptions& specialization() const noexcept { return specialization_; }
  void set_specialization(SpecializationOptions o) { specialization_ = o; }

  bool operator==(const ProfileRegistry&) const = default;

 private:
  std::uint32_t vocabulary_;
  SpecializationOptions specialization_;
  std::vector<ClassifierProfile> profiles_;
};

}  // namespace focus
