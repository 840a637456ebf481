#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace focus {

/// Index into the class vocabulary. The catch-all OTHER class lives outside
/// every vocabulary; it is written to disk as the vocabulary size V.
struct ClassId {
  static constexpr std::uint32_t kOtherValue = std::numeric_limits<std::uint32_t>::max();

  std::uint32_t value = 0;

  constexpr bool is_other() const noexcept { return value == kOtherValue; }
  constexpr auto operator<=>(const ClassId&) const = default;
};

inline constexpr ClassId kOtherClass{ClassId::kOtherValue};

/// Serialized form: OTHER maps to `vocabulary`.
std::uint32_t encode_class(ClassId c, std::uint32_t vocabulary) noexcept;
ClassId decode_class(std::uint32_t raw, std::uint32_t vocabulary) noexcept;
std::string class_label(ClassId c);

using ObjectId = std::uint64_t;
using FrameId = std::uint64_t;
using ClusterId = std::uint64_t;

class FeatureVector {
 public:
  FeatureVector() = default;
  explicit FeatureVector(std::vector<double> values) : values_(std::move(values)) {}
  explicit FeatureVector(std::size_t dim) : values_(dim, 0.0) {}

  std::size_t dimension() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  bool operator==(const FeatureVector&) const = default;

 private:
  std::vector<double> values_;
};

double l2_distance(std::span<const double> a, std::span<const double> b);
double squared_l2_distance(std::span<const double> a, std::span<const double> b);

struct DetectedObject {
  ObjectId object_id = 0;
  FrameId frame_id = 0;
  double timestamp_s = 0.0;
  std::vector<double> pixel_signature;
  FeatureVector feature;
  // Simulation ground truth. Only the synthetic classifiers read it.
  std::optional<ClassId> true_class;
};

struct RankedEntry {
  ClassId cls;
  double confidence = 0.0;

  bool operator==(const RankedEntry&) const = default;
};

struct RankedClassification {
  std::vector<RankedEntry> ranked;
  FeatureVector feature;

  std::span<const RankedEntry> top(std::size_t k) const {
    return std::span<const RankedEntry>(ranked).first(std::min(k, ranked.size()));
  }
};

struct AccuracyTarget {
  double precision = 0.95;
  double recall = 0.95;

  bool operator==(const AccuracyTarget&) const = default;
};

/// Abstract GPU-cost units: one inference of a profile costs its unit price.
struct CostModel {
  std::map<std::string, double> cost_per_inference;
  double gt_cost = 0.0;

  double cost_of(const std::string& profile_id) const;
};

}  // namespace focus
