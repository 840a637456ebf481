#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "focus/profile.hpp"
#include "focus/types.hpp"

namespace focus {

inline constexpr std::size_t kFullDepth = std::numeric_limits<std::size_t>::max();

/// Seed for one (run, stream, profile, object) classification.
std::uint64_t classification_seed(std::uint64_t run_seed, std::string_view stream_id,
                                  std::string_view profile_id, ObjectId object_id);

/// Synthetic stand-in for a CNN. The true (mapped) class lands at a rank drawn
/// from the profile's rank model; other ranks hold distinct classes drawn
/// uniformly from the profile's output set. The first `depth` entries do not
/// depend on `depth`, so shorter lists are prefixes of longer ones.
RankedClassification classify(const ClassifierProfile& profile, const DetectedObject& obj,
                              std::uint64_t seed, std::size_t depth = kFullDepth);

ClassId ground_truth_label(const ClassifierProfile& gt_profile, const DetectedObject& obj);

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual const ClassifierProfile& profile() const = 0;
  virtual RankedClassification classify(const DetectedObject& obj, std::size_t depth) const = 0;
};

class SyntheticClassifier final : public Classifier {
 public:
  SyntheticClassifier(ClassifierProfile profile, std::uint64_t run_seed, std::string stream_id)
      : profile_(std::move(profile)), run_seed_(run_seed), stream_id_(std::move(stream_id)) {}

  const ClassifierProfile& profile() const override { return profile_; }
  RankedClassification classify(const DetectedObject& obj, std::size_t depth) const override;

 private:
  ClassifierProfile profile_;
  std::uint64_t run_seed_;
  std::string stream_id_;
};

/// Answers from a table filled once at a fixed depth. Lets the tuner reuse one
/// classification pass across every K and T it tries.
class PrecomputedClassifier final : public Classifier {
 public:
  PrecomputedClassifier(const Classifier& source, std::span<const DetectedObject> objects,
                        std::size_t depth);

  const ClassifierProfile& profile() const override { return profile_; }
  RankedClassification classify(const DetectedObject& obj, std::size_t depth) const override;
  std::size_t depth() const noexcept { return depth_; }

 private:
  ClassifierProfile profile_;
  std::size_t depth_;
  std::vector<ObjectId> ids_;  // sorted
  std::vector<RankedClassification> results_;
};

}  // namespace focus
