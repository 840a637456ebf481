#include "focus/classifier.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

#include "focus/error.hpp"
#include "focus/random.hpp"

namespace focus {

std::uint64_t classification_seed(std::uint64_t run_seed, std::string_view stream_id,
                                  std::string_view profile_id, ObjectId object_id) {
  return mix_seed(mix_seed(mix_seed(run_seed, stable_hash(stream_id)), stable_hash(profile_id)), object_id);
}

namespace {

// Candidate i in [0, n) of the filler pool, which is the output set with the
// mapped true class removed.
class FillerPool {
 public:
  FillerPool(const ClassifierProfile& profile, ClassId mapped) : profile_(profile) {
    if (profile.kind == ProfileKind::Specialized) {
      for (auto c : profile.class_set) {
        if (c != mapped) specialized_.push_back(c);
      }
      size_ = specialized_.size();
    } else {
      skip_ = mapped.value;
      size_ = profile.vocabulary - 1;
    }
  }

  std::size_t size() const noexcept { return size_; }

  ClassId at(std::size_t i) const {
    if (profile_.kind == ProfileKind::Specialized) return specialized_[i];
    const auto v = static_cast<std::uint32_t>(i);
    return ClassId{v < skip_ ? v : v + 1};
  }

 private:
  const ClassifierProfile& profile_;
  std::vector<ClassId> specialized_;
  std::uint32_t skip_ = 0;
  std::size_t size_ = 0;
};

}  // namespace

RankedClassification classify(const ClassifierProfile& profile, const DetectedObject& obj,
                              std::uint64_t seed, std::size_t depth) {
  if (!obj.true_class) {
    throw Error(Errc::MissingTrueClass,
                fmt::format("object {} has no label for the synthetic classifier", obj.object_id));
  }
  const std::size_t length = profile.output_length();
  depth = std::min(depth, length);
  const ClassId mapped = profile.map_class(*obj.true_class);

  // Independent streams so rank, fillers and feature noise never shift each other.
  Rng rank_rng(mix_seed(seed, 1));
  Rng fill_rng(mix_seed(seed, 2));
  Rng noise_rng(mix_seed(seed, 3));

  const std::size_t true_rank = profile.rank_model.sample_rank(uniform01(rank_rng), length);

  RankedClassification out;
  out.ranked.reserve(depth);
  FillerPool pool(profile, mapped);
  // Sparse partial Fisher-Yates over the pool's index space.
  std::unordered_map<std::size_t, std::size_t> swapped;
  auto slot = [&](std::size_t i) {
    auto it = swapped.find(i);
    return it == swapped.end() ? i : it->second;
  };
  std::size_t drawn = 0;
  for (std::size_t pos = 1; pos <= depth; ++pos) {
    ClassId cls;
    if (pos == true_rank) {
      cls = mapped;
    } else {
      const std::size_t remaining = pool.size() - drawn;
      const std::size_t j =
          drawn + std::uniform_int_distribution<std::size_t>(0, remaining - 1)(fill_rng);
      const std::size_t picked = slot(j);
      swapped[j] = slot(drawn);
      cls = pool.at(picked);
      ++drawn;
    }
    out.ranked.push_back({cls, 1.0 / static_cast<double>(pos)});
  }

  std::vector<double> feature(obj.feature.begin(), obj.feature.end());
  if (profile.feature_noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, profile.feature_noise_sigma);
    for (auto& v : feature) v += noise(noise_rng);
  }
  out.feature = FeatureVector(std::move(feature));
  return out;
}

ClassId ground_truth_label(const ClassifierProfile& gt_profile, const DetectedObject& obj) {
  if (gt_profile.kind != ProfileKind::GroundTruth) {
    throw Error(Errc::InvalidConfig, fmt::format("'{}' is not a ground-truth profile", gt_profile.id));
  }
  if (!obj.true_class) {
    throw Error(Errc::MissingTrueClass, fmt::format("object {} has no label for the ground-truth oracle", obj.object_id));
  }
  // p1 = 1 is enforced for ground-truth profiles, so rank 1 is always the true class.
  return gt_profile.map_class(*obj.true_class);
}

RankedClassification SyntheticClassifier::classify(const DetectedObject& obj, std::size_t depth) const {
  return focus::classify(profile_, obj,
                         classification_seed(run_seed_, stream_id_, profile_.id, obj.object_id), depth);
}

PrecomputedClassifier::PrecomputedClassifier(const Classifier& source,
                                             std::span<const DetectedObject> objects, std::size_t depth)
    : profile_(source.profile()), depth_(std::min(depth, source.profile().output_length())) {
  std::vector<std::size_t> order(objects.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return objects[a].object_id < objects[b].object_id; });
  ids_.reserve(objects.size());
  results_.reserve(objects.size());
  for (auto i : order) {
    ids_.push_back(objects[i].object_id);
    results_.push_back(source.classify(objects[i], depth_));
  }
}

RankedClassification PrecomputedClassifier::classify(const DetectedObject& obj, std::size_t depth) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), obj.object_id);
  if (it == ids_.end() || *it != obj.object_id) {
    throw Error(Errc::InvalidConfig, fmt::format("object {} was not precomputed", obj.object_id));
  }
  if (depth > depth_ && depth_ < profile_.output_length()) {
    throw Error(Errc::KOutOfRange, fmt::format("depth {} exceeds precomputed depth {}", depth, depth_));
  }
  auto out = results_[static_cast<std::size_t>(it - ids_.begin())];
  if (out.ranked.size() > depth) out.ranked.resize(depth);
  return out;
}

}  // namespace focus
