#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "focus/profile.hpp"
#include "focus/types.hpp"

namespace focus {

/// Segment index of a frame: one-second buckets.
std::uint64_t segment_of(FrameId frame, double fps);

/// Ground truth at one-second granularity: a class is present in a segment
/// iff GT labels it in at least half of that segment's object-bearing frames.
class SegmentTruth {
 public:
  SegmentTruth(std::span<const DetectedObject> objects, const ClassifierProfile& gt_profile, double fps);

  bool present(std::uint64_t segment, ClassId cls) const;
  /// Segments where `cls` is present, ascending.
  std::vector<std::uint64_t> segments_with(ClassId cls) const;
  /// Applies the same half-of-frames rule to an arbitrary set of frames.
  std::set<std::uint64_t> segments_covered(std::span<const FrameId> frames) const;

  std::size_t segment_count() const noexcept { return frames_per_segment_.size(); }
  std::uint64_t object_frames(std::uint64_t segment) const;
  /// Objects per GT label.
  const std::map<ClassId, std::uint64_t>& histogram() const noexcept { return histogram_; }
  /// GT label of every object, by object id.
  const std::map<ObjectId, ClassId>& labels() const noexcept { return labels_; }
  /// Objects whose GT label is `cls`, ascending.
  std::vector<ObjectId> objects_of(ClassId cls) const;
  double fps() const noexcept { return fps_; }

 private:
  double fps_;
  std::map<std::uint64_t, std::uint64_t> frames_per_segment_;
  std::map<ClassId, std::set<std::uint64_t>> present_;
  std::map<ClassId, std::uint64_t> histogram_;
  std::map<ObjectId, ClassId> labels_;
};

/// Smallest set of most frequent classes (ties: smaller id) covering at
/// least `coverage` of the objects.
std::vector<ClassId> dominant_classes(const std::map<ClassId, std::uint64_t>& histogram, double coverage = 0.95);

struct ClassAccuracy {
  double precision = 1.0;
  double recall = 1.0;
  std::uint64_t truth_segments = 0;
  std::uint64_t reported_segments = 0;
  std::uint64_t true_positive_segments = 0;
  /// Fraction of the class's objects returned (object-level recall).
  double object_recall = 1.0;
};

/// Compares the frames/objects returned for `cls` against the truth. Empty
/// denominators count as perfect.
ClassAccuracy score_class(const SegmentTruth& truth, ClassId cls, std::span<const FrameId> returned_frames,
                          std::span<const ObjectId> returned_objects);

struct AccuracyReport {
  std::map<ClassId, ClassAccuracy> per_class;
  double macro_precision = 1.0;
  double macro_recall = 1.0;
  double macro_object_recall = 1.0;

  void finish();  // recomputes the macro averages
};

}  // namespace focus
