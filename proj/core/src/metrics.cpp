#include "focus/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "focus/classifier.hpp"

namespace focus {

std::uint64_t segment_of(FrameId frame, double fps) {
  return static_cast<std::uint64_t>(std::floor(static_cast<double>(frame) / fps));
}

SegmentTruth::SegmentTruth(std::span<const DetectedObject> objects, const ClassifierProfile& gt_profile,
                           double fps)
    : fps_(fps) {
  // (segment, class) -> frames in which GT reports the class.
  std::map<std::pair<std::uint64_t, ClassId>, std::set<FrameId>> labeled;
  std::map<std::uint64_t, std::set<FrameId>> frames;
  for (const auto& o : objects) {
    const auto label = ground_truth_label(gt_profile, o);
    labels_[o.object_id] = label;
    ++histogram_[label];
    const auto seg = segment_of(o.frame_id, fps);
    frames[seg].insert(o.frame_id);
    labeled[{seg, label}].insert(o.frame_id);
  }
  for (const auto& [seg, fs] : frames) frames_per_segment_[seg] = fs.size();
  for (const auto& [key, fs] : labeled) {
    if (2 * fs.size() >= frames_per_segment_[key.first]) present_[key.second].insert(key.first);
  }
}

bool SegmentTruth::present(std::uint64_t segment, ClassId cls) const {
  auto it = present_.find(cls);
  return it != present_.end() && it->second.count(segment) > 0;
}

std::vector<std::uint64_t> SegmentTruth::segments_with(ClassId cls) const {
  auto it = present_.find(cls);
  if (it == present_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

std::set<std::uint64_t> SegmentTruth::segments_covered(std::span<const FrameId> frames) const {
  std::map<std::uint64_t, std::set<FrameId>> per_segment;
  for (auto f : frames) per_segment[segment_of(f, fps_)].insert(f);
  std::set<std::uint64_t> out;
  for (const auto& [seg, fs] : per_segment) {
    const auto total = object_frames(seg);
    if (total > 0 && 2 * fs.size() >= total) out.insert(seg);
  }
  return out;
}

std::uint64_t SegmentTruth::object_frames(std::uint64_t segment) const {
  auto it = frames_per_segment_.find(segment);
  return it == frames_per_segment_.end() ? 0 : it->second;
}

std::vector<ObjectId> SegmentTruth::objects_of(ClassId cls) const {
  std::vector<ObjectId> out;
  for (const auto& [id, label] : labels_) {
    if (label == cls) out.push_back(id);
  }
  return out;
}

std::vector<ClassId> dominant_classes(const std::map<ClassId, std::uint64_t>& histogram, double coverage) {
  std::vector<std::pair<ClassId, std::uint64_t>> order(histogram.begin(), histogram.end());
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::uint64_t total = 0;
  for (const auto& [_, n] : order) total += n;
  std::vector<ClassId> out;
  std::uint64_t covered = 0;
  for (const auto& [cls, n] : order) {
    if (static_cast<double>(covered) >= coverage * static_cast<double>(total)) break;
    out.push_back(cls);
    covered += n;
  }
  return out;
}

ClassAccuracy score_class(const SegmentTruth& truth, ClassId cls, std::span<const FrameId> returned_frames,
                          std::span<const ObjectId> returned_objects) {
  const auto gt = truth.segments_with(cls);
  const auto reported = truth.segments_covered(returned_frames);
  ClassAccuracy a;
  a.truth_segments = gt.size();
  a.reported_segments = reported.size();
  for (auto s : gt) a.true_positive_segments += reported.count(s);
  if (a.reported_segments > 0) {
    a.precision = static_cast<double>(a.true_positive_segments) / static_cast<double>(a.reported_segments);
  }
  if (a.truth_segments > 0) {
    a.recall = static_cast<double>(a.true_positive_segments) / static_cast<double>(a.truth_segments);
  }
  const auto mine = truth.objects_of(cls);
  if (!mine.empty()) {
    std::size_t hit = 0;
    for (auto id : mine) hit += std::binary_search(returned_objects.begin(), returned_objects.end(), id);
    a.object_recall = static_cast<double>(hit) / static_cast<double>(mine.size());
  }
  return a;
}

void AccuracyReport::finish() {
  if (per_class.empty()) {
    macro_precision = macro_recall = macro_object_recall = 1.0;
    return;
  }
  double p = 0.0, r = 0.0, o = 0.0;
  for (const auto& [_, a] : per_class) {
    p += a.precision;
    r += a.recall;
    o += a.object_recall;
  }
  const auto n = static_cast<double>(per_class.size());
  macro_precision = p / n;
  macro_recall = r / n;
  macro_object_recall = o / n;
}

}  // namespace focus
