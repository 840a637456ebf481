#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "focus/types.hpp"

namespace focus {

struct Cluster {
  ClusterId cluster_id = 0;
  FeatureVector centroid;
  std::vector<ObjectId> member_object_ids;
  std::vector<FrameId> frame_ids;  // one per member
  /// Class -> best (smallest, 1-based) rank seen in any member's top-K.
  std::map<ClassId, std::uint32_t> class_ranks;
  ObjectId centroid_member_id = 0;
  bool sealed = false;

  bool operator==(const Cluster&) const = default;
};

/// One insert as seen by the engine, kept for the radius audit.
struct InsertRecord {
  ObjectId object_id = 0;
  ClusterId cluster_id = 0;
  double distance = 0.0;  // to the centroid at insertion time; 0 for a new cluster
  bool created = false;
};

/// Single-pass clustering: join the nearest live centroid within `t`, else
/// open a new cluster; past `m` live clusters the smallest one is sealed.
/// Clusters touched in the current or previous frame are only evicted when
/// no idle cluster is left, so an ongoing track keeps its cluster.
class ClusterEngine {
 public:
  ClusterEngine(std::size_t dim, double t, std::uint32_t m, bool record_inserts = false);

  /// Clusters on `feature` and merges the ranked classes (already cut to K).
  ClusterId insert(ObjectId object_id, FrameId frame_id, const FeatureVector& feature,
                   std::span<const RankedEntry> topk);

  /// Adds a member with no extracted feature (a pixel-diff duplicate). The
  /// centroid and class set are unchanged; sealed clusters accept it too.
  void attach(ObjectId object_id, FrameId frame_id, ClusterId cluster);

  /// Seals everything and returns all clusters ordered by id.
  std::vector<Cluster> finalize();

  bool distance_budget(std::uint64_t n) const noexcept {
    return distance_computations_ <= static_cast<std::uint64_t>(m_) * n;
  }

  std::uint64_t distance_computations() const noexcept { return distance_computations_; }
  std::size_t live_count() const noexcept { return live_.size(); }
  std::size_t evicted_count() const noexcept { return clusters_.size() - live_.size(); }
  std::size_t cluster_count() const noexcept { return clusters_.size(); }
  /// Member features still held; only live clusters keep them.
  std::size_t retained_features() const noexcept;
  const std::vector<InsertRecord>& inserts() const noexcept { return inserts_; }
  const Cluster& cluster(ClusterId id) const { return clusters_.at(id).cluster; }

 private:
  struct Slot {
    Cluster cluster;
    std::vector<double> sum;
    std::size_t featured = 0;  // members that contributed a feature
    FrameId last_frame = 0;
    std::vector<std::pair<ObjectId, std::vector<double>>> member_features;
  };

  void seal(Slot& slot);
  void evict_one(ClusterId keep, FrameId now);

  std::size_t dim_;
  double t_;
  std::uint32_t m_;
  bool record_inserts_;
  std::vector<Slot> clusters_;  // indexed by cluster id
  std::vector<ClusterId> live_;  // ascending
  std::uint64_t distance_computations_ = 0;
  std::vector<InsertRecord> inserts_;
};

}  // namespace focus
