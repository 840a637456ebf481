#include "focus/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "focus/error.hpp"

namespace focus {

ClusterEngine::ClusterEngine(std::size_t dim, double t, std::uint32_t m, bool record_inserts)
    : dim_(dim), t_(t), m_(m), record_inserts_(record_inserts) {
  if (m == 0) throw Error(Errc::NonPositiveM, "live-cluster cap must be at least 1");
  if (!(t >= 0.0)) throw Error(Errc::InvalidConfig, "distance threshold must be non-negative");
}

ClusterId ClusterEngine::insert(ObjectId object_id, FrameId frame_id, const FeatureVector& feature,
                                std::span<const RankedEntry> topk) {
  if (feature.dimension() != dim_) {
    throw Error(Errc::DimensionMismatch,
                fmt::format("object {} feature has dimension {}, expected {}", object_id, feature.dimension(), dim_));
  }
  double best_sq = std::numeric_limits<double>::infinity();
  ClusterId best_id = 0;
  const double* f = feature.values().data();
  for (auto id : live_) {
    const double* c = clusters_[id].cluster.centroid.values().data();
    double sq = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      const double d = c[i] - f[i];
      sq += d * d;
    }
    if (sq < best_sq) {  // live_ is ascending, so ties keep the smaller id
      best_sq = sq;
      best_id = id;
    }
  }
  distance_computations_ += live_.size();
  const double best = std::sqrt(best_sq);

  const bool join = !live_.empty() && best <= t_;
  ClusterId id;
  if (join) {
    id = best_id;
    Slot& slot = clusters_[id];
    ++slot.featured;
    auto centroid = slot.cluster.centroid.values();
    for (std::size_t i = 0; i < dim_; ++i) {
      slot.sum[i] += feature[i];
      centroid[i] = slot.sum[i] / static_cast<double>(slot.featured);
    }
  } else {
    id = clusters_.size();
    Slot slot;
    slot.cluster.cluster_id = id;
    slot.cluster.centroid = feature;
    slot.sum.assign(feature.begin(), feature.end());
    slot.featured = 1;
    clusters_.push_back(std::move(slot));
    live_.push_back(id);
  }

  Slot& slot = clusters_[id];
  slot.last_frame = std::max(slot.last_frame, frame_id);
  slot.cluster.member_object_ids.push_back(object_id);
  slot.cluster.frame_ids.push_back(frame_id);
  slot.member_features.emplace_back(object_id, std::vector<double>(feature.begin(), feature.end()));
  for (std::size_t r = 0; r < topk.size(); ++r) {
    const auto rank = static_cast<std::uint32_t>(r + 1);
    auto [it, fresh] = slot.cluster.class_ranks.emplace(topk[r].cls, rank);
    if (!fresh) it->second = std::min(it->second, rank);
  }
  if (record_inserts_) inserts_.push_back({object_id, id, join ? best : 0.0, !join});

  if (!join && live_.size() > m_) evict_one(id, frame_id);
  return id;
}

void ClusterEngine::attach(ObjectId object_id, FrameId frame_id, ClusterId cluster) {
  if (cluster >= clusters_.size()) {
    throw Error(Errc::InvalidConfig, fmt::format("attach to unknown cluster {}", cluster));
  }
  auto& slot = clusters_[cluster];
  slot.last_frame = std::max(slot.last_frame, frame_id);
  auto& c = slot.cluster;
  c.member_object_ids.push_back(object_id);
  c.frame_ids.push_back(frame_id);
}

void ClusterEngine::evict_one(ClusterId keep, FrameId now) {
  // Fewest members first, then the older cluster. The cluster that was just
  // opened is exempt so a new pattern gets a chance to grow.
  auto pick = [&](bool idle_only) {
    auto victim = live_.end();
    for (auto it = live_.begin(); it != live_.end(); ++it) {
      if (*it == keep) continue;
      if (idle_only && clusters_[*it].last_frame + 1 >= now) continue;
      if (victim == live_.end() || clusters_[*it].cluster.member_object_ids.size() <
                                       clusters_[*victim].cluster.member_object_ids.size()) {
        victim = it;
      }
    }
    return victim;
  };
  auto victim = pick(true);
  if (victim == live_.end()) victim = pick(false);
  if (victim == live_.end()) return;
  seal(clusters_[*victim]);
  live_.erase(victim);
}

void ClusterEngine::seal(Slot& slot) {
  auto& c = slot.cluster;
  double best = std::numeric_limits<double>::infinity();
  ObjectId best_member = c.member_object_ids.front();
  for (const auto& [oid, f] : slot.member_features) {
    const double d = squared_l2_distance(f, c.centroid.values());
    if (d < best || (d == best && oid < best_member)) {
      best = d;
      best_member = oid;
    }
  }
  c.centroid_member_id = best_member;
  c.sealed = true;
  slot.member_features.clear();
  slot.member_features.shrink_to_fit();
  slot.sum.clear();
  slot.sum.shrink_to_fit();
}

std::vector<Cluster> ClusterEngine::finalize() {
  for (auto id : live_) seal(clusters_[id]);
  live_.clear();
  std::vector<Cluster> out;
  out.reserve(clusters_.size());
  for (auto& slot : clusters_) out.push_back(std::move(slot.cluster));
  clusters_.clear();
  return out;
}

std::size_t ClusterEngine::retained_features() const noexcept {
  std::size_t n = 0;
  for (auto id : live_) n += clusters_[id].member_features.size();
  return n;
}

}  // namespace focus
