#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "focus/index.hpp"
#include "focus/profile.hpp"
#include "focus/stream.hpp"

namespace focus {

struct QueryRequest {
  ClassId cls;
  std::optional<std::uint32_t> k_x;  // defaults to the index K
  std::optional<std::pair<FrameId, FrameId>> time_range;  // inclusive
};

struct QueryResult {
  std::vector<FrameId> frame_ids;    // sorted, unique
  std::vector<ObjectId> object_ids;  // sorted, unique
  std::vector<ClusterId> matched_clusters;
  std::uint64_t gt_inferences = 0;
  double query_cost_units = 0.0;
  std::uint64_t clusters_examined = 0;
  std::uint64_t clusters_matched = 0;

  std::string to_text() const;
};

/// Runs queries against one index. Centroid verifications are memoized for
/// the life of the session, so a centroid is GT-classified at most once.
class QuerySession {
 public:
  QuerySession(const TopKIndex& index, const ObjectStore& objects, const ClassifierProfile& gt_profile,
               unsigned jobs = 1);

  /// Routes classes a specialized index folds into OTHER through the OTHER
  /// postings, keeping clusters whose centroid GT label is the requested class.
  QueryResult execute(const QueryRequest& req);

  /// Explicit OTHER path for a raw class; delegates when the class is indexed
  /// directly.
  QueryResult query_other(ClassId raw_class, std::optional<std::uint32_t> k_x = std::nullopt);

  /// One increment per schedule entry, each holding only newly matched
  /// clusters. The schedule must be strictly increasing and end at most at K.
  std::vector<QueryResult> batched(const QueryRequest& req, std::span<const std::uint32_t> schedule);

  std::uint64_t total_gt_inferences() const;
  std::size_t cache_size() const;

 private:
  struct Verified {
    ClassId label;
    bool fresh;
  };
  Verified verify(ClusterId id);
  QueryResult run(const QueryRequest& req, const std::vector<ClusterId>* exclude);
  std::vector<ClusterId> candidates(const QueryRequest& req, ClassId& lookup_class) const;

  const TopKIndex& index_;
  const ObjectStore& objects_;
  const ClassifierProfile& gt_;
  unsigned jobs_;
  mutable std::mutex mu_;
  std::unordered_map<ObjectId, ClassId> cache_;
  std::uint64_t total_gt_ = 0;
};

}  // namespace focus
