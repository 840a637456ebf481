#include "focus/query.hpp"

#include <algorithm>
#include <thread>

#include <fmt/format.h>

#include "focus/classifier.hpp"
#include "focus/error.hpp"
#include "focus/text_io.hpp"

namespace focus {

std::string QueryResult::to_text() const {
  return fmt::format(
      "frames={}\nobjects={}\nclusters_examined={}\nclusters_matched={}\ngt_inferences={}\n"
      "query_cost_units={}\n",
      frame_ids.size(), object_ids.size(), clusters_examined, clusters_matched, gt_inferences,
      text::format_fixed6(query_cost_units));
}

QuerySession::QuerySession(const TopKIndex& index, const ObjectStore& objects,
                           const ClassifierProfile& gt_profile, unsigned jobs)
    : index_(index), objects_(objects), gt_(gt_profile), jobs_(std::max(1u, jobs)) {
  if (gt_profile.kind != ProfileKind::GroundTruth) {
    throw Error(Errc::InvalidConfig, fmt::format("'{}' is not a ground-truth profile", gt_profile.id));
  }
}

QuerySession::Verified QuerySession::verify(ClusterId id) {
  const auto member = index_.cluster(id).centroid_member_id;
  {
    std::lock_guard lock(mu_);
    auto it = cache_.find(member);
    if (it != cache_.end()) return {it->second, false};
  }
  const auto label = ground_truth_label(gt_, objects_.at(member));
  std::lock_guard lock(mu_);
  auto [it, inserted] = cache_.emplace(member, label);
  if (inserted) ++total_gt_;
  return {it->second, inserted};
}

std::vector<ClusterId> QuerySession::candidates(const QueryRequest& req, ClassId& lookup_class) const {
  const auto& h = index_.header();
  if (!req.cls.is_other() && req.cls.value >= h.vocabulary) {
    throw Error(Errc::UnknownClass, fmt::format("class {} outside vocabulary of {}", req.cls.value, h.vocabulary));
  }
  if (req.cls.is_other() && !index_.is_specialized()) {
    throw Error(Errc::UnknownClass, "OTHER is only defined for indexes built with a specialized profile");
  }
  const auto k_x = req.k_x.value_or(h.config.k);
  lookup_class = index_.indexes_directly(req.cls) ? req.cls : kOtherClass;
  return index_.lookup(lookup_class, k_x);
}

QueryResult QuerySession::run(const QueryRequest& req, const std::vector<ClusterId>* exclude) {
  if (req.time_range && req.time_range->first > req.time_range->second) {
    throw Error(Errc::InvalidConfig, "time range start exceeds end");
  }
  ClassId lookup_class;
  auto ids = candidates(req, lookup_class);
  if (exclude) {
    std::vector<ClusterId> kept;
    std::set_difference(ids.begin(), ids.end(), exclude->begin(), exclude->end(), std::back_inserter(kept));
    ids = std::move(kept);
  }

  // Which GT labels count as a match for the requested class.
  const bool other_query = req.cls.is_other();
  const auto& kept = index_.header().specialized_classes;
  auto matches = [&](ClassId label) {
    if (other_query) return !std::binary_search(kept.begin(), kept.end(), label);
    return label == req.cls;
  };

  std::vector<Verified> verdicts(ids.size());
  const unsigned workers = std::min<std::size_t>(jobs_, ids.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < ids.size(); ++i) verdicts[i] = verify(ids[i]);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < ids.size(); i += workers) verdicts[i] = verify(ids[i]);
      });
    }
    for (auto& t : pool) t.join();
  }

  QueryResult r;
  r.clusters_examined = ids.size();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (verdicts[i].fresh) ++r.gt_inferences;
    if (!matches(verdicts[i].label)) continue;
    ++r.clusters_matched;
    r.matched_clusters.push_back(ids[i]);
    const auto& c = index_.cluster(ids[i]);
    for (std::size_t m = 0; m < c.member_object_ids.size(); ++m) {
      const auto f = c.frame_ids[m];
      if (req.time_range && (f < req.time_range->first || f > req.time_range->second)) continue;
      r.frame_ids.push_back(f);
      r.object_ids.push_back(c.member_object_ids[m]);
    }
  }
  std::sort(r.frame_ids.begin(), r.frame_ids.end());
  r.frame_ids.erase(std::unique(r.frame_ids.begin(), r.frame_ids.end()), r.frame_ids.end());
  std::sort(r.object_ids.begin(), r.object_ids.end());
  r.object_ids.erase(std::unique(r.object_ids.begin(), r.object_ids.end()), r.object_ids.end());
  r.query_cost_units = static_cast<double>(r.gt_inferences) * gt_.cost_units;
  return r;
}

QueryResult QuerySession::execute(const QueryRequest& req) { return run(req, nullptr); }

QueryResult QuerySession::query_other(ClassId raw_class, std::optional<std::uint32_t> k_x) {
  if (!index_.is_specialized()) {
    throw Error(Errc::UnknownClass, "OTHER path needs an index built with a specialized profile");
  }
  return run(QueryRequest{raw_class, k_x, std::nullopt}, nullptr);
}

std::vector<QueryResult> QuerySession::batched(const QueryRequest& req, std::span<const std::uint32_t> schedule) {
  if (schedule.empty()) throw Error(Errc::NonMonotoneSchedule, "empty K_x schedule");
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (schedule[i] <= schedule[i - 1]) {
      throw Error(Errc::NonMonotoneSchedule, "K_x schedule must be strictly increasing");
    }
  }
  if (schedule.back() > index_.header().config.k) {
    throw Error(Errc::KxTooLarge, fmt::format("schedule reaches {} beyond K={}", schedule.back(),
                                              index_.header().config.k));
  }
  std::vector<QueryResult> out;
  std::vector<ClusterId> seen;  // every cluster examined by earlier increments
  for (auto k : schedule) {
    auto step = req;
    step.k_x = k;
    ClassId lookup_class;
    auto all = candidates(step, lookup_class);
    out.push_back(run(step, &seen));
    std::vector<ClusterId> merged;
    std::set_union(seen.begin(), seen.end(), all.begin(), all.end(), std::back_inserter(merged));
    seen = std::move(merged);
  }
  return out;
}

std::uint64_t QuerySession::total_gt_inferences() const {
  std::lock_guard lock(mu_);
  return total_gt_;
}

std::size_t QuerySession::cache_size() const {
  std::lock_guard lock(mu_);
  return cache_.size();
}

}  // namespace focus
