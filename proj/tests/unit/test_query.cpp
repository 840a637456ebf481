#include <gtest/gtest.h>

#include <set>

#include "focus/error.hpp"
#include "focus/generator.hpp"
#include "focus/ingest.hpp"
#include "focus/query.hpp"
#include "test_support.hpp"

namespace focus {
namespace {

using testing::make_object;

Cluster make_cluster(ClusterId id, std::vector<ObjectId> members, std::vector<FrameId> frames,
                     std::map<ClassId, std::uint32_t> ranks) {
  Cluster c;
  c.cluster_id = id;
  c.centroid = FeatureVector(std::vector<double>{0.0});
  c.centroid_member_id = members.front();
  c.member_object_ids = std::move(members);
  c.frame_ids = std::move(frames);
  c.class_ranks = std::move(ranks);
  return c;
}

// Objects 1..6; clusters 0-2 all list class 5 in their top-3. Cluster 2's
// centroid is really class 6.
struct Fixture {
  std::vector<DetectedObject> objects{
      make_object(1, 0, 5, {0.0}), make_object(2, 1, 5, {0.0}), make_object(3, 2, 5, {0.0}),
      make_object(4, 3, 6, {0.0}), make_object(5, 4, 5, {0.0}), make_object(6, 9, 7, {0.0})};
  ObjectStore store{objects};
  ProfileRegistry reg = ProfileRegistry::defaults();
  TopKIndex index;

  Fixture() {
    IndexHeader h;
    h.stream_id = "q";
    h.dim = 1;
    h.config = Config{"generic", 3, 1000, 0.0, 100, {}};
    h.objects = objects.size();
    std::vector<Cluster> cs;
    cs.push_back(make_cluster(0, {1, 2}, {0, 1}, {{ClassId{5}, 1}}));
    cs.push_back(make_cluster(1, {3}, {2}, {{ClassId{5}, 3}, {ClassId{7}, 1}}));
    cs.push_back(make_cluster(2, {4, 5}, {3, 4}, {{ClassId{5}, 2}}));
    cs.push_back(make_cluster(3, {6}, {9}, {{ClassId{7}, 2}}));
    index = TopKIndex::build(std::move(cs), h);
  }
};

TEST(Query, VerifiesEveryCandidateCentroid) {
  Fixture f;
  QuerySession s(f.index, f.store, f.reg.ground_truth());
  const auto r = s.execute(QueryRequest{ClassId{5}, std::nullopt, std::nullopt});
  EXPECT_EQ(r.clusters_examined, 3u);
  EXPECT_EQ(r.gt_inferences, 3u);
  EXPECT_EQ(r.clusters_matched, 2u);
  EXPECT_EQ(r.matched_clusters, (std::vector<ClusterId>{0, 1}));
  EXPECT_EQ(r.object_ids, (std::vector<ObjectId>{1, 2, 3}));
  EXPECT_EQ(r.frame_ids, (std::vector<FrameId>{0, 1, 2}));
  EXPECT_DOUBLE_EQ(r.query_cost_units, 3 * 58.0);
}

TEST(Query, CentroidVerdictsAreCachedPerSession) {
  Fixture f;
  QuerySession s(f.index, f.store, f.reg.ground_truth());
  s.execute(QueryRequest{ClassId{5}, std::nullopt, std::nullopt});
  const auto again = s.execute(QueryRequest{ClassId{7}, std::nullopt, std::nullopt});
  // Cluster 1's centroid is already known; only cluster 3 costs a GT call.
  EXPECT_EQ(again.gt_inferences, 1u);
  EXPECT_EQ(again.object_ids, (std::vector<ObjectId>{6}));
  EXPECT_EQ(s.total_gt_inferences(), 4u);
  EXPECT_EQ(s.cache_size(), 4u);
}

TEST(Query, KxNarrowsCandidates) {
  Fixture f;
  QuerySession s(f.index, f.store, f.reg.ground_truth());
  const auto r = s.execute(QueryRequest{ClassId{5}, 1, std::nullopt});
  EXPECT_EQ(r.clusters_examined, 1u);
  EXPECT_EQ(r.object_ids, (std::vector<ObjectId>{1, 2}));
  EXPECT_THROW(s.execute(QueryRequest{ClassId{5}, 4, std::nullopt}), Error);
}

TEST(Query, TimeRangeFiltersFrames) {
  Fixture f;
  QuerySession s(f.index, f.store, f.reg.ground_truth());
  const auto r = s.execute(QueryRequest{ClassId{5}, std::nullopt, std::make_pair(FrameId{1}, FrameId{2})});
  EXPECT_EQ(r.frame_ids, (std::vector<FrameId>{1, 2}));
  EXPECT_EQ(r.object_ids, (std::vector<ObjectId>{2, 3}));
  EXPECT_THROW(s.execute(QueryRequest{ClassId{5}, std::nullopt, std::make_pair(FrameId{3}, FrameId{2})}), Error);
}

TEST(Query, UnknownClass) {
  Fixture f;
  QuerySession s(f.index, f.store, f.reg.ground_truth());
  for (auto cls : {ClassId{1000}, kOtherClass}) {
    try {
      s.execute(QueryRequest{cls, std::nullopt, std::nullopt});
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::UnknownClass);
    }
  }
  EXPECT_THROW(s.query_other(ClassId{5}), Error);
}

TEST(Query, BatchedIncrementsAreDisjointAndSumToSingleShot) {
  Fixture f;
  QuerySession batch(f.index, f.store, f.reg.ground_truth());
  const std::vector<std::uint32_t> schedule{1, 2, 3};
  const auto steps = batch.batched(QueryRequest{ClassId{5}, std::nullopt, std::nullopt}, schedule);
  ASSERT_EQ(steps.size(), 3u);
  EXPECT_EQ(steps[0].matched_clusters, (std::vector<ClusterId>{0}));
  EXPECT_TRUE(steps[1].matched_clusters.empty());  // cluster 2 examined, not a match
  EXPECT_EQ(steps[1].clusters_examined, 1u);
  EXPECT_EQ(steps[2].matched_clusters, (std::vector<ClusterId>{1}));
  std::uint64_t gt = 0;
  for (const auto& s : steps) gt += s.gt_inferences;
  EXPECT_EQ(gt, 3u);

  QuerySession single(f.index, f.store, f.reg.ground_truth());
  EXPECT_EQ(single.execute(QueryRequest{ClassId{5}, 3, std::nullopt}).gt_inferences, gt);
}

TEST(Query, BatchedScheduleValidation) {
  Fixture f;
  QuerySession s(f.index, f.store, f.reg.ground_truth());
  const QueryRequest req{ClassId{5}, std::nullopt, std::nullopt};
  const std::vector<std::uint32_t> down{2, 1}, empty, beyond{1, 4};
  try {
    s.batched(req, down);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonMonotoneSchedule);
  }
  EXPECT_THROW(s.batched(req, empty), Error);
  try {
    s.batched(req, beyond);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::KxTooLarge);
  }
}

struct SpecializedRun {
  ObjectStream stream;
  ProfileRegistry reg = ProfileRegistry::defaults();
  TopKIndex index;

  SpecializedRun() {
    StreamSpec spec;
    spec.n_objects = 1500;
    spec.class_subset = 12;
    spec.dim = 8;
    stream = generate_stream(spec);
    reg.add(specialize_profile(reg.at("generic"), class_histogram(stream), 2));
    IngestOptions opts;
    opts.pixel_eps = kPixelDiffOff;
    index = ingest_stream(stream, Config{"generic.s2", 3, 2, 0.0, 100, {}}, reg, opts).index;
  }
};

TEST(Query, FoldedClassesGoThroughOther) {
  SpecializedRun run;
  const ObjectStore store(run.stream);
  const auto& kept = run.index.header().specialized_classes;
  ClassId folded{0};
  for (const auto& [cls, n] : class_histogram(run.stream)) {
    if (!std::binary_search(kept.begin(), kept.end(), cls)) {
      folded = cls;
      break;
    }
  }
  QuerySession s(run.index, store, run.reg.ground_truth());
  const auto r = s.execute(QueryRequest{folded, std::nullopt, std::nullopt});
  // Clusters are singletons at T=0, so a matched cluster is exactly an object of that class.
  for (auto id : r.object_ids) EXPECT_EQ(store.at(id).true_class, folded);
  EXPECT_EQ(r.clusters_examined, run.index.lookup(kOtherClass, 3).size());

  const auto o = s.execute(QueryRequest{kOtherClass, std::nullopt, std::nullopt});
  for (auto id : o.object_ids) {
    EXPECT_FALSE(std::binary_search(kept.begin(), kept.end(), *store.at(id).true_class));
  }
  EXPECT_GE(o.object_ids.size(), r.object_ids.size());
}

TEST(QueryProperty, BatchedMatchesSingleShotOnRandomSchedules) {
  SpecializedRun run;
  const ObjectStore store(run.stream);
  testing::Gen g(12);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::uint32_t> schedule;
    for (std::uint32_t k = 1; k <= 3; ++k) {
      if (g.coin()) schedule.push_back(k);
    }
    if (schedule.empty()) schedule.push_back(3);
    const auto cls = run.index.header().specialized_classes[g.uint(0, 1)];
    const QueryRequest req{cls, std::nullopt, std::nullopt};
    QuerySession batch(run.index, store, run.reg.ground_truth());
    const auto steps = batch.batched(req, schedule);
    std::set<ClusterId> seen;
    std::set<ObjectId> objects;
    std::uint64_t gt = 0;
    for (const auto& s : steps) {
      for (auto c : s.matched_clusters) EXPECT_TRUE(seen.insert(c).second);
      objects.insert(s.object_ids.begin(), s.object_ids.end());
      gt += s.gt_inferences;
    }
    QuerySession single(run.index, store, run.reg.ground_truth());
    const auto one = single.execute(QueryRequest{cls, schedule.back(), std::nullopt});
    EXPECT_EQ(gt, one.gt_inferences);
    EXPECT_EQ(std::vector<ObjectId>(objects.begin(), objects.end()), one.object_ids);
    EXPECT_EQ(std::vector<ClusterId>(seen.begin(), seen.end()), one.matched_clusters);
  }
}

TEST(Query, ParallelVerificationMatchesSerial) {
  SpecializedRun run;
  const ObjectStore store(run.stream);
  const auto cls = run.index.header().specialized_classes[0];
  QuerySession a(run.index, store, run.reg.ground_truth(), 1);
  QuerySession b(run.index, store, run.reg.ground_truth(), 4);
  const QueryRequest req{cls, std::nullopt, std::nullopt};
  const auto ra = a.execute(req), rb = b.execute(req);
  EXPECT_EQ(ra.object_ids, rb.object_ids);
  EXPECT_EQ(ra.gt_inferences, rb.gt_inferences);
}

}  // namespace
}  // namespace focus
