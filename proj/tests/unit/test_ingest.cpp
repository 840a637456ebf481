#include <gtest/gtest.h>

#include "focus/error.hpp"
#include "focus/generator.hpp"
#include "focus/ingest.hpp"
#include "test_support.hpp"

namespace focus {
namespace {

using testing::make_object;

TEST(PixelDiff, SameOrAdjacentFramesWithinEps) {
  const auto a = make_object(1, 10, 0, {0.0}, {0.50, 0.50});
  const auto near = make_object(2, 11, 0, {0.0}, {0.505, 0.495});  // mean abs diff 0.005
  const auto far = make_object(3, 11, 0, {0.0}, {0.53, 0.50});     // 0.015
  EXPECT_TRUE(pixel_diff(a, near, 0.01));
  EXPECT_FALSE(pixel_diff(a, far, 0.01));
  EXPECT_TRUE(pixel_diff(a, far, 0.015 + 1e-12));
  // Two frames apart never counts, however similar.
  EXPECT_FALSE(pixel_diff(a, make_object(4, 12, 0, {0.0}, {0.5, 0.5}), 0.01));
  EXPECT_TRUE(pixel_diff(a, make_object(5, 10, 0, {0.0}, {0.5, 0.5}), 0.0));
}

TEST(PixelDiff, NegativeEpsTurnsItOff) {
  const auto a = make_object(1, 0, 0, {0.0}, {0.5});
  EXPECT_FALSE(pixel_diff(a, a, kPixelDiffOff));
}

TEST(PixelDiff, SignatureLengthMismatch) {
  try {
    pixel_diff(make_object(1, 0, 0, {0.0}, {0.5}), make_object(2, 0, 0, {0.0}, {0.5, 0.5}), 0.01);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SignatureLengthMismatch);
  }
}

// 10000 objects; every fifth repeats its predecessor in the same frame.
ObjectStream twenty_percent_duplicates() {
  ObjectStream s;
  s.header = StreamHeader{"dup", 30.0, 2, 1000, 2};
  FrameId frame = 0;
  for (ObjectId id = 0; id < 10000; ++id) {
    const bool dup = id % 5 == 4;
    if (!dup) frame += 2;
    const double v = dup ? static_cast<double>(id - 1) : static_cast<double>(id);
    s.objects.push_back(make_object(id, frame, static_cast<std::uint32_t>(id % 7), {v, 0.0}, {v / 1e4, 0.0}));
  }
  return s;
}

TEST(Ingest, DuplicatesSkipTheClassifier) {
  const auto stream = twenty_percent_duplicates();
  stream.validate();
  const auto reg = ProfileRegistry::defaults();
  const Config cfg{"generic", 2, 1000, 0.0, 100, {}};
  const auto r = ingest_stream(stream, cfg, reg).report;
  EXPECT_EQ(r.objects_seen, 10000u);
  EXPECT_EQ(r.objects_deduped, 2000u);
  EXPECT_EQ(r.objects_classified, 8000u);
  EXPECT_DOUBLE_EQ(r.ingest_cost_units, 8000 * 7.25);
  EXPECT_EQ(r.gt_inferences, 0u);
  EXPECT_EQ(r.clusters_emitted, 8000u);
  EXPECT_TRUE(r.within_distance_budget);
}

TEST(Ingest, PixelDiffOffClassifiesEverything) {
  const auto stream = twenty_percent_duplicates();
  const auto reg = ProfileRegistry::defaults();
  IngestOptions opts;
  opts.pixel_eps = kPixelDiffOff;
  const auto r = ingest_stream(stream, Config{"generic", 1, 1000, 0.0, 100, {}}, reg, opts).report;
  EXPECT_EQ(r.objects_classified, r.objects_seen);
  EXPECT_EQ(r.objects_deduped, 0u);
}

TEST(Ingest, DuplicateJoinsThePreviousCluster) {
  const auto stream = twenty_percent_duplicates();
  const auto reg = ProfileRegistry::defaults();
  const auto idx = ingest_stream(stream, Config{"generic", 1, 1000, 0.0, 100, {}}, reg).index;
  std::map<ObjectId, ClusterId> where;
  for (const auto& [id, c] : idx.clusters()) {
    for (auto o : c.member_object_ids) where[o] = id;
  }
  ASSERT_EQ(where.size(), 10000u);
  for (ObjectId id = 4; id < 10000; id += 5) EXPECT_EQ(where[id], where[id - 1]);
}

TEST(Ingest, GroundTruthProfileRejected) {
  const auto stream = twenty_percent_duplicates();
  const auto reg = ProfileRegistry::defaults();
  try {
    ingest_stream(stream, Config{"gt", 1, 1000, 0.0, 100, {}}, reg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidConfig);
  }
}

TEST(Ingest, IndexHeaderDescribesTheRun) {
  StreamSpec spec;
  spec.n_objects = 600;
  spec.class_subset = 10;
  spec.dim = 8;
  auto reg = ProfileRegistry::defaults();
  const auto stream = generate_stream(spec);
  reg.add(specialize_profile(reg.at("generic"), class_histogram(stream), 3));
  const Config cfg{"generic.s3", 2, 3, 0.5, 20, {}};
  const auto res = ingest_stream(stream, cfg, reg);
  const auto& h = res.index.header();
  EXPECT_EQ(h.stream_id, spec.stream_id);
  EXPECT_EQ(h.objects, 600u);
  EXPECT_EQ(h.config, cfg);
  EXPECT_EQ(h.specialized_classes.size(), 3u);
  // Every object appears once across the clusters.
  std::size_t members = 0;
  for (const auto& [_, c] : res.index.clusters()) {
    members += c.member_object_ids.size();
    EXPECT_LE(c.class_ranks.size(), 2u * c.member_object_ids.size());
    for (const auto& [cls, rank] : c.class_ranks) {
      EXPECT_LE(rank, 2u);
      EXPECT_TRUE(cls.is_other() || res.index.indexes_directly(cls));
    }
  }
  EXPECT_EQ(members, 600u);
}

TEST(Ingest, DeterministicForSeed) {
  StreamSpec spec;
  spec.n_objects = 500;
  spec.class_subset = 8;
  spec.dim = 4;
  const auto stream = generate_stream(spec);
  const auto reg = ProfileRegistry::defaults();
  const Config cfg{"generic", 4, 1000, 1.0, 10, {}};
  IngestOptions opts;
  opts.seed = 3;
  EXPECT_EQ(ingest_stream(stream, cfg, reg, opts).index.to_text(), ingest_stream(stream, cfg, reg, opts).index.to_text());
}

}  // namespace
}  // namespace focus
