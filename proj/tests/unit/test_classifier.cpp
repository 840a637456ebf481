#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "focus/classifier.hpp"
#include "focus/error.hpp"
#include "test_support.hpp"

namespace focus {
namespace {

using testing::make_object;

ClassifierProfile profile_with(double p1, double rho, std::uint32_t vocabulary = 1000) {
  ClassifierProfile p;
  p.id = "cheap";
  p.kind = ProfileKind::GenericCheap;
  p.rank_model = {p1, rho};
  p.cost_units = 1.0;
  p.vocabulary = vocabulary;
  return p;
}

bool contains(std::span<const RankedEntry> top, ClassId c) {
  return std::any_of(top.begin(), top.end(), [&](const RankedEntry& e) { return e.cls == c; });
}

TEST(Classify, TopSixtyInclusionRate) {
  const auto p = profile_with(0.5, 0.95);
  const double expected = 1.0 - 0.5 * std::pow(0.95, 59);  // 0.9757
  int hits = 0;
  const int n = 10'000;
  for (int i = 0; i < n; ++i) {
    const auto obj = make_object(static_cast<ObjectId>(i), 0, static_cast<std::uint32_t>(i % 1000), {0.0});
    const auto r = classify(p, obj, classification_seed(1, "s", p.id, obj.object_id), 60);
    if (contains(r.top(60), *obj.true_class)) ++hits;
  }
  EXPECT_NEAR(static_cast<double>(hits) / n, expected, 0.01);
  EXPECT_NEAR(expected, 0.976, 0.001);
}

TEST(Classify, OutputIsDistinctAndPrefixStable) {
  const auto p = profile_with(0.3, 0.9, 50);
  testing::Gen g(4);
  for (int i = 0; i < 300; ++i) {
    const auto obj = make_object(static_cast<ObjectId>(i), 0, static_cast<std::uint32_t>(g.uint(0, 49)), {1.0, 2.0});
    const auto seed = g.uint(0, UINT64_MAX);
    const auto full = classify(p, obj, seed);
    ASSERT_EQ(full.ranked.size(), 50u);
    std::set<ClassId> seen;
    for (const auto& e : full.ranked) {
      EXPECT_FALSE(e.cls.is_other());
      EXPECT_LT(e.cls.value, 50u);
      seen.insert(e.cls);
    }
    EXPECT_EQ(seen.size(), 50u);
    const auto depth = static_cast<std::size_t>(g.uint(1, 50));
    const auto part = classify(p, obj, seed, depth);
    ASSERT_EQ(part.ranked.size(), depth);
    EXPECT_TRUE(std::equal(part.ranked.begin(), part.ranked.end(), full.ranked.begin()));
  }
}

TEST(Classify, DeterministicForSameSeed) {
  const auto p = profile_with(0.5, 0.95);
  const auto obj = make_object(42, 3, 17, {0.5, 0.5});
  const auto a = classify(p, obj, 99, 20);
  const auto b = classify(p, obj, 99, 20);
  EXPECT_EQ(a.ranked, b.ranked);
  EXPECT_EQ(a.feature, b.feature);
  EXPECT_NE(classification_seed(1, "s", "cheap", 1), classification_seed(1, "s", "cheap", 2));
  EXPECT_NE(classification_seed(1, "s", "cheap", 1), classification_seed(2, "s", "cheap", 1));
}

TEST(Classify, SpecializedOutputStaysInClassSet) {
  auto base = profile_with(0.6, 0.9);
  const std::map<ClassId, std::uint64_t> hist{{ClassId{5}, 10}, {ClassId{7}, 8}, {ClassId{9}, 1}};
  const auto s = specialize_profile(base, hist, 2);
  for (std::uint32_t cls : {5u, 7u, 9u, 100u}) {
    for (ObjectId id = 0; id < 50; ++id) {
      const auto r = classify(s, make_object(id, 0, cls, {0.0}), id * 7 + cls);
      ASSERT_EQ(r.ranked.size(), 3u);
      for (const auto& e : r.ranked) EXPECT_TRUE(s.emits(e.cls));
      EXPECT_TRUE(contains(r.ranked, s.map_class(ClassId{cls})));
    }
  }
}

TEST(Classify, FeatureNoiseFollowsProfile) {
  auto p = profile_with(0.5, 0.9);
  const auto obj = make_object(1, 0, 3, {1.0, 2.0, 3.0});
  EXPECT_EQ(classify(p, obj, 5, 1).feature, obj.feature);
  p.feature_noise_sigma = 0.1;
  EXPECT_NE(classify(p, obj, 5, 1).feature, obj.feature);
}

TEST(Classify, MissingLabelThrows) {
  auto obj = make_object(1, 0, 3, {0.0});
  obj.true_class.reset();
  try {
    classify(profile_with(0.5, 0.9), obj, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MissingTrueClass);
  }
}

TEST(GroundTruth, LabelIsTheTrueClass) {
  const auto reg = ProfileRegistry::defaults();
  for (std::uint32_t c : {0u, 17u, 999u}) {
    EXPECT_EQ(ground_truth_label(reg.ground_truth(), make_object(c, 0, c, {0.0})), ClassId{c});
  }
  EXPECT_THROW(ground_truth_label(reg.at("generic"), make_object(1, 0, 1, {0.0})), Error);
}

TEST(Precomputed, MatchesSourceAtOrBelowDepth) {
  SyntheticClassifier source(profile_with(0.5, 0.95), 3, "stream");
  std::vector<DetectedObject> objs;
  for (ObjectId i = 0; i < 40; ++i) objs.push_back(make_object(40 - i, i, static_cast<std::uint32_t>(i), {0.0}));
  PrecomputedClassifier pre(source, objs, 10);
  for (const auto& o : objs) {
    EXPECT_EQ(pre.classify(o, 10).ranked, source.classify(o, 10).ranked);
    EXPECT_EQ(pre.classify(o, 4).ranked, source.classify(o, 4).ranked);
  }
  EXPECT_THROW(pre.classify(objs[0], 11), Error);
  EXPECT_THROW(pre.classify(make_object(1000, 0, 1, {0.0}), 1), Error);
}

}  // namespace
}  // namespace focus
