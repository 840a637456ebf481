#include <gtest/gtest.h>

#include <cmath>

#include "focus/error.hpp"
#include "focus/profile.hpp"
#include "test_support.hpp"

namespace focus {
namespace {

constexpr ClassId kCar{0}, kPerson{1}, kDog{2};

ClassifierProfile base_profile(double cost = 8.0) {
  ClassifierProfile p;
  p.id = "cheap";
  p.kind = ProfileKind::GenericCheap;
  p.rank_model = {0.6, 0.9};
  p.cost_units = cost;
  p.vocabulary = 1000;
  return p;
}

TEST(Specialize, KeepsMostFrequentClassesPlusOther) {
  const std::map<ClassId, std::uint64_t> hist{{kCar, 900}, {kPerson, 80}, {kDog, 20}};
  const auto s = specialize_profile(base_profile(), hist, 2);
  EXPECT_EQ(s.class_set, (std::vector<ClassId>{kCar, kPerson, kOtherClass}));
  EXPECT_EQ(s.map_class(kDog), kOtherClass);
  EXPECT_EQ(s.map_class(kCar), kCar);
  EXPECT_EQ(s.output_length(), 3u);
  EXPECT_EQ(s.l_s(), 2u);
  EXPECT_EQ(s.id, "cheap.s2");
  EXPECT_EQ(s.base_id, "cheap");
  EXPECT_EQ(s.kind, ProfileKind::Specialized);
}

TEST(Specialize, TiesGoToTheSmallerId) {
  const std::map<ClassId, std::uint64_t> hist{{ClassId{4}, 50}, {ClassId{3}, 50}};
  const auto s = specialize_profile(base_profile(), hist, 1);
  EXPECT_EQ(s.class_set, (std::vector<ClassId>{ClassId{3}, kOtherClass}));
}

TEST(Specialize, CostDropsByTheFactor) {
  const std::map<ClassId, std::uint64_t> hist{{kCar, 1}};
  const auto s = specialize_profile(base_profile(8.0), hist, 1);
  EXPECT_DOUBLE_EQ(s.cost_units, 0.8);
  EXPECT_DOUBLE_EQ(s.rank_model.p1, 0.6);
  EXPECT_DOUBLE_EQ(s.rank_model.rho, 0.9 * 0.7);
}

TEST(Specialize, PadsWithUnseenClassesInIdOrder) {
  const std::map<ClassId, std::uint64_t> hist{{ClassId{1}, 10}, {ClassId{0}, 0}};
  const auto s = specialize_profile(base_profile(), hist, 3);
  EXPECT_EQ(s.class_set, (std::vector<ClassId>{ClassId{1}, ClassId{0}, ClassId{2}, kOtherClass}));
}

TEST(Specialize, RejectsBadInputs) {
  const std::map<ClassId, std::uint64_t> empty;
  try {
    specialize_profile(base_profile(), empty, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyHistogram);
  }
  const std::map<ClassId, std::uint64_t> hist{{kCar, 3}};
  EXPECT_THROW(specialize_profile(base_profile(), hist, 0), Error);
  EXPECT_THROW(specialize_profile(base_profile(), hist, 1001), Error);
}

TEST(Specialize, ClassSetProperty) {
  testing::Gen g(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::map<ClassId, std::uint64_t> hist;
    const auto n = g.uint(1, 40);
    for (std::uint64_t i = 0; i < n; ++i) hist[ClassId{static_cast<std::uint32_t>(g.uint(0, 999))}] = g.uint(0, 20);
    hist[ClassId{static_cast<std::uint32_t>(g.uint(0, 999))}] = g.uint(1, 20);
    const auto l_s = static_cast<std::uint32_t>(g.uint(1, 60));
    const auto s = specialize_profile(base_profile(), hist, l_s);
    ASSERT_EQ(s.class_set.size(), l_s + 1u);
    EXPECT_TRUE(s.class_set.back().is_other());
    // Every kept class is at least as frequent as every dropped one.
    std::uint64_t min_kept = UINT64_MAX;
    for (std::size_t i = 0; i + 1 < s.class_set.size(); ++i) {
      auto it = hist.find(s.class_set[i]);
      min_kept = std::min<std::uint64_t>(min_kept, it == hist.end() ? 0 : it->second);
    }
    for (const auto& [c, count] : hist) {
      if (!s.emits(c)) EXPECT_LE(count, min_kept);
    }
    // And the registry accepts it.
    ProfileRegistry reg(1000);
    EXPECT_NO_THROW(reg.add(s));
  }
}

TEST(RankModel, InclusionMatchesClosedForm) {
  const RankModel rm{0.5, 0.95};
  EXPECT_DOUBLE_EQ(rm.inclusion(1, 1000), 0.5);
  EXPECT_NEAR(rm.inclusion(60, 1000), 1.0 - 0.5 * std::pow(0.95, 59), 1e-12);
  EXPECT_EQ(rm.inclusion(0, 1000), 0.0);
  EXPECT_EQ(rm.inclusion(1000, 1000), 1.0);
}

TEST(RankModel, InclusionIsMonotoneProperty) {
  testing::Gen g(9);
  for (int trial = 0; trial < 200; ++trial) {
    const RankModel rm{g.real(0.01, 1.0), g.real(0.0, 0.999)};
    const auto len = static_cast<std::size_t>(g.uint(1, 300));
    double prev = 0.0;
    for (std::size_t k = 1; k <= len; ++k) {
      const double p = rm.inclusion(k, len);
      EXPECT_GE(p, prev);
      EXPECT_LE(p, 1.0);
      prev = p;
    }
    EXPECT_EQ(prev, 1.0);
  }
}

TEST(RankModel, SampleRankInvertsInclusionProperty) {
  testing::Gen g(21);
  for (int trial = 0; trial < 2000; ++trial) {
    const RankModel rm{g.real(0.01, 1.0), g.real(0.0, 0.999)};
    const auto len = static_cast<std::size_t>(g.uint(1, 1000));
    const double u = g.real(0.0, 1.0);
    const auto k = rm.sample_rank(u, len);
    ASSERT_GE(k, 1u);
    ASSERT_LE(k, len);
    EXPECT_GE(rm.inclusion(k, len), u);
    if (k > 1) EXPECT_LT(rm.inclusion(k - 1, len), u);
  }
}

TEST(Registry, DefaultsHaveGroundTruthAndGeneric) {
  const auto reg = ProfileRegistry::defaults();
  EXPECT_EQ(reg.ground_truth().id, "gt");
  EXPECT_EQ(reg.ground_truth().cost_units, 58.0);
  EXPECT_EQ(reg.at("generic").kind, ProfileKind::GenericCheap);
  EXPECT_EQ(reg.at("generic").output_length(), 1000u);
}

TEST(Registry, TextRoundTrip) {
  auto reg = ProfileRegistry::defaults();
  const std::map<ClassId, std::uint64_t> hist{{kCar, 900}, {kPerson, 80}, {kDog, 20}};
  reg.add(specialize_profile(reg.at("generic"), hist, 2));
  const auto back = ProfileRegistry::parse(reg.to_text());
  EXPECT_EQ(back, reg);
  EXPECT_EQ(back.to_text(), reg.to_text());
}

TEST(Registry, RejectsInconsistentProfiles) {
  ProfileRegistry reg(1000);
  auto gt = base_profile();
  gt.id = "gt";
  gt.kind = ProfileKind::GroundTruth;
  gt.rank_model = {0.9, 0.5};
  EXPECT_THROW(reg.add(gt), Error);

  gt.rank_model = {1.0, 0.0};
  reg.add(gt);
  auto second = gt;
  second.id = "gt2";
  EXPECT_THROW(reg.add(second), Error);

  auto pricey = base_profile(100.0);
  reg.add(pricey);
  EXPECT_THROW(reg.cost_model(), Error);

  auto wrong_vocab = base_profile();
  wrong_vocab.vocabulary = 10;
  EXPECT_THROW(reg.add(wrong_vocab), Error);
}

TEST(Registry, UnknownProfile) {
  const auto reg = ProfileRegistry::defaults();
  try {
    reg.at("nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnknownProfile);
  }
}

}  // namespace
}  // namespace focus
