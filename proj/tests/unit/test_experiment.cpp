#include <gtest/gtest.h>

#include "focus/experiment.hpp"
#include "test_support.hpp"

namespace focus {
namespace {

using testing::make_object;

TEST(Baselines, GroundTruthOnEveryObject) {
  std::vector<DetectedObject> objs;
  for (ObjectId i = 0; i < 1000; ++i) objs.push_back(make_object(i, i / 4, 1, {0.0}));
  const auto gt = ProfileRegistry::defaults().ground_truth();
  const std::vector<ClassId> classes{ClassId{1}, ClassId{2}};
  const auto b = run_baselines(objs, gt, classes);
  EXPECT_DOUBLE_EQ(b.ingest_all, 58000.0);
  EXPECT_DOUBLE_EQ(b.query_all.at(ClassId{2}), 58000.0);
  // Frames 10..19 hold 40 objects.
  const auto ranged = run_baselines(objs, gt, classes, std::make_pair(FrameId{10}, FrameId{19}));
  EXPECT_DOUBLE_EQ(ranged.query_all.at(ClassId{1}), 40 * 58.0);
  EXPECT_DOUBLE_EQ(ranged.ingest_all, 58000.0);
}

TEST(Markdown, RendersHeaderRuleAndRows) {
  EXPECT_EQ(csv_to_markdown("a,b\n1,2\n"), "| a | b |\n| --- | --- |\n| 1 | 2 |\n");
  EXPECT_EQ(csv_to_markdown(""), "");
}

TEST(ExperimentSpec, RoundTrip) {
  ExperimentSpec s;
  s.stream.n_objects = 1234;
  s.policy = Policy::OptQuery;
  s.accuracy_sweep = {0.9};
  s.fps_sweep = {30, 2};
  s.ablations = false;
  const auto back = ExperimentSpec::parse(s.to_text());
  EXPECT_EQ(back.stream, s.stream);
  EXPECT_EQ(back.policy, Policy::OptQuery);
  EXPECT_EQ(back.accuracy_sweep, s.accuracy_sweep);
  EXPECT_EQ(back.fps_sweep, s.fps_sweep);
  EXPECT_FALSE(back.ablations);
  EXPECT_EQ(back.to_text(), s.to_text());
}

TEST(Measure, SpeedupsAgainstBaselines) {
  StreamSpec spec;
  spec.n_objects = 1500;
  spec.class_subset = 10;
  spec.dim = 8;
  const auto stream = generate_stream(spec);
  const auto reg = ProfileRegistry::defaults();
  const auto m = measure_config(stream, reg, Config{"generic", 4, 1000, 0.0, 100, {}});
  EXPECT_DOUBLE_EQ(m.ingest_all, 1500 * 58.0);
  EXPECT_DOUBLE_EQ(m.ingest_cost, static_cast<double>(m.objects_classified) * 7.25);
  EXPECT_EQ(m.objects_classified, 1500u - 300u);
  EXPECT_GT(m.ingest_speedup(), 8.0);
  EXPECT_GT(m.query_speedup(), 1.0);
  EXPECT_TRUE(m.within_distance_budget);
  // T=0 with every centroid verified: nothing wrong gets returned.
  EXPECT_EQ(m.precision, 1.0);
}

TEST(Report, CsvHasHeaderAndRows) {
  ExperimentReport r;
  RunMeasurement m;
  m.section = "main";
  m.label = "balance";
  m.cfg = Config{"generic", 2, 1000, 0.5, 100, {}};
  r.rows.push_back(m);
  const auto csv = r.to_csv();
  EXPECT_NE(csv.find("\nmain,balance,generic,2,1000,0.500000,100,"), std::string::npos);
  EXPECT_EQ(r.find("main", "balance"), &r.rows[0]);
  EXPECT_EQ(r.find("main", "nope"), nullptr);
}

}  // namespace
}  // namespace focus
