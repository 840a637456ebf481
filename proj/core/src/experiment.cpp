#include "focus/experiment.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "focus/error.hpp"
#include "focus/ingest.hpp"
#include "focus/query.hpp"
#include "focus/text_io.hpp"

namespace focus {

Baselines run_baselines(std::span<const DetectedObject> objects, const ClassifierProfile& gt,
                        std::span<const ClassId> classes, std::optional<std::pair<FrameId, FrameId>> range) {
  Baselines b;
  b.ingest_all = static_cast<double>(objects.size()) * gt.cost_units;
  std::uint64_t in_range = 0;
  for (const auto& o : objects) {
    if (!range || (o.frame_id >= range->first && o.frame_id <= range->second)) ++in_range;
  }
  for (auto c : classes) b.query_all[c] = static_cast<double>(in_range) * gt.cost_units;
  return b;
}

RunMeasurement measure_config(const ObjectStream& stream, const ProfileRegistry& registry, const Config& cfg,
                              const MeasureOptions& options) {
  const auto& gt = registry.ground_truth();
  IngestOptions io;
  io.pixel_eps = options.pixel_eps;
  io.seed = options.seed;
  const auto ingested = ingest_stream(stream, cfg, registry, io);
  const SegmentTruth truth(stream.objects, gt, stream.header.fps);
  const auto dominant = dominant_classes(truth.histogram(), options.dominant_coverage);
  const auto base = run_baselines(stream.objects, gt, dominant);
  const ObjectStore store(stream);

  RunMeasurement m;
  m.cfg = cfg;
  m.ingest_cost = ingested.report.ingest_cost_units;
  m.ingest_all = base.ingest_all;
  m.clusters = ingested.report.clusters_emitted;
  m.objects_classified = ingested.report.objects_classified;
  m.within_distance_budget = ingested.report.within_distance_budget;
  AccuracyReport acc;
  double query_total = 0.0, query_all_total = 0.0;
  for (auto cls : dominant) {
    QuerySession session(ingested.index, store, gt, options.jobs);
    const auto r = session.execute(QueryRequest{cls, std::nullopt, std::nullopt});
    acc.per_class[cls] = score_class(truth, cls, r.frame_ids, r.object_ids);
    query_total += r.query_cost_units;
    query_all_total += base.query_all.at(cls);
  }
  acc.finish();
  if (!dominant.empty()) {
    m.query_cost = query_total / static_cast<double>(dominant.size());
    m.query_all = query_all_total / static_cast<double>(dominant.size());
  }
  m.precision = acc.macro_precision;
  m.recall = acc.macro_recall;
  m.object_recall = acc.macro_object_recall;
  return m;
}

RunMeasurement tune_and_measure(const ObjectStream& stream, const ProfileRegistry& registry,
                                const AccuracyTarget& targets, Policy policy, const TunerOptions& tuner,
                                const MeasureOptions& measure, TuneResult* tuned) {
  auto result = tune(stream, registry, targets, tuner);
  auto m = measure_config(stream, result.registry, result.outcome.pick(policy).cfg, measure);
  if (tuned) *tuned = std::move(result);
  return m;
}

std::string ExperimentSpec::to_text() const {
  std::string out = stream.to_text();
  std::vector<std::string> acc, fps;
  for (auto v : accuracy_sweep) acc.push_back(text::format_sig9(v));
  for (auto v : fps_sweep) fps.push_back(text::format_sig9(v));
  out += fmt::format(
      "precision_target={}\nrecall_target={}\npolicy={}\nm={}\npixel_eps={}\nrun_seed={}\n"
      "accuracy_sweep={}\nfps_sweep={}\nablations={}\nsweeps={}\n",
      text::format_fixed6(targets.precision), text::format_fixed6(targets.recall), to_string(policy), m,
      text::format_sig9(pixel_eps), run_seed, fmt::join(acc, ","), fmt::join(fps, ","), ablations ? 1 : 0,
      sweeps ? 1 : 0);
  return out;
}

ExperimentSpec ExperimentSpec::parse(std::string_view body) {
  ExperimentSpec spec;
  std::string stream_text;
  auto flag = [](const std::string& v) { return v == "1" || v == "true" || v == "yes"; };
  for (const auto& [key, value] : text::parse_key_values(body)) {
    if (key == "precision_target") spec.targets.precision = text::parse_double(value);
    else if (key == "recall_target") spec.targets.recall = text::parse_double(value);
    else if (key == "policy") spec.policy = parse_policy(value);
    else if (key == "m") spec.m = text::parse_u32(value);
    else if (key == "pixel_eps") spec.pixel_eps = text::parse_double(value);
    else if (key == "run_seed") spec.run_seed = text::parse_u64(value);
    else if (key == "accuracy_sweep") spec.accuracy_sweep = text::parse_double_csv(value);
    else if (key == "fps_sweep") spec.fps_sweep = text::parse_double_csv(value);
    else if (key == "ablations") spec.ablations = flag(value);
    else if (key == "sweeps") spec.sweeps = flag(value);
    else stream_text += fmt::format("{}={}\n", key, value);
  }
  spec.stream = StreamSpec::parse(stream_text);
  if (spec.m == 0) throw Error(Errc::NonPositiveM, "m must be at least 1");
  return spec;
}

ExperimentSpec ExperimentSpec::load(const std::filesystem::path& path) { return parse(text::read_file(path)); }

const RunMeasurement* ExperimentReport::find(std::string_view section, std::string_view label) const {
  for (const auto& r : rows) {
    if (r.section == section && r.label == label) return &r;
  }
  return nullptr;
}

std::string ExperimentReport::to_csv() const {
  std::string out =
      "section,label,profile,k,l_s,t,m,ingest_cost,ingest_all,ingest_speedup,query_cost,query_all,"
      "query_speedup,precision,recall,object_recall,clusters\n";
  auto f6 = [](double v) { return text::format_fixed6(v); };
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.section, r.label, r.cfg.profile_id,
                       r.cfg.k, r.cfg.l_s, f6(r.cfg.t), r.cfg.m, f6(r.ingest_cost), f6(r.ingest_all),
                       f6(r.ingest_speedup()), f6(r.query_cost), f6(r.query_all), f6(r.query_speedup()),
                       f6(r.precision), f6(r.recall), f6(r.object_recall), r.clusters);
  }
  return out;
}

namespace {

TunerOptions tuner_options(const ExperimentSpec& spec) {
  TunerOptions t;
  t.m = spec.m;
  t.pixel_eps = spec.pixel_eps;
  t.seed = spec.run_seed;
  t.jobs = spec.jobs;
  return t;
}

MeasureOptions measure_options(const ExperimentSpec& spec) {
  MeasureOptions m;
  m.seed = spec.run_seed;
  m.pixel_eps = spec.pixel_eps;
  m.jobs = spec.jobs;
  return m;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  ExperimentReport report;
  const auto stream = generate_stream(spec.stream);
  const auto registry = ProfileRegistry::defaults(spec.stream.vocabulary);
  const auto& gt = registry.ground_truth();
  const auto tuner = tuner_options(spec);
  const auto measure = measure_options(spec);

  {
    const SegmentTruth truth(stream.objects, gt, stream.header.fps);
    const auto dom = dominant_classes(truth.histogram(), 0.95);
    report.occurring_classes = truth.histogram().size();
    report.top_class_share = report.occurring_classes == 0
                                 ? 0.0
                                 : static_cast<double>(dom.size()) / static_cast<double>(report.occurring_classes);
    report.nn_same_class = nearest_neighbor_same_class(stream, 5000);
  }

  TuneResult main;
  auto headline = tune_and_measure(stream, registry, spec.targets, spec.policy, tuner, measure, &main);
  for (auto p : {Policy::Balance, Policy::OptIngest, Policy::OptQuery}) {
    auto m = p == spec.policy ? headline : measure_config(stream, main.registry, main.outcome.pick(p).cfg, measure);
    m.section = "policy";
    m.label = std::string(to_string(p));
    report.rows.push_back(std::move(m));
  }

  if (spec.ablations) {
    auto compressed = tuner;
    compressed.specialize = false;
    compressed.t_values = {0.0};
    auto m1 = tune_and_measure(stream, registry, spec.targets, spec.policy, compressed, measure);
    m1.section = "ablation";
    m1.label = "compressed";
    report.rows.push_back(m1);

    auto specialized = tuner;
    specialized.keep_base = false;
    specialized.t_values = {0.0};
    auto m2 = tune_and_measure(stream, registry, spec.targets, spec.policy, specialized, measure);
    m2.section = "ablation";
    m2.label = "+specialized";
    report.rows.push_back(m2);

    auto m3 = headline;
    m3.section = "ablation";
    m3.label = "+clustering";
    report.rows.push_back(m3);
  }

  {
    // Every dominant class queried once in one session: centroids shared by
    // several classes are verified only once.
    const auto& cfg = main.outcome.pick(spec.policy).cfg;
    IngestOptions io;
    io.pixel_eps = spec.pixel_eps;
    io.seed = spec.run_seed;
    const auto ingested = ingest_stream(stream, cfg, main.registry, io);
    const SegmentTruth truth(stream.objects, gt, stream.header.fps);
    const auto dominant = dominant_classes(truth.histogram(), 0.95);
    const ObjectStore store(stream);
    QuerySession session(ingested.index, store, gt, spec.jobs);
    for (auto cls : dominant) session.execute(QueryRequest{cls, std::nullopt, std::nullopt});
    RunMeasurement m = headline;
    m.section = "amortization";
    m.label = "all-dominant-classes";
    m.query_cost = static_cast<double>(session.total_gt_inferences()) * gt.cost_units;
    m.query_all = static_cast<double>(stream.objects.size()) * gt.cost_units;
    report.rows.push_back(m);
  }

  if (spec.sweeps) {
    for (auto target : spec.accuracy_sweep) {
      auto m = tune_and_measure(stream, registry, AccuracyTarget{target, target}, spec.policy, tuner, measure);
      m.section = "accuracy";
      m.label = text::format_fixed6(target);
      report.rows.push_back(m);
    }
    for (auto fps : spec.fps_sweep) {
      auto s = spec.stream;
      s.fps = fps;
      s.cap_duplicates = true;
      const auto swept = generate_stream(s);
      auto m = tune_and_measure(swept, registry, spec.targets, spec.policy, tuner, measure);
      m.section = "fps";
      m.label = text::format_sig9(fps);
      report.rows.push_back(m);
    }
  }
  return report;
}

std::string csv_to_markdown(std::string_view csv) {
  std::string out;
  bool header = true;
  for (auto line : text::split(csv, '\n')) {
    if (text::trim(line).empty()) continue;
    const auto cells = text::split(line, ',');
    out += "|";
    for (auto c : cells) out += fmt::format(" {} |", c);
    out += '\n';
    if (header) {
      out += "|";
      for (std::size_t i = 0; i < cells.size(); ++i) out += " --- |";
      out += '\n';
      header = false;
    }
  }
  return out;
}

}  // namespace focus
