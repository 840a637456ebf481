#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "focus/config.hpp"
#include "focus/generator.hpp"
#include "focus/metrics.hpp"
#include "focus/profile.hpp"
#include "focus/stream.hpp"
#include "focus/tuner.hpp"

namespace focus {

struct Baselines {
  double ingest_all = 0.0;                 // GT on every object at ingest
  std::map<ClassId, double> query_all;     // GT on every in-range object, per class
};

/// Both baselines already skip frames without moving objects, since such
/// frames never reach the object stream.
Baselines run_baselines(std::span<const DetectedObject> objects, const ClassifierProfile& gt,
                        std::span<const ClassId> classes,
                        std::optional<std::pair<FrameId, FrameId>> range = std::nullopt);

/// Outcome of ingesting a whole stream with one config and querying every
/// dominant class in its own session.
struct RunMeasurement {
  std::string section;
  std::string label;
  Config cfg;
  double ingest_cost = 0.0;
  double ingest_all = 0.0;
  double query_cost = 0.0;  // mean per dominant class
  double query_all = 0.0;   // mean per dominant class
  double precision = 0.0;   // segment level, macro over dominant classes
  double recall = 0.0;
  double object_recall = 0.0;
  std::uint64_t clusters = 0;
  std::uint64_t objects_classified = 0;
  bool within_distance_budget = true;

  double ingest_speedup() const { return ingest_cost > 0.0 ? ingest_all / ingest_cost : 0.0; }
  double query_speedup() const { return query_cost > 0.0 ? query_all / query_cost : 0.0; }
};

struct MeasureOptions {
  std::uint64_t seed = 0;
  double pixel_eps = 0.01;
  double dominant_coverage = 0.95;
  unsigned jobs = 1;
};

RunMeasurement measure_config(const ObjectStream& stream, const ProfileRegistry& registry, const Config& cfg,
                              const MeasureOptions& options = {});

struct ExperimentSpec {
  StreamSpec stream;
  AccuracyTarget targets;
  Policy policy = Policy::Balance;
  std::uint32_t m = 100;
  double pixel_eps = 0.01;
  std::uint64_t run_seed = 7;
  std::vector<double> accuracy_sweep{0.95, 0.97, 0.99};
  std::vector<double> fps_sweep{30, 10, 5, 1};
  bool ablations = true;
  bool sweeps = true;
  unsigned jobs = 1;

  std::string to_text() const;
  /// Stream keys go to StreamSpec; the rest are experiment settings.
  static ExperimentSpec parse(std::string_view text);
  static ExperimentSpec load(const std::filesystem::path& path);
};

struct ExperimentReport {
  std::vector<RunMeasurement> rows;
  double nn_same_class = 0.0;
  double top_class_share = 0.0;     // share of occurring classes needed to cover 95% of objects
  std::size_t occurring_classes = 0;

  const RunMeasurement* find(std::string_view section, std::string_view label) const;
  std::string to_csv() const;
};

/// Generates the stream, tunes, ingests, queries and scores, then repeats for
/// the policies, ablations and sensitivity sweeps.
ExperimentReport run_experiment(const ExperimentSpec& spec);

/// Tunes `stream` and measures the config picked by `policy`.
RunMeasurement tune_and_measure(const ObjectStream& stream, const ProfileRegistry& registry,
                                const AccuracyTarget& targets, Policy policy, const TunerOptions& tuner,
                                const MeasureOptions& measure, TuneResult* tuned = nullptr);

/// Renders results.csv as a Markdown table.
std::string csv_to_markdown(std::string_view csv);

}  // namespace focus
