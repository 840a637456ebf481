#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "focus/classifier.hpp"
#include "focus/config.hpp"
#include "focus/metrics.hpp"
#include "focus/profile.hpp"
#include "focus/stream.hpp"

namespace focus {

enum class Policy { Balance, OptIngest, OptQuery };

std::string_view to_string(Policy p) noexcept;
Policy parse_policy(std::string_view s);

struct ConfigEvaluation {
  Config cfg;
  double est_recall = 0.0;
  double est_precision = 0.0;
  double ingest_cost = 0.0;
  double query_cost = 0.0;  // mean over dominant classes
  bool viable = false;
};

struct TuneOutcome {
  std::vector<ConfigEvaluation> pareto;  // sorted by ingest cost, then query cost, then cfg
  ConfigEvaluation balance;
  ConfigEvaluation opt_ingest;
  ConfigEvaluation opt_query;

  const ConfigEvaluation& pick(Policy p) const;
};

/// Non-dominated set under (ingest_cost, query_cost) plus the three policy
/// picks. Sum ties go to lower ingest, then lower query, then config order.
TuneOutcome pareto_and_policies(std::span<const ConfigEvaluation> viable);

/// A labeled slice of a stream plus everything needed to score it.
struct EvaluationSet {
  StreamHeader header;
  std::vector<DetectedObject> objects;
  std::unique_ptr<SegmentTruth> truth;
  std::vector<ClassId> dominant;
};

/// Labels every object with GT and picks the dominant classes.
EvaluationSet make_evaluation_set(StreamHeader header, std::vector<DetectedObject> objects,
                                  const ClassifierProfile& gt, double dominant_coverage = 0.95);

/// Random whole one-second segments until min(max_objects, fraction * n)
/// objects are collected; objects keep stream order.
std::vector<DetectedObject> draw_sample(const ObjectStream& stream, std::size_t max_objects, double fraction,
                                        std::uint64_t seed);

struct EvaluationOptions {
  double pixel_eps = 0.01;
  unsigned jobs = 1;
};

/// Ingests `set` with `cfg`, runs one fresh query per dominant class and
/// scores the results with the segment criterion.
ConfigEvaluation evaluate_config(const EvaluationSet& set, const Config& cfg, const Classifier& classifier,
                                 const ClassifierProfile& gt, const EvaluationOptions& options = {});

/// Candidate ingest classifier with its grid of K values.
struct Candidate {
  const Classifier* classifier = nullptr;
  std::uint32_t l_s = 0;
  std::vector<std::uint32_t> k_values;
};

/// Step 1 keeps (profile, l_s, K) meeting the recall target at T=0; step 2
/// sweeps T ascending for the survivors and keeps the viable points. Every
/// evaluation performed is appended to `log` when given.
std::vector<ConfigEvaluation> two_step_search(const EvaluationSet& set, std::span<const Candidate> candidates,
                                              std::span<const double> t_values, std::uint32_t m,
                                              const AccuracyTarget& targets, const ClassifierProfile& gt,
                                              const EvaluationOptions& options,
                                              std::vector<ConfigEvaluation>* log = nullptr);

/// T grid: 0 plus `steps - 1` log-spaced values up to twice the median
/// distance from each object to its nearest predecessor among the previous
/// `window`. Values are rounded to 1e-6 so they survive the config format.
std::vector<double> derive_t_grid(std::span<const DetectedObject> objects, std::size_t steps = 12,
                                  std::size_t window = 100);

struct TunerOptions {
  std::vector<std::uint32_t> k_values{1, 2, 4, 8, 16, 32, 64, 128, 200};
  std::vector<std::uint32_t> l_s_values{5, 10, 25, 50};
  std::vector<double> t_values;  // empty: derive_t_grid on the sample
  std::size_t t_steps = 12;
  std::vector<std::string> profiles;  // empty: every non-GT profile registered
  bool specialize = true;             // derive specialized variants of generic profiles
  bool keep_base = true;              // also offer the generic profiles themselves
  std::uint32_t m = 100;
  std::size_t sample_max = 5000;
  double sample_fraction = 0.5;
  double dominant_coverage = 0.95;
  double pixel_eps = 0.01;
  std::uint64_t seed = 0;
  unsigned jobs = 1;

  /// Grid file: key=value lines k, l_s, t (comma lists), profiles, m.
  void apply_grid_text(std::string_view text);
};

struct TuneResult {
  std::vector<ConfigEvaluation> evaluations;  // all, sorted by cfg
  std::vector<ConfigEvaluation> viable;       // sorted by cfg
  TuneOutcome outcome;
  ProfileRegistry registry;  // input registry plus the specialized profiles built
  std::vector<double> t_values;
  std::size_t sample_objects = 0;
};

/// Full tuning run. Throws NoViableConfig when nothing meets the targets.
TuneResult tune(const ObjectStream& stream, const ProfileRegistry& registry, const AccuracyTarget& targets,
                const TunerOptions& options);

std::string evaluations_csv(std::span<const ConfigEvaluation> evals);

}  // namespace focus
