#include "focus/tuner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

#include <fmt/format.h>

#include "focus/error.hpp"
#include "focus/ingest.hpp"
#include "focus/query.hpp"
#include "focus/random.hpp"
#include "focus/text_io.hpp"

namespace focus {

std::string_view to_string(Policy p) noexcept {
  switch (p) {
    case Policy::Balance: return "balance";
    case Policy::OptIngest: return "opt-ingest";
    case Policy::OptQuery: return "opt-query";
  }
  return "balance";
}

Policy parse_policy(std::string_view s) {
  if (s == "balance") return Policy::Balance;
  if (s == "opt-ingest") return Policy::OptIngest;
  if (s == "opt-query") return Policy::OptQuery;
  throw Error(Errc::InvalidConfig, fmt::format("unknown policy '{}'", s));
}

const ConfigEvaluation& TuneOutcome::pick(Policy p) const {
  switch (p) {
    case Policy::OptIngest: return opt_ingest;
    case Policy::OptQuery: return opt_query;
    case Policy::Balance: break;
  }
  return balance;
}

namespace {

bool dominates(const ConfigEvaluation& a, const ConfigEvaluation& b) {
  return a.ingest_cost <= b.ingest_cost && a.query_cost <= b.query_cost &&
         (a.ingest_cost < b.ingest_cost || a.query_cost < b.query_cost);
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, jobs), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

bool cfg_order(const ConfigEvaluation& a, const ConfigEvaluation& b) { return config_less(a.cfg, b.cfg); }

std::vector<double> parse_real_list(std::string_view s) { return text::parse_double_csv(s); }

std::vector<std::uint32_t> parse_u32_list(std::string_view s) {
  std::vector<std::uint32_t> out;
  for (auto v : text::parse_u64_csv(s)) out.push_back(static_cast<std::uint32_t>(v));
  return out;
}

}  // namespace

TuneOutcome pareto_and_policies(std::span<const ConfigEvaluation> viable) {
  if (viable.empty()) throw Error(Errc::EmptyViableSet, "no viable configuration to choose from");
  TuneOutcome out;
  for (std::size_t i = 0; i < viable.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < viable.size() && !dominated; ++j) dominated = j != i && dominates(viable[j], viable[i]);
    if (!dominated) out.pareto.push_back(viable[i]);
  }
  std::sort(out.pareto.begin(), out.pareto.end(), [](const auto& a, const auto& b) {
    if (a.ingest_cost != b.ingest_cost) return a.ingest_cost < b.ingest_cost;
    if (a.query_cost != b.query_cost) return a.query_cost < b.query_cost;
    return config_less(a.cfg, b.cfg);
  });

  auto best = [&](auto key) {
    return *std::min_element(out.pareto.begin(), out.pareto.end(), [&](const auto& a, const auto& b) {
      const auto ka = key(a), kb = key(b);
      if (ka != kb) return ka < kb;
      return config_less(a.cfg, b.cfg);
    });
  };
  out.balance = best([](const ConfigEvaluation& e) { return std::make_tuple(e.ingest_cost + e.query_cost, e.ingest_cost, e.query_cost); });
  out.opt_ingest = best([](const ConfigEvaluation& e) { return std::make_tuple(e.ingest_cost, e.query_cost, 0.0); });
  out.opt_query = best([](const ConfigEvaluation& e) { return std::make_tuple(e.query_cost, e.ingest_cost, 0.0); });
  return out;
}

EvaluationSet make_evaluation_set(StreamHeader header, std::vector<DetectedObject> objects,
                                  const ClassifierProfile& gt, double dominant_coverage) {
  EvaluationSet set;
  set.header = std::move(header);
  set.objects = std::move(objects);
  set.truth = std::make_unique<SegmentTruth>(set.objects, gt, set.header.fps);
  set.dominant = dominant_classes(set.truth->histogram(), dominant_coverage);
  return set;
}

std::vector<DetectedObject> draw_sample(const ObjectStream& stream, std::size_t max_objects, double fraction,
                                        std::uint64_t seed) {
  const auto n = stream.objects.size();
  if (n == 0) return {};
  const auto want = std::max<std::size_t>(
      1, std::min(max_objects, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)))));
  std::map<std::uint64_t, std::vector<std::size_t>> by_segment;
  for (std::size_t i = 0; i < n; ++i) by_segment[segment_of(stream.objects[i].frame_id, stream.header.fps)].push_back(i);
  std::vector<std::uint64_t> segments;
  for (const auto& [seg, _] : by_segment) segments.push_back(seg);
  Rng rng(mix_seed(seed, 21));
  std::shuffle(segments.begin(), segments.end(), rng);
  std::vector<std::size_t> picked;
  for (auto seg : segments) {
    if (picked.size() >= want) break;
    const auto& members = by_segment[seg];
    picked.insert(picked.end(), members.begin(), members.end());
  }
  std::sort(picked.begin(), picked.end());
  std::vector<DetectedObject> out;
  out.reserve(picked.size());
  for (auto i : picked) out.push_back(stream.objects[i]);
  return out;
}

ConfigEvaluation evaluate_config(const EvaluationSet& set, const Config& cfg, const Classifier& classifier,
                                 const ClassifierProfile& gt, const EvaluationOptions& options) {
  if (set.objects.empty()) throw Error(Errc::EmptySample, "cannot evaluate a configuration on an empty sample");
  IngestOptions ingest_opts;
  ingest_opts.pixel_eps = options.pixel_eps;
  const auto ingested = ingest_objects(set.objects, set.header, cfg, classifier, ingest_opts);
  const ObjectStore store(set.objects);

  AccuracyReport acc;
  double gt_total = 0.0;
  for (auto cls : set.dominant) {
    QuerySession session(ingested.index, store, gt, options.jobs);
    const auto r = session.execute(QueryRequest{cls, std::nullopt, std::nullopt});
    acc.per_class[cls] = score_class(*set.truth, cls, r.frame_ids, r.object_ids);
    gt_total += r.query_cost_units;
  }
  acc.finish();

  ConfigEvaluation e;
  e.cfg = cfg;
  e.est_recall = acc.macro_recall;
  e.est_precision = acc.macro_precision;
  e.ingest_cost = ingested.report.ingest_cost_units;
  e.query_cost = set.dominant.empty() ? 0.0 : gt_total / static_cast<double>(set.dominant.size());
  e.viable = e.est_recall >= cfg.targets.recall && e.est_precision >= cfg.targets.precision;
  return e;
}

std::vector<ConfigEvaluation> two_step_search(const EvaluationSet& set, std::span<const Candidate> candidates,
                                              std::span<const double> t_values, std::uint32_t m,
                                              const AccuracyTarget& targets, const ClassifierProfile& gt,
                                              const EvaluationOptions& options,
                                              std::vector<ConfigEvaluation>* log) {
  if (set.objects.empty()) throw Error(Errc::EmptySample, "tuning sample is empty");
  struct Point {
    const Candidate* cand;
    Config cfg;
  };
  auto make_cfg = [&](const Candidate& c, std::uint32_t k, double t) {
    Config cfg;
    cfg.profile_id = c.classifier->profile().id;
    cfg.k = k;
    cfg.l_s = c.l_s;
    cfg.t = t;
    cfg.m = m;
    cfg.targets = targets;
    return cfg;
  };
  auto run_all = [&](const std::vector<Point>& points) {
    std::vector<ConfigEvaluation> out(points.size());
    parallel_for(points.size(), options.jobs, [&](std::size_t i) {
      EvaluationOptions inner = options;
      inner.jobs = 1;
      out[i] = evaluate_config(set, points[i].cfg, *points[i].cand->classifier, gt, inner);
    });
    return out;
  };

  // Step 1: recall only, no clustering.
  std::vector<Point> step1;
  for (const auto& c : candidates) {
    for (auto k : c.k_values) step1.push_back({&c, make_cfg(c, k, 0.0)});
  }
  const auto first = run_all(step1);
  if (log) log->insert(log->end(), first.begin(), first.end());

  // Step 2: sweep T for the survivors.
  std::vector<Point> step2;
  std::vector<ConfigEvaluation> viable;
  for (std::size_t i = 0; i < step1.size(); ++i) {
    if (first[i].est_recall < targets.recall) continue;
    for (auto t : t_values) {
      if (t == 0.0) {
        if (first[i].viable) viable.push_back(first[i]);
        continue;
      }
      auto p = step1[i];
      p.cfg.t = t;
      step2.push_back(p);
    }
  }
  const auto second = run_all(step2);
  if (log) log->insert(log->end(), second.begin(), second.end());
  for (const auto& e : second) {
    if (e.viable) viable.push_back(e);
  }
  std::sort(viable.begin(), viable.end(), cfg_order);
  return viable;
}

std::vector<double> derive_t_grid(std::span<const DetectedObject> objects, std::size_t steps, std::size_t window) {
  std::vector<double> grid{0.0};
  if (steps <= 1 || objects.size() < 2) return grid;
  std::vector<double> nearest;
  nearest.reserve(objects.size());
  for (std::size_t i = 1; i < objects.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    const std::size_t lo = i > window ? i - window : 0;
    for (std::size_t j = lo; j < i; ++j) {
      best = std::min(best, l2_distance(objects[i].feature.values(), objects[j].feature.values()));
    }
    nearest.push_back(best);
  }
  const auto mid = nearest.begin() + static_cast<std::ptrdiff_t>(nearest.size() / 2);
  std::nth_element(nearest.begin(), mid, nearest.end());
  const double tmax = 2.0 * *mid;
  if (!(tmax > 0.0)) return grid;
  const double tmin = tmax / 100.0;
  const std::size_t n = steps - 1;
  for (std::size_t j = 0; j < n; ++j) {
    const double frac = n == 1 ? 1.0 : static_cast<double>(j) / static_cast<double>(n - 1);
    const double v = std::round(tmin * std::pow(tmax / tmin, frac) * 1e6) / 1e6;
    if (v > grid.back()) grid.push_back(v);
  }
  return grid;
}

void TunerOptions::apply_grid_text(std::string_view body) {
  for (const auto& [key, value] : text::parse_key_values(body)) {
    if (key == "k") k_values = parse_u32_list(value);
    else if (key == "l_s") l_s_values = parse_u32_list(value);
    else if (key == "t") t_values = parse_real_list(value);
    else if (key == "m") m = text::parse_u32(value);
    else if (key == "specialize") specialize = value == "1" || value == "true" || value == "yes";
    else if (key == "keep_base") keep_base = value == "1" || value == "true" || value == "yes";
    else if (key == "profiles") {
      profiles.clear();
      for (auto p : text::split(value, ',')) {
        if (!text::trim(p).empty()) profiles.emplace_back(text::trim(p));
      }
    } else {
      throw Error(Errc::FormatError, fmt::format("unknown grid key '{}'", key));
    }
  }
  for (auto t : t_values) {
    if (!(t >= 0.0)) throw Error(Errc::InvalidConfig, "grid t values must be non-negative");
  }
}

TuneResult tune(const ObjectStream& stream, const ProfileRegistry& registry, const AccuracyTarget& targets,
                const TunerOptions& options) {
  const auto& gt = registry.ground_truth();
  auto sample = draw_sample(stream, options.sample_max, options.sample_fraction, options.seed);
  if (sample.empty()) throw Error(Errc::EmptySample, "stream has no objects to sample");
  const auto set = make_evaluation_set(stream.header, std::move(sample), gt, options.dominant_coverage);

  TuneResult result;
  result.registry = registry;
  result.sample_objects = set.objects.size();

  std::vector<std::string> ids = options.profiles;
  if (ids.empty()) {
    for (const auto& p : registry.profiles()) {
      if (p.kind != ProfileKind::GroundTruth) ids.push_back(p.id);
    }
  }
  std::vector<ClassifierProfile> chosen;
  std::set<std::string> seen;
  for (const auto& id : ids) {
    const auto& p = registry.at(id);
    if (p.kind == ProfileKind::GroundTruth) {
      throw Error(Errc::InvalidConfig, fmt::format("'{}' is the ground-truth model, not an ingest option", id));
    }
    const bool generic = p.kind == ProfileKind::GenericCheap;
    if ((!generic || options.keep_base) && seen.insert(p.id).second) chosen.push_back(p);
    if (!generic || !options.specialize) continue;
    for (auto l_s : options.l_s_values) {
      auto s = specialize_profile(p, set.truth->histogram(), l_s, registry.specialization());
      if (!seen.insert(s.id).second) continue;
      result.registry.add(s);
      chosen.push_back(std::move(s));
    }
  }

  std::vector<std::unique_ptr<SyntheticClassifier>> sources;
  std::vector<std::unique_ptr<PrecomputedClassifier>> tables;
  std::vector<Candidate> candidates;
  for (const auto& p : chosen) {
    Candidate c;
    for (auto k : options.k_values) {
      if (k >= 1 && k <= p.output_length()) c.k_values.push_back(k);
    }
    if (c.k_values.empty()) continue;
    std::sort(c.k_values.begin(), c.k_values.end());
    c.k_values.erase(std::unique(c.k_values.begin(), c.k_values.end()), c.k_values.end());
    sources.push_back(std::make_unique<SyntheticClassifier>(p, options.seed, stream.header.stream_id));
    tables.push_back(std::make_unique<PrecomputedClassifier>(*sources.back(), set.objects, c.k_values.back()));
    c.classifier = tables.back().get();
    c.l_s = p.l_s();
    candidates.push_back(std::move(c));
  }

  result.t_values = options.t_values.empty() ? derive_t_grid(set.objects, options.t_steps, options.m)
                                             : options.t_values;
  std::sort(result.t_values.begin(), result.t_values.end());

  EvaluationOptions eval;
  eval.pixel_eps = options.pixel_eps;
  eval.jobs = options.jobs;
  result.viable = two_step_search(set, candidates, result.t_values, options.m, targets, gt, eval, &result.evaluations);
  std::sort(result.evaluations.begin(), result.evaluations.end(), cfg_order);
  if (result.viable.empty()) {
    throw Error(Errc::NoViableConfig,
                fmt::format("no configuration reaches precision {} and recall {} on this stream",
                            text::format_fixed6(targets.precision), text::format_fixed6(targets.recall)));
  }
  result.outcome = pareto_and_policies(result.viable);
  return result;
}

std::string evaluations_csv(std::span<const ConfigEvaluation> evals) {
  std::string out = "profile,k,l_s,t,m,est_recall,est_precision,ingest_cost,query_cost,viable\n";
  for (const auto& e : evals) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", e.cfg.profile_id, e.cfg.k, e.cfg.l_s,
                       text::format_fixed6(e.cfg.t), e.cfg.m, text::format_fixed6(e.est_recall),
                       text::format_fixed6(e.est_precision), text::format_fixed6(e.ingest_cost),
                       text::format_fixed6(e.query_cost), e.viable ? 1 : 0);
  }
  return out;
}

}  // namespace focus
