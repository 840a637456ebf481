#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "focus/config.hpp"
#include "focus/error.hpp"
#include "focus/experiment.hpp"
#include "focus/index.hpp"
#include "focus/ingest.hpp"
#include "focus/profile.hpp"
#include "focus/query.hpp"
#include "focus/stream.hpp"
#include "focus/text_io.hpp"
#include "focus/tuner.hpp"

namespace focus::cli {
namespace {

struct Globals {
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool verbose = false;
  std::string profiles;
  unsigned jobs = 1;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ProfileRegistry load_registry(const Globals& g, std::uint32_t vocabulary, std::ostream& err) {
  if (g.profiles.empty()) {
    if (g.verbose) err << fmt::format("using built-in profiles for vocabulary {}\n", vocabulary);
    return ProfileRegistry::defaults(vocabulary);
  }
  auto reg = ProfileRegistry::load(g.profiles);
  if (g.verbose) err << fmt::format("loaded {} profiles from {}\n", reg.profiles().size(), g.profiles);
  return reg;
}

ClassId parse_class(const std::string& s) {
  if (s == "OTHER" || s == "other") return kOtherClass;
  try {
    return ClassId{text::parse_u32(s)};
  } catch (const Error&) {
    throw UsageError(fmt::format("--class expects a class id or OTHER, got '{}'", s));
  }
}

AccuracyTarget parse_targets(const std::string& s) {
  std::vector<double> v;
  try {
    v = text::parse_double_csv(s);
  } catch (const Error&) {
    throw UsageError(fmt::format("--targets expects precision,recall, got '{}'", s));
  }
  if (v.size() != 2) throw UsageError(fmt::format("--targets expects precision,recall, got '{}'", s));
  for (auto x : v) {
    if (!(x >= 0.0 && x <= 1.0)) throw UsageError("--targets values must lie in [0, 1]");
  }
  return {v[0], v[1]};
}

std::vector<std::uint32_t> parse_schedule(const std::string& s) {
  std::vector<std::uint32_t> out;
  for (auto part : text::split(s, ',')) {
    const auto t = text::trim(part);
    if (t.empty()) continue;
    try {
      out.push_back(text::parse_u32(t));
    } catch (const Error&) {
      throw UsageError(fmt::format("--batch expects a comma list of integers, got '{}'", s));
    }
  }
  if (out.empty()) throw UsageError("--batch needs at least one value");
  return out;
}

struct IngestArgs {
  std::string stream, config, out;
  double pixel_eps = 0.01;
};

int do_ingest(const IngestArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  const auto stream = ObjectStream::load(a.stream);
  const auto registry = load_registry(g, stream.header.vocabulary, err);
  const auto cfg = Config::load(a.config);
  IngestOptions io;
  io.pixel_eps = a.pixel_eps;
  io.seed = g.seed;
  const auto result = ingest_stream(stream, cfg, registry, io);
  result.index.save(a.out);
  out << result.report.to_text();
  return kExitOk;
}

struct QueryArgs {
  std::string index, stream, cls, batch, emit;
  std::optional<std::uint32_t> kx;
  std::optional<std::uint64_t> from, to;
};

std::string frames_csv(const QueryResult& r, const ObjectStore& store) {
  std::string csv = "object_id,frame_id\n";
  for (auto id : r.object_ids) csv += fmt::format("{},{}\n", id, store.at(id).frame_id);
  return csv;
}

int do_query(const QueryArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  if (a.from.has_value() != a.to.has_value()) throw UsageError("--from and --to must be given together");
  if (a.from && *a.from > *a.to) throw UsageError("--from must not exceed --to");
  const auto cls = parse_class(a.cls);
  const auto index = TopKIndex::load(a.index);
  const auto stream = ObjectStream::load(a.stream);
  if (stream.header.stream_id != index.header().stream_id) {
    throw Error(Errc::FormatError, fmt::format("index was built from stream '{}', not '{}'",
                                               index.header().stream_id, stream.header.stream_id));
  }
  const auto registry = load_registry(g, stream.header.vocabulary, err);
  const ObjectStore store(stream);
  QuerySession session(index, store, registry.ground_truth(), g.jobs);

  QueryRequest req{cls, a.kx, std::nullopt};
  if (a.from) req.time_range = std::make_pair(*a.from, *a.to);

  QueryResult last;
  if (!a.batch.empty()) {
    const auto schedule = parse_schedule(a.batch);
    const auto steps = session.batched(req, schedule);
    QueryResult merged;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      out << fmt::format("[increment k_x={}]\n", schedule[i]) << steps[i].to_text();
      merged.object_ids.insert(merged.object_ids.end(), steps[i].object_ids.begin(), steps[i].object_ids.end());
    }
    std::sort(merged.object_ids.begin(), merged.object_ids.end());
    out << fmt::format("[total]\ngt_inferences={}\n", session.total_gt_inferences());
    last = std::move(merged);
  } else {
    last = session.execute(req);
    out << last.to_text();
  }
  if (!a.emit.empty()) text::write_file_atomic(a.emit, frames_csv(last, store));
  return kExitOk;
}

struct TuneArgs {
  std::string stream, targets = "0.95,0.95", policy = "balance", out, grid, emit, profiles_out;
};

int do_tune(const TuneArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  const auto targets = parse_targets(a.targets);
  const auto policy = parse_policy(a.policy);
  const auto stream = ObjectStream::load(a.stream);
  const auto registry = load_registry(g, stream.header.vocabulary, err);
  TunerOptions opts;
  opts.seed = g.seed;
  opts.jobs = g.jobs;
  if (!a.grid.empty()) opts.apply_grid_text(text::read_file(a.grid));

  const std::string emit = a.emit.empty() ? a.out + ".evaluations.csv" : a.emit;
  const std::string profiles_out = a.profiles_out.empty() ? a.out + ".profiles" : a.profiles_out;

  const auto result = tune(stream, registry, targets, opts);
  const auto& pick = result.outcome.pick(policy);
  pick.cfg.save(a.out);
  result.registry.save(profiles_out);
  text::write_file_atomic(emit, evaluations_csv(result.evaluations));

  out << fmt::format("policy={}\n", to_string(policy)) << pick.cfg.to_text();
  out << fmt::format(
      "est_recall={}\nest_precision={}\ningest_cost={}\nquery_cost={}\nevaluations={}\nviable={}\npareto={}\n"
      "sample_objects={}\n",
      text::format_fixed6(pick.est_recall), text::format_fixed6(pick.est_precision),
      text::format_fixed6(pick.ingest_cost), text::format_fixed6(pick.query_cost), result.evaluations.size(),
      result.viable.size(), result.outcome.pareto.size(), result.sample_objects);
  if (g.verbose) err << fmt::format("wrote {}, {} and {}\n", a.out, profiles_out, emit);
  return kExitOk;
}

struct SimulateArgs {
  std::string spec, out, stream_out;
};

std::string summary_text(const ExperimentReport& r) {
  return fmt::format("nn_same_class={}\ntop_class_share={}\noccurring_classes={}\nrows={}\n",
                     text::format_fixed6(r.nn_same_class), text::format_fixed6(r.top_class_share),
                     r.occurring_classes, r.rows.size());
}

int do_simulate(const SimulateArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  auto spec = a.spec.empty() ? ExperimentSpec{} : ExperimentSpec::load(a.spec);
  if (g.seed_given) spec.run_seed = g.seed;
  spec.jobs = g.jobs;
  if (a.out.empty() && a.stream_out.empty()) throw UsageError("simulate needs --out, --stream-out or both");
  if (g.verbose) err << fmt::format("simulating stream '{}' with {} objects\n", spec.stream.stream_id,
                                    spec.stream.n_objects);
  if (!a.stream_out.empty()) {
    generate_stream(spec.stream).save(a.stream_out);
    if (a.out.empty()) {
      out << fmt::format("stream={}\nobjects={}\n", a.stream_out, spec.stream.n_objects);
      return kExitOk;
    }
  }
  const auto report = run_experiment(spec);
  const std::filesystem::path dir(a.out);
  std::filesystem::create_directories(dir);
  const auto csv = report.to_csv();
  text::write_file_atomic(dir / "results.csv", csv);
  text::write_file_atomic(dir / "spec.txt", spec.to_text());
  const auto summary = summary_text(report);
  text::write_file_atomic(dir / "summary.txt", summary);
  out << summary << csv_to_markdown(csv);
  return kExitOk;
}

struct ReportArgs {
  std::string dir, format = "csv";
};

int do_report(const ReportArgs& a, std::ostream& out) {
  const auto csv = text::read_file(std::filesystem::path(a.dir) / "results.csv");
  out << (a.format == "md" ? csv_to_markdown(csv) : csv);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Top-K indexed video query engine over synthetic object streams", "focus"};
  app.require_subcommand(1);
  app.fallthrough();
  app.failure_message(CLI::FailureMessage::help);

  Globals g;
  app.add_option("--seed", g.seed, "Run seed for classifiers, sampling and experiments");
  app.add_flag("--verbose", g.verbose, "Print progress to standard error");
  app.add_option("--profiles", g.profiles, "Profile registry file (built-in defaults when omitted)");
  app.add_option("--jobs", g.jobs, "Worker threads for tuning and verification")->check(CLI::PositiveNumber);

  IngestArgs ia;
  auto* ingest = app.add_subcommand("ingest", "Classify and cluster a stream into a top-K index");
  ingest->add_option("--stream", ia.stream, "Object stream file")->required();
  ingest->add_option("--config", ia.config, "Config file")->required();
  ingest->add_option("--out", ia.out, "Index file to write")->required();
  ingest->add_option("--pixel-eps", ia.pixel_eps, "Pixel-diff threshold; negative disables dedup")
      ->capture_default_str();

  QueryArgs qa;
  auto* query = app.add_subcommand("query", "Answer a class query from an index");
  query->add_option("--index", qa.index, "Index file")->required();
  query->add_option("--stream", qa.stream, "Stream the index was built from")->required();
  query->add_option("--class", qa.cls, "Class id, or OTHER")->required();
  query->add_option("--kx", qa.kx, "Rank cutoff K_x <= K (default K)");
  query->add_option("--from", qa.from, "First frame, inclusive");
  query->add_option("--to", qa.to, "Last frame, inclusive");
  query->add_option("--batch", qa.batch, "Increasing K_x schedule, e.g. 1,2,4");
  query->add_option("--emit", qa.emit, "CSV of matched objects and frames");

  TuneArgs ta;
  auto* tune_cmd = app.add_subcommand("tune", "Pick a config meeting the accuracy targets");
  tune_cmd->add_option("--stream", ta.stream, "Object stream file")->required();
  tune_cmd->add_option("--targets", ta.targets, "precision,recall")->capture_default_str();
  tune_cmd->add_option("--policy", ta.policy, "balance | opt-ingest | opt-query")
      ->capture_default_str()
      ->check(CLI::IsMember({"balance", "opt-ingest", "opt-query"}));
  tune_cmd->add_option("--out", ta.out, "Config file to write")->required();
  tune_cmd->add_option("--grid", ta.grid, "Grid file (k, l_s, t, m, profiles, specialize, keep_base)");
  tune_cmd->add_option("--emit", ta.emit, "Evaluations CSV (default <out>.evaluations.csv)");
  tune_cmd->add_option("--profiles-out", ta.profiles_out,
                       "Registry with the specialized profiles (default <out>.profiles)");

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Run the synthetic end-to-end experiment");
  simulate->add_option("--spec", sa.spec, "Experiment spec file (defaults when omitted)");
  simulate->add_option("--out", sa.out, "Output directory for results.csv, spec.txt and summary.txt");
  simulate->add_option("--stream-out", sa.stream_out, "Also write the generated stream; alone, skips the experiment");

  ReportArgs ra;
  auto* report = app.add_subcommand("report", "Render results from a simulate directory");
  report->add_option("--dir", ra.dir, "Directory written by simulate")->required();
  report->add_option("--format", ra.format, "csv | md")
      ->capture_default_str()
      ->check(CLI::IsMember({"csv", "md"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  g.seed_given = app.get_option("--seed")->count() > 0;

  try {
    if (*ingest) return do_ingest(ia, g, out, err);
    if (*query) return do_query(qa, g, out, err);
    if (*tune_cmd) return do_tune(ta, g, out, err);
    if (*simulate) return do_simulate(sa, g, out, err);
    if (*report) return do_report(ra, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == Errc::NoViableConfig ? kExitNoViable : kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace focus::cli
