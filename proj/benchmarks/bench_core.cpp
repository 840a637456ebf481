#include <benchmark/benchmark.h>

#include "focus/classifier.hpp"
#include "focus/clustering.hpp"
#include "focus/generator.hpp"
#include "focus/ingest.hpp"
#include "focus/query.hpp"

namespace {

using namespace focus;

const ObjectStream& bench_stream() {
  static const ObjectStream stream = [] {
    StreamSpec spec;
    spec.n_objects = 10000;
    return generate_stream(spec);
  }();
  return stream;
}

// Full pass of the clustering engine over the stream; range(0) is M.
void BM_ClusterInsert(benchmark::State& state) {
  const auto& s = bench_stream();
  const auto m = static_cast<std::uint32_t>(state.range(0));
  const std::vector<RankedEntry> none;
  for (auto _ : state) {
    ClusterEngine engine(s.header.dim, 1.0, m);
    for (const auto& o : s.objects) engine.insert(o.object_id, o.frame_id, o.feature, none);
    benchmark::DoNotOptimize(engine.cluster_count());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.objects.size()));
}
BENCHMARK(BM_ClusterInsert)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

// One synthetic classification cut to depth range(0).
void BM_Classify(benchmark::State& state) {
  const auto& s = bench_stream();
  const auto reg = ProfileRegistry::defaults();
  const auto& profile = reg.at("generic");
  const auto depth = static_cast<std::size_t>(state.range(0));
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& o = s.objects[i++ % s.objects.size()];
    benchmark::DoNotOptimize(classify(profile, o, o.object_id, depth));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Classify)->Arg(1)->Arg(8)->Arg(64)->Arg(1000);

// Index lookup for the most frequent class at K=16.
void BM_Lookup(benchmark::State& state) {
  const auto& s = bench_stream();
  const auto reg = ProfileRegistry::defaults();
  const auto idx = ingest_stream(s, Config{"generic", 16, 1000, 0.5, 100, {}}, reg).index;
  const auto hist = class_histogram(s);
  ClassId top = hist.begin()->first;
  for (const auto& [cls, n] : hist) {
    if (n > hist.at(top)) top = cls;
  }
  const auto kx = static_cast<std::uint32_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(idx.lookup(top, kx));
}
BENCHMARK(BM_Lookup)->Arg(1)->Arg(16);

// Fresh query session per iteration, so every centroid is GT-verified.
void BM_Query(benchmark::State& state) {
  const auto& s = bench_stream();
  const auto reg = ProfileRegistry::defaults();
  const auto idx = ingest_stream(s, Config{"generic", 4, 1000, 0.5, 100, {}}, reg).index;
  const ObjectStore store(s);
  const auto cls = s.objects.front().true_class.value();
  for (auto _ : state) {
    QuerySession session(idx, store, reg.ground_truth());
    benchmark::DoNotOptimize(session.execute(QueryRequest{cls, std::nullopt, std::nullopt}));
  }
}
BENCHMARK(BM_Query)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
