#include <benchmark/benchmark.h>

#include "egpmda/metrics.hpp"
#include "egpmda/ops.hpp"
#include "egpmda/rng.hpp"
#include "egpmda/tape.hpp"

namespace {

using namespace egpmda;

std::vector<ScoredPair> random_pairs(int64_t n, bool ties) {
  Rng rng(11);
  std::vector<ScoredPair> out;
  out.reserve(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    ScoredPair p;
    p.mirna = static_cast<int32_t>(rng.next_below(2048));
    p.disease = static_cast<int32_t>(rng.next_below(2048));
    p.score = ties ? static_cast<double>(rng.next_below(1000)) / 999.0 : rng.next_double();
    p.label = static_cast<int>(rng.next_below(2));
    out.push_back(p);
  }
  out[0].label = 1;
  out[1].label = 0;
  return out;
}

void BM_auc(benchmark::State& state) {
  const auto pairs = random_pairs(state.range(0), state.range(1) != 0);
  for (auto _ : state) benchmark::DoNotOptimize(auc(pairs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_auc)->Args({10000, 0})->Args({100000, 0})->Args({100000, 1})->Unit(benchmark::kMillisecond);

void BM_aupr(benchmark::State& state) {
  const auto pairs = random_pairs(state.range(0), true);
  for (auto _ : state) benchmark::DoNotOptimize(aupr(pairs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_aupr)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_segmented_softmax(benchmark::State& state) {
  Rng rng(5);
  const int64_t n = state.range(0);
  std::vector<int32_t> ids;
  int32_t seg = 0;
  while (static_cast<int64_t>(ids.size()) < n) {
    const auto run = 1 + rng.next_below(16);
    for (uint64_t i = 0; i < run && static_cast<int64_t>(ids.size()) < n; ++i) ids.push_back(seg);
    ++seg;
  }
  Tensor values = Tensor::zeros({n});
  for (int64_t i = 0; i < n; ++i) values[i] = rng.uniform(-5, 5);
  const auto shared_ids = ops::make_index(std::move(ids));
  for (auto _ : state) {
    Tape t;
    const Var v = t.constant(values);
    benchmark::DoNotOptimize(ops::segmented_softmax(t, v, shared_ids).id);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_segmented_softmax)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
