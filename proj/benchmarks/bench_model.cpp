#include <benchmark/benchmark.h>

#include "egpmda/model.hpp"
#include "egpmda/rng.hpp"

namespace {

using namespace egpmda;

HeteroGraph bench_graph(int64_t n_per_type, int64_t edges_per_kind) {
  Rng rng(42);
  GraphBuildInput in;
  static constexpr char bases[] = {'A', 'U', 'C', 'G'};
  auto seq = [&rng](int64_t len) {
    std::string s;
    for (int64_t i = 0; i < len; ++i) s += bases[rng.next_below(4)];
    return s;
  };
  for (int64_t i = 0; i < n_per_type; ++i) {
    in.nodes.add(NodeType::miRNA, {"m" + std::to_string(i), "m", {}});
    in.nodes.add(NodeType::disease, {"d" + std::to_string(i), "d", {}});
    in.nodes.add(NodeType::PCG, {"g" + std::to_string(i), "g", {}});
    in.features.mirna.push_back({seq(60), seq(22), i % 2 ? seq(22) : ""});
  }
  in.features.d_b = 32;
  in.features.disease = Tensor::zeros({n_per_type, 64});
  in.features.pcg = Tensor::zeros({n_per_type, 64});
  for (int64_t i = 0; i < in.features.disease.size(); ++i) in.features.disease[i] = rng.uniform(-1, 1);
  for (int64_t i = 0; i < in.features.pcg.size(); ++i) in.features.pcg[i] = rng.uniform(-1, 1);
  auto pick = [&] { return static_cast<int32_t>(rng.next_below(static_cast<uint64_t>(n_per_type))); };
  for (int64_t e = 0; e < edges_per_kind; ++e) {
    in.family.emplace_back(pick(), pick());
    in.father_son.emplace_back(pick(), pick());
    in.group.emplace_back(pick(), pick());
    in.mirna_pcg.emplace_back(pick(), pick());
    in.pcg_disease.emplace_back(pick(), pick());
  }
  std::erase_if(in.family, [](const auto& p) { return p.first == p.second; });
  std::erase_if(in.father_son, [](const auto& p) { return p.first == p.second; });
  std::erase_if(in.group, [](const auto& p) { return p.first == p.second; });
  return HeteroGraph::build(std::move(in));
}

ModelConfig bench_config() {
  ModelConfig cfg;
  cfg.dim = 64;
  cfg.layers = 2;
  cfg.heads = 4;
  cfg.conv_k = 8;
  cfg.d_b = 32;
  cfg.seed = 7;
  return cfg;
}

void BM_forward(benchmark::State& state) {
  const HeteroGraph g = bench_graph(state.range(0), state.range(0) * 4);
  const Model model(g, bench_config());
  for (auto _ : state) {
    const ForwardPass fp = model.forward();
    benchmark::DoNotOptimize(fp.tape.value(fp.final_output[0]).data());
  }
}
BENCHMARK(BM_forward)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_forward_backward(benchmark::State& state) {
  const HeteroGraph g = bench_graph(state.range(0), state.range(0) * 4);
  Model model(g, bench_config());
  std::vector<Pair> pairs;
  std::vector<int> labels;
  for (int32_t i = 0; i < state.range(0); ++i) {
    pairs.emplace_back(i, static_cast<int32_t>((i * 7) % state.range(0)));
    labels.push_back(i % 2);
  }
  for (auto _ : state) {
    ForwardPass fp = model.forward();
    const Var scores = model.score_pairs(fp, pairs);
    const Var loss = model.loss_bce(fp, scores, labels);
    fp.tape.backward(loss);
    benchmark::DoNotOptimize(fp.tape.grad(fp.param_vars[0]).data());
  }
}
BENCHMARK(BM_forward_backward)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_score_pairs(benchmark::State& state) {
  const HeteroGraph g = bench_graph(64, 256);
  const Model model(g, bench_config());
  const ForwardPass fp = model.forward();
  std::vector<Pair> pairs;
  for (int32_t m = 0; m < 64; ++m)
    for (int32_t d = 0; d < 64; ++d) pairs.emplace_back(m, d);
  for (auto _ : state) {
    const std::vector<double> scores = model.score_pairs_values(fp, pairs);
    benchmark::DoNotOptimize(scores.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(pairs.size()));
}
BENCHMARK(BM_score_pairs)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
