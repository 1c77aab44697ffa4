#pragma once
// In-memory toy graphs and filesystem scratch space shared by the tests.

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "egpmda/graph.hpp"
#include "egpmda/checkpoint.hpp"
#include "egpmda/rng.hpp"

namespace egpmda::test {

struct ToyOptions {
  int64_t n_mirna = 3;
  int64_t n_disease = 3;
  int64_t n_pcg = 3;
  int64_t d_b = 3;
  bool use_intra = true;
  bool use_pcg = true;
  bool include_mda = false;
  uint64_t seed = 1;
  int64_t extra_edges = 0;  // random extra pairs per inter-class kind
  bool second_mirna_same_sequence = false;
};

inline std::string random_sequence(Rng& rng, int64_t len) {
  static constexpr char bases[] = {'A', 'U', 'C', 'G'};
  std::string s;
  s.reserve(static_cast<size_t>(len));
  for (int64_t i = 0; i < len; ++i) s += bases[rng.next_below(4)];
  return s;
}

// Small graph with at least one edge per registered meta-relation.
inline HeteroGraph toy_graph(const ToyOptions& opt = {}) {
  Rng rng(opt.seed);
  GraphBuildInput in;
  for (int64_t i = 0; i < opt.n_mirna; ++i)
    in.nodes.add(NodeType::miRNA, {"m" + std::to_string(i), "mirna-" + std::to_string(i),
                                   {"mir-" + std::to_string(i)}});
  for (int64_t i = 0; i < opt.n_disease; ++i)
    in.nodes.add(NodeType::disease, {"d" + std::to_string(i), "disease-" + std::to_string(i), {}});
  for (int64_t i = 0; i < opt.n_pcg; ++i)
    in.nodes.add(NodeType::PCG, {"g" + std::to_string(i), "gene-" + std::to_string(i), {}});

  in.features.d_b = opt.d_b;
  for (int64_t i = 0; i < opt.n_mirna; ++i) {
    MirnaSeq seq;
    if (opt.second_mirna_same_sequence && i == 1) {
      seq = in.features.mirna[0];
    } else {
      seq.stem_loop = random_sequence(rng, 6 + static_cast<int64_t>(rng.next_below(3)));
      seq.mature_1 = random_sequence(rng, 4);
      seq.mature_2 = (i % 2 == 0) ? random_sequence(rng, 2) : "";
    }
    in.features.mirna.push_back(seq);
  }
  auto random_features = [&rng](int64_t rows, int64_t cols) {
    Tensor t = Tensor::zeros({rows, cols});
    for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-1.0, 1.0);
    return t;
  };
  in.features.disease = random_features(opt.n_disease, 2 * opt.d_b);
  in.features.pcg = random_features(opt.n_pcg, 2 * opt.d_b);

  auto clamp_m = [&](int64_t i) { return static_cast<int32_t>(i % opt.n_mirna); };
  auto clamp_d = [&](int64_t i) { return static_cast<int32_t>(i % opt.n_disease); };
  auto clamp_g = [&](int64_t i) { return static_cast<int32_t>(i % opt.n_pcg); };

  in.use_intra_edges = opt.use_intra;
  in.use_pcg = opt.use_pcg;
  in.include_mda = opt.include_mda;
  if (opt.use_intra) {
    if (opt.n_mirna >= 2) in.family.emplace_back(0, 1);
    if (opt.n_disease >= 2) in.father_son.emplace_back(0, 1);
  }
  if (opt.use_pcg && opt.n_pcg >= 1) {
    if (opt.n_pcg >= 2) in.group.emplace_back(0, 1);
    in.mirna_pcg.emplace_back(clamp_m(0), clamp_g(0));
    in.mirna_pcg.emplace_back(clamp_m(2), clamp_g(2));
    in.pcg_disease.emplace_back(clamp_g(1), clamp_d(1));
    in.pcg_disease.emplace_back(clamp_g(2), clamp_d(2));
  }
  if (opt.include_mda) {
    in.mirna_disease.emplace_back(clamp_m(0), clamp_d(0));
    in.mirna_disease.emplace_back(clamp_m(1), clamp_d(2));
  }
  for (int64_t e = 0; e < opt.extra_edges; ++e) {
    if (opt.use_intra) {
      in.family.emplace_back(clamp_m(static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(opt.n_mirna)))),
                             clamp_m(static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(opt.n_mirna)))));
      in.father_son.emplace_back(clamp_d(static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(opt.n_disease)))),
                                 clamp_d(static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(opt.n_disease)))));
    }
    if (opt.use_pcg && opt.n_pcg >= 1) {
      in.mirna_pcg.emplace_back(clamp_m(static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(opt.n_mirna)))),
                                clamp_g(static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(opt.n_pcg)))));
      in.pcg_disease.emplace_back(clamp_g(static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(opt.n_pcg)))),
                                  clamp_d(static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(opt.n_disease)))));
    }
    if (opt.include_mda) {
      in.mirna_disease.emplace_back(
          clamp_m(static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(opt.n_mirna)))),
          clamp_d(static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(opt.n_disease)))));
    }
  }
  // Intra-class self-pairs are skipped by build(); drop them here too so
  // "at least one edge per relation" stays true for tiny graphs.
  std::erase_if(in.family, [](const auto& p) { return p.first == p.second; });
  std::erase_if(in.father_son, [](const auto& p) { return p.first == p.second; });

  return HeteroGraph::build(std::move(in));
}

inline void fill_params(ModelParams& params, double value) {
  for (Tensor& t : params.tensors())
    for (int64_t i = 0; i < t.size(); ++i) t[i] = value;
}

struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("egpmda_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path file(const std::string& name) const { return path / name; }
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace egpmda::test
