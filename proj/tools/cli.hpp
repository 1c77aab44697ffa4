#pragma once
// Command-line surface: build-graph, split, train, evaluate, predict,
// explain, stats. RunConfig merges a JSON config file with flag overrides
// and validates the ablation-switch ladder and the hyperparameter grid.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "egpmda/checkpoint.hpp"

namespace egpmda::cli {

struct RunConfig {
  // Model hyperparameters.
  int64_t dim = 64;
  int64_t layers = 2;
  int64_t heads = 4;
  int64_t conv_k = 8;
  int64_t d_b = 64;
  // Ablation switches (incremental ladder: intra < pcg < mda).
  bool use_node_features = true;
  bool use_intra_edges = true;
  bool use_pcg = true;
  bool include_mda = false;
  // Training.
  double lr = 0.001;
  int64_t max_epochs = 50;
  int64_t patience = 5;
  int64_t repeats = 1;
  int64_t batch = 0;  // 0 = full batch
  bool resample_train_negatives = true;
  // Split boundaries.
  int32_t y1 = 2019;
  int32_t y2 = 2020;
  int64_t negative_ratio_test = 100;
  // Global.
  uint64_t seed = 0;
  int64_t threads = 1;
  bool allow_any_hparams = false;

  void apply_json_file(const std::filesystem::path& path);  // unknown keys are errors
  void validate() const;
  ModelConfig model_config() const;
};

// Entry point behind `main`; returns the process exit code (0 success,
// 1 runtime failure, 2 flag/usage errors).
int dispatch(int argc, const char* const* argv);
int dispatch(const std::vector<std::string>& args);  // args exclude argv[0]

}  // namespace egpmda::cli
