#pragma once
// Optimization loop. Select phase: full-batch (or mini-batch) Adam steps on
// the train partition, early stopping on validation accuracy, best-epoch
// weights kept. Final phase: retrains on train∪val and stops once the loss
// has failed to decrease for two consecutive epochs. Training negatives are
// resampled per epoch from an epoch-salted stream; validation negatives stay
// fixed in the manifest.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "egpmda/checkpoint.hpp"
#include "egpmda/model.hpp"
#include "egpmda/split.hpp"

namespace egpmda {

enum class TrainPhase { select, final_retrain };

const char* to_string(TrainPhase phase);
std::optional<TrainPhase> train_phase_from(const std::string& name);

struct TrainConfig {
  int64_t max_epochs = 50;
  int64_t patience = 5;
  double lr = 0.001;
  uint64_t seed = 0;
  int64_t repeats = 5;
  TrainPhase phase = TrainPhase::select;
  int64_t batch_size = 0;  // 0 = full batch
  bool resample_train_negatives = true;

  void validate() const;
};

struct EpochStats {
  int64_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;      // NaN in the final phase
  double val_accuracy = 0.0;  // NaN in the final phase
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  int64_t best_epoch = -1;  // 1-based; ties resolve to the earliest epoch
  std::string stop_reason;  // "early_stop" | "loss_plateau" | "max_epochs"

  std::string to_json_string() const;
  void save(const std::filesystem::path& path) const;
};

struct TrainResult {
  Checkpoint checkpoint;  // weights of the best epoch
  TrainHistory history;
};

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;  // threshold 0.5, score >= 0.5 counts as positive
};

// Scores the labeled pairs with a fresh forward pass. Throws on empty input.
EvalResult evaluate_epoch(const Model& model, const std::vector<Pair>& pairs, const std::vector<int>& labels);

TrainResult train(const HeteroGraph& graph, const SplitManifest& manifest, const ModelConfig& model_config,
                  const TrainConfig& train_config);

struct RepeatSummary {
  uint64_t seed = 0;
  int64_t epochs = 0;
  int64_t best_epoch = -1;
  double best_val_accuracy = 0.0;
  double final_train_loss = 0.0;
  std::string stop_reason;
};

struct RepeatResult {
  std::vector<TrainResult> runs;
  std::vector<RepeatSummary> summaries;
  double mean_best_val_accuracy = 0.0;
  double mean_final_train_loss = 0.0;

  std::string to_json_string() const;
  void save(const std::filesystem::path& path) const;
};

// Runs `repeats` trainings with seeds base+0 .. base+(repeats-1).
RepeatResult run_repeats(const HeteroGraph& graph, const SplitManifest& manifest, const ModelConfig& model_config,
                         const TrainConfig& train_config);

}  // namespace egpmda
