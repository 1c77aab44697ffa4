#include "egpmda/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "egpmda/adam.hpp"
#include "egpmda/rng.hpp"

namespace egpmda {

using ordered_json = nlohmann::ordered_json;

namespace {
constexpr uint64_t kNegativeSalt = 0x65706f636e656773ull;
constexpr uint64_t kShuffleSalt = 0x7368756666ull;
}  // namespace

const char* to_string(TrainPhase phase) { return phase == TrainPhase::select ? "select" : "final"; }

std::optional<TrainPhase> train_phase_from(const std::string& name) {
  if (name == "select") return TrainPhase::select;
  if (name == "final") return TrainPhase::final_retrain;
  return std::nullopt;
}

void TrainConfig::validate() const {
  if (max_epochs <= 0) throw std::invalid_argument("train config: max_epochs must be positive");
  if (patience <= 0 || patience >= max_epochs)
    throw std::invalid_argument("train config: patience must satisfy 0 < patience < max_epochs");
  if (repeats < 1) throw std::invalid_argument("train config: repeats must be >= 1");
  if (batch_size < 0) throw std::invalid_argument("train config: batch_size must be >= 0");
}

EvalResult evaluate_epoch(const Model& model, const std::vector<Pair>& pairs, const std::vector<int>& labels) {
  if (pairs.empty()) throw std::invalid_argument("evaluate_epoch: no pairs");
  if (pairs.size() != labels.size()) throw std::invalid_argument("evaluate_epoch: pair/label count mismatch");
  const ForwardPass fp = model.forward();
  const std::vector<double> scores = model.score_pairs_values(fp, pairs);
  constexpr double kEps = 1e-12;
  EvalResult result;
  int64_t correct = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    const double y = std::clamp(scores[i], kEps, 1.0 - kEps);
    const double yh = static_cast<double>(labels[i]);
    result.loss -= yh * std::log(y) + (1.0 - yh) * std::log(1.0 - y);
    const int predicted = scores[i] >= 0.5 ? 1 : 0;
    if (predicted == labels[i]) ++correct;
  }
  result.accuracy = static_cast<double>(correct) / static_cast<double>(scores.size());
  return result;
}

std::string TrainHistory::to_json_string() const {
  ordered_json j;
  ordered_json list = ordered_json::array();
  for (const EpochStats& e : epochs) {
    ordered_json entry;
    entry["epoch"] = e.epoch;
    entry["train_loss"] = e.train_loss;
    entry["val_loss"] = e.val_loss;          // NaN serializes as null (final phase)
    entry["val_accuracy"] = e.val_accuracy;  // ditto
    list.push_back(std::move(entry));
  }
  j["epochs"] = std::move(list);
  j["best_epoch"] = best_epoch;
  j["stop_reason"] = stop_reason;
  return j.dump(2) + "\n";
}

void TrainHistory::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json_string();
}

namespace {

struct Supervision {
  std::vector<Pair> pairs;
  std::vector<int> labels;
};

Supervision assemble(const std::vector<Pair>& pos, const std::vector<Pair>& neg) {
  Supervision s;
  s.pairs.reserve(pos.size() + neg.size());
  s.labels.reserve(pos.size() + neg.size());
  for (const Pair& p : pos) {
    s.pairs.push_back(p);
    s.labels.push_back(1);
  }
  for (const Pair& p : neg) {
    s.pairs.push_back(p);
    s.labels.push_back(0);
  }
  return s;
}

// One optimization epoch; returns the summed BCE over all supervision pairs.
double run_epoch(Model& model, AdamState& adam, const Supervision& sup, int64_t batch_size, uint64_t shuffle_seed,
                 int64_t epoch) {
  const auto n = static_cast<int64_t>(sup.pairs.size());
  std::vector<int64_t> order(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  if (batch_size > 0 && batch_size < n) {
    Rng rng = Rng::salted(shuffle_seed, kShuffleSalt ^ static_cast<uint64_t>(epoch));
    for (int64_t i = n - 1; i > 0; --i) {
      const auto j = static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(i + 1)));
      std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
    }
  }
  const int64_t step = batch_size > 0 ? batch_size : n;
  double total_loss = 0.0;
  for (int64_t at = 0; at < n; at += step) {
    const int64_t end = std::min(n, at + step);
    std::vector<Pair> pairs;
    std::vector<int> labels;
    pairs.reserve(static_cast<size_t>(end - at));
    labels.reserve(static_cast<size_t>(end - at));
    for (int64_t i = at; i < end; ++i) {
      pairs.push_back(sup.pairs[static_cast<size_t>(order[static_cast<size_t>(i)])]);
      labels.push_back(sup.labels[static_cast<size_t>(order[static_cast<size_t>(i)])]);
    }
    ForwardPass fp = model.forward();
    const Var scores = model.score_pairs(fp, pairs);
    const Var loss = model.loss_bce(fp, scores, labels);
    const double loss_value = fp.tape.value(loss)[0];
    if (!std::isfinite(loss_value))
      throw std::runtime_error("training aborted: non-finite loss at epoch " + std::to_string(epoch));
    fp.tape.backward(loss);
    const std::vector<Tensor> grads = model.gradients(fp);
    adam.step(model.params().tensors(), grads);
    total_loss += loss_value;
  }
  return total_loss;
}

}  // namespace

TrainResult train(const HeteroGraph& graph, const SplitManifest& manifest, const ModelConfig& model_config,
                  const TrainConfig& train_config) {
  train_config.validate();
  const bool select = train_config.phase == TrainPhase::select;
  if (select && manifest.val.pos.empty())
    throw std::invalid_argument("train: select phase requires a validation partition");

  Model model(graph, model_config);
  AdamConfig adam_config;
  adam_config.lr = train_config.lr;
  AdamState adam(adam_config);

  std::vector<Pair> pos = manifest.train.pos;
  std::vector<Pair> fixed_neg = manifest.train.neg;
  if (!select) {
    pos.insert(pos.end(), manifest.val.pos.begin(), manifest.val.pos.end());
    fixed_neg.insert(fixed_neg.end(), manifest.val.neg.begin(), manifest.val.neg.end());
  }
  const PairSet verified = manifest.verified_set();
  const Supervision val_sup = assemble(manifest.val.pos, manifest.val.neg);

  TrainHistory history;
  ModelParams best_params = model.params();
  double best_val_acc = -1.0;
  double best_loss = std::numeric_limits<double>::infinity();
  int64_t no_improve = 0;

  for (int64_t epoch = 1; epoch <= train_config.max_epochs; ++epoch) {
    std::vector<Pair> neg;
    if (train_config.resample_train_negatives) {
      Rng rng = Rng::salted(train_config.seed, kNegativeSalt ^ static_cast<uint64_t>(epoch));
      neg = sample_negatives(verified, manifest.n_mirna, manifest.n_disease, static_cast<int64_t>(pos.size()), rng);
    } else {
      neg = fixed_neg;
    }
    const Supervision sup = assemble(pos, neg);
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = run_epoch(model, adam, sup, train_config.batch_size, train_config.seed, epoch);

    if (select) {
      const EvalResult val = evaluate_epoch(model, val_sup.pairs, val_sup.labels);
      stats.val_loss = val.loss;
      stats.val_accuracy = val.accuracy;
      history.epochs.push_back(stats);
      if (val.accuracy > best_val_acc) {
        best_val_acc = val.accuracy;
        history.best_epoch = epoch;
        best_params = model.params();
        no_improve = 0;
      } else {
        ++no_improve;
      }
      if (no_improve >= train_config.patience) {
        history.stop_reason = "early_stop";
        break;
      }
    } else {
      stats.val_loss = std::numeric_limits<double>::quiet_NaN();
      stats.val_accuracy = std::numeric_limits<double>::quiet_NaN();
      history.epochs.push_back(stats);
      if (stats.train_loss < best_loss) {
        best_loss = stats.train_loss;
        history.best_epoch = epoch;
        best_params = model.params();
      }
      // Stop at the first epoch t with loss(t) >= loss(t-1) >= loss(t-2).
      const size_t n = history.epochs.size();
      if (n >= 3 && history.epochs[n - 1].train_loss >= history.epochs[n - 2].train_loss &&
          history.epochs[n - 2].train_loss >= history.epochs[n - 3].train_loss) {
        history.stop_reason = "loss_plateau";
        break;
      }
    }
  }
  if (history.stop_reason.empty()) history.stop_reason = "max_epochs";

  model.params() = best_params;
  return TrainResult{model.to_checkpoint(), std::move(history)};
}

std::string RepeatResult::to_json_string() const {
  ordered_json j;
  ordered_json list = ordered_json::array();
  for (const RepeatSummary& s : summaries) {
    ordered_json entry;
    entry["seed"] = s.seed;
    entry["epochs"] = s.epochs;
    entry["best_epoch"] = s.best_epoch;
    entry["best_val_accuracy"] = s.best_val_accuracy;
    entry["final_train_loss"] = s.final_train_loss;
    entry["stop_reason"] = s.stop_reason;
    list.push_back(std::move(entry));
  }
  j["repeats"] = std::move(list);
  j["mean_best_val_accuracy"] = mean_best_val_accuracy;
  j["mean_final_train_loss"] = mean_final_train_loss;
  return j.dump(2) + "\n";
}

void RepeatResult::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json_string();
}

RepeatResult run_repeats(const HeteroGraph& graph, const SplitManifest& manifest, const ModelConfig& model_config,
                         const TrainConfig& train_config) {
  train_config.validate();
  RepeatResult result;
  double acc_sum = 0.0;
  double loss_sum = 0.0;
  for (int64_t i = 0; i < train_config.repeats; ++i) {
    ModelConfig mc = model_config;
    mc.seed = model_config.seed + static_cast<uint64_t>(i);
    TrainConfig tc = train_config;
    tc.seed = train_config.seed + static_cast<uint64_t>(i);
    TrainResult run = train(graph, manifest, mc, tc);

    RepeatSummary summary;
    summary.seed = mc.seed;
    summary.epochs = static_cast<int64_t>(run.history.epochs.size());
    summary.best_epoch = run.history.best_epoch;
    summary.stop_reason = run.history.stop_reason;
    const auto best_idx = static_cast<size_t>(run.history.best_epoch - 1);
    summary.best_val_accuracy = run.history.epochs.at(best_idx).val_accuracy;
    summary.final_train_loss = run.history.epochs.back().train_loss;
    acc_sum += summary.best_val_accuracy;
    loss_sum += summary.final_train_loss;
    result.summaries.push_back(summary);
    result.runs.push_back(std::move(run));
  }
  result.mean_best_val_accuracy = acc_sum / static_cast<double>(train_config.repeats);
  result.mean_final_train_loss = loss_sum / static_cast<double>(train_config.repeats);
  return result;
}

}  // namespace egpmda
