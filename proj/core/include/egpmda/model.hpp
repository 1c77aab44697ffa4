#pragma once
// The MDA prediction network. One encoder layer maps raw node features into a shared
// dim-wide space (miRNA sequences through a single-filter convolution,
// disease/PCG text embeddings through per-type linears). A stack of
// heterogeneous-graph-transformer layers then exchanges messages along the
// registered meta-relations: per-head attention K · W_att · Q^T scaled by a
// learnable per-relation mu over sqrt(head_dim), softmax-normalized over each
// target's incoming edges per relation, message M-linear · W_msg, summed
// across relations, and blended with the previous layer through a per-type
// residual gate sigmoid(alpha). A two-linear predictor with a sigmoid scores
// (miRNA, disease) pairs, trained with summed binary cross entropy.

#include <array>
#include <string>
#include <vector>

#include "egpmda/checkpoint.hpp"
#include "egpmda/graph.hpp"
#include "egpmda/ops.hpp"
#include "egpmda/split.hpp"
#include "egpmda/tape.hpp"

namespace egpmda {

// 1-mer embedding: A,U,C,G -> one-hot rows 0..3; padding rows (placeholder
// base) are [0.25, 0.25, 0.25, 0.25]. Throws naming the position on any
// other character.
Tensor embed_sequence_1mer(const std::string& seq, int64_t max_len);

struct ForwardPass {
  Tape tape;
  std::vector<Var> param_vars;  // aligned with ModelParams order

  // H^(0)..H^(L), one matrix per node type.
  std::vector<std::array<Var, kNumNodeTypes>> layer_outputs;
  std::array<Var, kNumNodeTypes> final_output;

  // Per layer, per relation-index attention caches; empty for edgeless
  // relations. `raw` is the pre-softmax score (already mu/sqrt(d)-scaled),
  // `att` the normalized weight. Edge order matches the graph's
  // incoming-adjacency order.
  struct RelationCache {
    std::vector<Var> raw;  // per head, each (E)
    std::vector<Var> att;  // per head, each (E)
  };
  std::vector<std::vector<RelationCache>> attention;  // [layer][relation]
};

class Model {
 public:
  // Fresh Glorot/zeros/mu=1/alpha=0 initialization from config.seed.
  Model(const HeteroGraph& graph, ModelConfig config);
  // Resume from checkpoint; validates registry and frozen shape against the graph.
  Model(const HeteroGraph& graph, const Checkpoint& checkpoint);

  const ModelConfig& config() const { return config_; }
  const ModelShape& shape() const { return shape_; }
  const ModelParams& params() const { return params_; }
  ModelParams& params() { return params_; }
  const HeteroGraph& graph() const { return *graph_; }

  Checkpoint to_checkpoint() const;

  // Full-graph forward pass recorded on a fresh tape.
  ForwardPass forward() const;

  // Training path: differentiable scores (n×1) for the given pairs.
  Var score_pairs(ForwardPass& fp, const std::vector<Pair>& pairs) const;
  Var loss_bce(ForwardPass& fp, Var scores, const std::vector<int>& labels) const;

  // Inference path: plain-arithmetic predictor over the computed embeddings.
  std::vector<double> score_pairs_values(const ForwardPass& fp, const std::vector<Pair>& pairs) const;
  double predict_pair(const ForwardPass& fp, int32_t mirna, int32_t disease) const;

  // Per-parameter gradients (zeros where unreached) after tape.backward.
  std::vector<Tensor> gradients(const ForwardPass& fp) const;

  // sigmoid(alpha) of a node type at a layer, the residual-gate value.
  double residual_gate(int layer, NodeType type) const;

 private:
  void init_params();
  void build_static_inputs();
  Var stage_param(ForwardPass& fp, const std::string& name) const;
  Var stage_param(ForwardPass& fp, int index) const;

  const HeteroGraph* graph_;
  ModelConfig config_;
  ModelShape shape_;
  ModelParams params_;

  // Constant model inputs derived from the graph (or seeded random vectors
  // when node features are ablated).
  Tensor input_mirna_;    // N_m × seq_len·4
  Tensor input_disease_;  // N_d × 2·d_b
  Tensor input_pcg_;      // N_g × 2·d_b

  std::vector<ops::IndexArray> edge_src_;  // per relation
  std::vector<ops::IndexArray> edge_tgt_;
  std::array<ops::ByteMask, kNumNodeTypes> has_incoming_;
};

}  // namespace egpmda
