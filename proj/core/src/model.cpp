#include "egpmda/model.hpp"

#include <cmath>
#include <stdexcept>

#include "egpmda/rng.hpp"

namespace egpmda {

namespace {

constexpr uint64_t kRandomFeatureSalt = 0x66656174ull;  // feature-ablation stream

double sigmoid_scalar(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Tensor glorot(Rng& rng, int64_t fan_in, int64_t fan_out, std::vector<int64_t> shape) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t = Tensor::zeros(std::move(shape));
  for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-limit, limit);
  return t;
}

}  // namespace

Tensor embed_sequence_1mer(const std::string& seq, int64_t max_len) {
  if (static_cast<int64_t>(seq.size()) > max_len)
    throw std::invalid_argument("sequence longer than max_len (" + std::to_string(seq.size()) + " > " +
                                std::to_string(max_len) + ")");
  Tensor out = Tensor::zeros({max_len, 4});
  for (int64_t i = 0; i < static_cast<int64_t>(seq.size()); ++i) {
    int col = -1;
    switch (seq[static_cast<size_t>(i)]) {
      case 'A': col = 0; break;
      case 'U': col = 1; break;
      case 'C': col = 2; break;
      case 'G': col = 3; break;
      default: break;
    }
    if (col < 0)
      throw std::invalid_argument("illegal sequence character '" + std::string(1, seq[static_cast<size_t>(i)]) +
                                  "' at position " + std::to_string(i));
    out.at(i, col) = 1.0;
  }
  for (int64_t i = static_cast<int64_t>(seq.size()); i < max_len; ++i)
    for (int64_t c = 0; c < 4; ++c) out.at(i, c) = 0.25;
  return out;
}

Model::Model(const HeteroGraph& graph, ModelConfig config) : graph_(&graph), config_(config) {
  config_.validate();
  config_.include_mda = graph.include_mda();
  shape_.l_s = graph.features().l_s;
  shape_.l_m1 = graph.features().l_m1;
  shape_.l_m2 = graph.features().l_m2;
  shape_.relations = graph.relations();
  if (config_.d_b != graph.features().d_b) config_.d_b = graph.features().d_b;
  if (shape_.seq_len() < config_.conv_k)
    throw std::invalid_argument("conv_k (" + std::to_string(config_.conv_k) + ") exceeds total sequence length " +
                                std::to_string(shape_.seq_len()));
  init_params();
  build_static_inputs();
}

Model::Model(const HeteroGraph& graph, const Checkpoint& checkpoint)
    : graph_(&graph), config_(checkpoint.config), shape_(checkpoint.shape), params_(checkpoint.params) {
  config_.validate();
  if (shape_.relations != graph.relations())
    throw std::runtime_error("checkpoint meta-relation registry does not match the graph");
  if (shape_.l_s != graph.features().l_s || shape_.l_m1 != graph.features().l_m1 ||
      shape_.l_m2 != graph.features().l_m2)
    throw std::runtime_error("checkpoint sequence-length shape does not match the graph");
  if (config_.d_b != graph.features().d_b)
    throw std::runtime_error("checkpoint d_b does not match the graph features");
  if (config_.include_mda != graph.include_mda())
    throw std::runtime_error("checkpoint include_mda flag does not match the graph");
  build_static_inputs();
}

Checkpoint Model::to_checkpoint() const { return Checkpoint{config_, shape_, params_}; }

void Model::init_params() {
  Rng rng(config_.seed);
  const int64_t dim = config_.dim;
  const int64_t d = config_.head_dim();
  const int64_t conv_out = shape_.seq_len() - config_.conv_k + 1;
  const int64_t text_width = 2 * config_.d_b;

  params_.add("encoder.conv.kernel", glorot(rng, config_.conv_k * 4, 1, {config_.conv_k, 4}));
  params_.add("encoder.conv.bias", Tensor::zeros({1}));
  params_.add("encoder.me.weight", glorot(rng, conv_out, dim, {conv_out, dim}));
  params_.add("encoder.me.bias", Tensor::zeros({dim}));
  params_.add("encoder.de.weight", glorot(rng, text_width, dim, {text_width, dim}));
  params_.add("encoder.de.bias", Tensor::zeros({dim}));
  params_.add("encoder.ge.weight", glorot(rng, text_width, dim, {text_width, dim}));
  params_.add("encoder.ge.bias", Tensor::zeros({dim}));

  for (int l = 0; l < config_.layers; ++l) {
    for (NodeType t : kNodeTypes) {
      for (int h = 0; h < config_.heads; ++h) {
        for (char which : {'q', 'k', 'm'}) {
          const std::string prefix = param_names::qkm(l, which, t, h);
          params_.add(param_names::linear_w(prefix), glorot(rng, dim, d, {dim, d}));
          params_.add(param_names::linear_b(prefix), Tensor::zeros({d}));
        }
      }
    }
    for (const MetaRelation& rel : shape_.relations) {
      for (int h = 0; h < config_.heads; ++h) {
        params_.add(param_names::att_w(l, rel, h), glorot(rng, d, d, {d, d}));
        params_.add(param_names::msg_w(l, rel, h), glorot(rng, d, d, {d, d}));
        params_.add(param_names::mu(l, rel, h), Tensor::scalar(1.0));
      }
    }
    for (NodeType t : kNodeTypes) {
      const std::string prefix = param_names::a_linear(l, t);
      params_.add(param_names::linear_w(prefix), glorot(rng, dim, dim, {dim, dim}));
      params_.add(param_names::linear_b(prefix), Tensor::zeros({dim}));
      params_.add(param_names::alpha(l, t), Tensor::scalar(0.0));
    }
  }

  params_.add("predictor.p1.weight", glorot(rng, 2 * dim, dim, {2 * dim, dim}));
  params_.add("predictor.p1.bias", Tensor::zeros({dim}));
  params_.add("predictor.p2.weight", glorot(rng, dim, 1, {dim, 1}));
  params_.add("predictor.p2.bias", Tensor::zeros({1}));
}

void Model::build_static_inputs() {
  const HeteroGraph& g = *graph_;
  const int64_t n_m = g.count(NodeType::miRNA);
  const int64_t n_d = g.count(NodeType::disease);
  const int64_t n_g = g.count(NodeType::PCG);
  const int64_t seq_cols = shape_.seq_len() * 4;
  const int64_t text_width = 2 * config_.d_b;

  if (config_.use_node_features) {
    input_mirna_ = Tensor::zeros({n_m, seq_cols});
    for (int64_t i = 0; i < n_m; ++i) {
      const MirnaSeq& s = g.features().mirna[static_cast<size_t>(i)];
      int64_t col = 0;
      for (const auto& [seq, block] : {std::pair<const std::string&, int64_t>{s.stem_loop, shape_.l_s},
                                       {s.mature_1, shape_.l_m1},
                                       {s.mature_2, shape_.l_m2}}) {
        const Tensor b = embed_sequence_1mer(seq, block);
        for (int64_t j = 0; j < b.size(); ++j) input_mirna_[i * seq_cols + col + j] = b[j];
        col += block * 4;
      }
    }
    input_disease_ = g.features().disease;
    input_pcg_ = g.features().pcg;
  } else {
    // Ablation condition 0: seeded random vectors stand in for all features.
    Rng rng = Rng::salted(config_.seed, kRandomFeatureSalt);
    auto random_matrix = [&rng](int64_t rows, int64_t cols) {
      Tensor t = Tensor::zeros({rows, cols});
      for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.next_double();
      return t;
    };
    input_mirna_ = random_matrix(n_m, seq_cols);
    input_disease_ = random_matrix(n_d, text_width);
    input_pcg_ = random_matrix(n_g, text_width);
  }

  edge_src_.clear();
  edge_tgt_.clear();
  std::array<std::vector<uint8_t>, kNumNodeTypes> incoming;
  for (NodeType t : kNodeTypes) incoming[static_cast<size_t>(t)].assign(static_cast<size_t>(g.count(t)), 0);
  for (size_t r = 0; r < g.relations().size(); ++r) {
    edge_src_.push_back(ops::make_index(g.edge_sources(static_cast<int>(r))));
    edge_tgt_.push_back(ops::make_index(g.edge_targets(static_cast<int>(r))));
    auto& mask = incoming[static_cast<size_t>(g.relations()[r].dst)];
    for (int32_t t : g.edge_targets(static_cast<int>(r))) mask[static_cast<size_t>(t)] = 1;
  }
  for (NodeType t : kNodeTypes)
    has_incoming_[static_cast<size_t>(t)] =
        std::make_shared<const std::vector<uint8_t>>(std::move(incoming[static_cast<size_t>(t)]));
}

Var Model::stage_param(ForwardPass& fp, int index) const { return fp.param_vars[static_cast<size_t>(index)]; }

Var Model::stage_param(ForwardPass& fp, const std::string& name) const {
  const int i = params_.index(name);
  if (i < 0) throw std::out_of_range("unknown parameter '" + name + "'");
  return stage_param(fp, i);
}

ForwardPass Model::forward() const {
  ForwardPass fp;
  Tape& tape = fp.tape;
  fp.param_vars.reserve(static_cast<size_t>(params_.count()));
  for (int i = 0; i < params_.count(); ++i) fp.param_vars.push_back(tape.leaf(params_.tensor(i)));

  auto P = [&](const std::string& name) { return stage_param(fp, name); };

  const Var x_m = tape.constant(input_mirna_);
  const Var x_d = tape.constant(input_disease_);
  const Var x_g = tape.constant(input_pcg_);

  // Encoder layer.
  std::array<Var, kNumNodeTypes> h;
  const Var conv = ops::conv1d_rows(tape, x_m, P("encoder.conv.kernel"), P("encoder.conv.bias"), shape_.seq_len(), 4);
  h[static_cast<size_t>(NodeType::miRNA)] = ops::linear(tape, conv, P("encoder.me.weight"), P("encoder.me.bias"));
  h[static_cast<size_t>(NodeType::disease)] = ops::linear(tape, x_d, P("encoder.de.weight"), P("encoder.de.bias"));
  h[static_cast<size_t>(NodeType::PCG)] = ops::linear(tape, x_g, P("encoder.ge.weight"), P("encoder.ge.bias"));
  fp.layer_outputs.push_back(h);

  const auto& rels = shape_.relations;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(config_.head_dim()));
  fp.attention.resize(static_cast<size_t>(config_.layers));

  for (int l = 0; l < config_.layers; ++l) {
    auto& layer_cache = fp.attention[static_cast<size_t>(l)];
    layer_cache.resize(rels.size());

    // Per-type, per-head Q/K/M projections of the previous layer.
    std::array<std::vector<Var>, kNumNodeTypes> q_all, k_all, m_all;
    for (NodeType t : kNodeTypes) {
      const Var prev = h[static_cast<size_t>(t)];
      for (int head = 0; head < config_.heads; ++head) {
        const std::string q = param_names::qkm(l, 'q', t, head);
        const std::string k = param_names::qkm(l, 'k', t, head);
        const std::string m = param_names::qkm(l, 'm', t, head);
        q_all[static_cast<size_t>(t)].push_back(
            ops::linear(tape, prev, P(param_names::linear_w(q)), P(param_names::linear_b(q))));
        k_all[static_cast<size_t>(t)].push_back(
            ops::linear(tape, prev, P(param_names::linear_w(k)), P(param_names::linear_b(k))));
        m_all[static_cast<size_t>(t)].push_back(
            ops::linear(tape, prev, P(param_names::linear_w(m)), P(param_names::linear_b(m))));
      }
    }

    // Attention-weighted messages, summed across meta-relations per target type.
    std::array<Var, kNumNodeTypes> agg{};
    for (size_t r = 0; r < rels.size(); ++r) {
      if (edge_src_[r]->empty()) continue;
      const MetaRelation& rel = rels[r];
      const auto st = static_cast<size_t>(rel.src);
      const auto tt = static_cast<size_t>(rel.dst);
      std::vector<Var> head_aggs;
      head_aggs.reserve(static_cast<size_t>(config_.heads));
      auto& cache = layer_cache[r];
      for (int head = 0; head < config_.heads; ++head) {
        const Var k_e = ops::gather_rows(tape, k_all[st][static_cast<size_t>(head)], edge_src_[r]);
        const Var q_e = ops::gather_rows(tape, q_all[tt][static_cast<size_t>(head)], edge_tgt_[r]);
        const Var kw = ops::matmul(tape, k_e, P(param_names::att_w(l, rel, head)));
        const Var score = ops::rowwise_dot(tape, kw, q_e);
        const Var raw = ops::scale_by_scalar(tape, score, P(param_names::mu(l, rel, head)), inv_sqrt_d);
        const Var att = ops::segmented_softmax(tape, raw, edge_tgt_[r]);
        cache.raw.push_back(raw);
        cache.att.push_back(att);
        const Var m_e = ops::gather_rows(tape, m_all[st][static_cast<size_t>(head)], edge_src_[r]);
        const Var msg = ops::matmul(tape, m_e, P(param_names::msg_w(l, rel, head)));
        const Var weighted = ops::scale_rows(tape, msg, att);
        head_aggs.push_back(ops::scatter_add_rows(tape, weighted, edge_tgt_[r], graph_->count(rel.dst)));
      }
      const Var rel_agg = ops::concat_cols(tape, head_aggs);
      agg[tt] = agg[tt].valid() ? ops::add(tape, agg[tt], rel_agg) : rel_agg;
    }

    // Residual gate; targets with no incoming edges keep the previous layer.
    std::array<Var, kNumNodeTypes> next = h;
    for (NodeType t : kNodeTypes) {
      const auto ti = static_cast<size_t>(t);
      if (!agg[ti].valid()) continue;
      const Var act = ops::gelu(tape, agg[ti]);
      const std::string prefix = param_names::a_linear(l, t);
      const Var proj = ops::linear(tape, act, P(param_names::linear_w(prefix)), P(param_names::linear_b(prefix)));
      next[ti] = ops::masked_residual_blend(tape, proj, h[ti], P(param_names::alpha(l, t)), has_incoming_[ti]);
    }
    h = next;
    fp.layer_outputs.push_back(h);
  }

  fp.final_output = h;
  return fp;
}

Var Model::score_pairs(ForwardPass& fp, const std::vector<Pair>& pairs) const {
  std::vector<int32_t> m_idx, d_idx;
  m_idx.reserve(pairs.size());
  d_idx.reserve(pairs.size());
  const int64_t n_m = graph_->count(NodeType::miRNA);
  const int64_t n_d = graph_->count(NodeType::disease);
  for (const Pair& p : pairs) {
    if (p.first < 0 || p.first >= n_m || p.second < 0 || p.second >= n_d)
      throw std::out_of_range("score_pairs: pair ordinal out of range");
    m_idx.push_back(p.first);
    d_idx.push_back(p.second);
  }
  Tape& tape = fp.tape;
  const Var h_m = ops::gather_rows(tape, fp.final_output[static_cast<size_t>(NodeType::miRNA)], ops::make_index(std::move(m_idx)));
  const Var h_d = ops::gather_rows(tape, fp.final_output[static_cast<size_t>(NodeType::disease)], ops::make_index(std::move(d_idx)));
  const Var cat = ops::concat_cols(tape, {h_m, h_d});
  auto P = [&](const std::string& name) { return stage_param(fp, name); };
  const Var z1 = ops::linear(tape, cat, P("predictor.p1.weight"), P("predictor.p1.bias"));
  const Var z2 = ops::linear(tape, z1, P("predictor.p2.weight"), P("predictor.p2.bias"));
  return ops::sigmoid(tape, z2);
}

Var Model::loss_bce(ForwardPass& fp, Var scores, const std::vector<int>& labels) const {
  return ops::bce_sum(fp.tape, scores, std::make_shared<const std::vector<int>>(labels));
}

std::vector<double> Model::score_pairs_values(const ForwardPass& fp, const std::vector<Pair>& pairs) const {
  const Tensor& h_m = fp.tape.value(fp.final_output[static_cast<size_t>(NodeType::miRNA)]);
  const Tensor& h_d = fp.tape.value(fp.final_output[static_cast<size_t>(NodeType::disease)]);
  const Tensor& w1 = params_.at("predictor.p1.weight");
  const Tensor& b1 = params_.at("predictor.p1.bias");
  const Tensor& w2 = params_.at("predictor.p2.weight");
  const Tensor& b2 = params_.at("predictor.p2.bias");
  const int64_t dim = config_.dim;
  std::vector<double> out;
  out.reserve(pairs.size());
  std::vector<double> z1(static_cast<size_t>(dim));
  for (const Pair& p : pairs) {
    if (p.first < 0 || p.first >= h_m.rows() || p.second < 0 || p.second >= h_d.rows())
      throw std::out_of_range("predict_pair: ordinal out of range");
    for (int64_t j = 0; j < dim; ++j) {
      double acc = 0.0;
      for (int64_t i = 0; i < dim; ++i) acc += h_m.at(p.first, i) * w1.at(i, j);
      for (int64_t i = 0; i < dim; ++i) acc += h_d.at(p.second, i) * w1.at(dim + i, j);
      z1[static_cast<size_t>(j)] = acc + b1[j];
    }
    double z2 = b2[0];
    for (int64_t i = 0; i < dim; ++i) z2 += z1[static_cast<size_t>(i)] * w2.at(i, 0);
    out.push_back(sigmoid_scalar(z2));
  }
  return out;
}

double Model::predict_pair(const ForwardPass& fp, int32_t mirna, int32_t disease) const {
  return score_pairs_values(fp, {{mirna, disease}})[0];
}

std::vector<Tensor> Model::gradients(const ForwardPass& fp) const {
  std::vector<Tensor> out;
  out.reserve(static_cast<size_t>(params_.count()));
  for (int i = 0; i < params_.count(); ++i) out.push_back(fp.tape.grad(fp.param_vars[static_cast<size_t>(i)]));
  return out;
}

double Model::residual_gate(int layer, NodeType type) const {
  return sigmoid_scalar(params_.at(param_names::alpha(layer, type))[0]);
}

}  // namespace egpmda
