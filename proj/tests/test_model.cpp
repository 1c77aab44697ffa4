#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "egpmda/model.hpp"
#include "support/reference_model.hpp"
#include "support/toy.hpp"

using namespace egpmda;
using test::fill_params;
using test::toy_graph;

TEST_CASE("embed_sequence_1mer") {
  SUBCASE("single base one-hot") {
    const Tensor t = embed_sequence_1mer("A", 1);
    CHECK(t.at(0, 0) == 1.0);
    CHECK(t.at(0, 1) == 0.0);
  }
  SUBCASE("empty sequence pads with the placeholder vector") {
    const Tensor t = embed_sequence_1mer("", 2);
    for (int64_t i = 0; i < 2; ++i)
      for (int64_t c = 0; c < 4; ++c) CHECK(t.at(i, c) == 0.25);
  }
  SUBCASE("AUCG maps to the identity permutation") {
    const Tensor t = embed_sequence_1mer("AUCG", 4);
    for (int64_t i = 0; i < 4; ++i)
      for (int64_t c = 0; c < 4; ++c) CHECK(t.at(i, c) == (i == c ? 1.0 : 0.0));
  }
  SUBCASE("illegal character names its position") {
    CHECK_THROWS_WITH_AS(embed_sequence_1mer("AUXG", 4), doctest::Contains("position 2"), std::invalid_argument);
  }
  SUBCASE("overlong sequence is rejected") {
    CHECK_THROWS_AS(embed_sequence_1mer("AUCG", 2), std::invalid_argument);
  }
}

namespace {

ModelConfig small_config(int64_t layers = 2) {
  ModelConfig cfg;
  cfg.dim = 8;
  cfg.layers = layers;
  cfg.heads = 2;
  cfg.conv_k = 2;
  cfg.d_b = 3;
  cfg.seed = 17;
  return cfg;
}

}  // namespace

TEST_CASE("encoder") {
  const HeteroGraph g = toy_graph();
  SUBCASE("all-zero weights give an all-zero H0") {
    Model model(g, small_config(0));
    fill_params(model.params(), 0.0);
    const ForwardPass fp = model.forward();
    for (NodeType t : kNodeTypes) {
      const Tensor& h = fp.tape.value(fp.final_output[static_cast<size_t>(t)]);
      for (int64_t i = 0; i < h.size(); ++i) CHECK(h[i] == 0.0);
    }
  }
  SUBCASE("identical sequences encode to identical rows") {
    const HeteroGraph twin = toy_graph({.second_mirna_same_sequence = true});
    Model model(twin, small_config(0));
    const ForwardPass fp = model.forward();
    const Tensor& h = fp.tape.value(fp.final_output[static_cast<size_t>(NodeType::miRNA)]);
    for (int64_t j = 0; j < h.cols(); ++j) CHECK(h.at(0, j) == h.at(1, j));
  }
  SUBCASE("swapping two miRNAs with identical inputs leaves pair scores unchanged") {
    // m0 and m1 share a sequence and sit in one family clique, so their
    // neighborhoods mirror each other; their embeddings must stay equal
    // through the GNN layers and so must every score against them.
    const HeteroGraph twin = toy_graph({.n_pcg = 0, .second_mirna_same_sequence = true});
    Model model(twin, small_config(2));
    const ForwardPass fp = model.forward();
    for (int32_t d = 0; d < twin.count(NodeType::disease); ++d)
      CHECK(model.predict_pair(fp, 0, d) == model.predict_pair(fp, 1, d));
  }
  SUBCASE("hand-computed 2x2 case") {
    // One miRNA ("AU" / "G" / ""), conv_k=2, dim=2: walk the arithmetic by hand.
    GraphBuildInput in;
    in.nodes.add(NodeType::miRNA, {"m0", "m", {}});
    in.nodes.add(NodeType::disease, {"d0", "d", {}});
    in.nodes.add(NodeType::PCG, {"g0", "g", {}});
    in.features.mirna.push_back({"AU", "G", ""});
    in.features.d_b = 1;
    in.features.disease = Tensor::from({1, 2}, {0.5, -1.0});
    in.features.pcg = Tensor::from({1, 2}, {2.0, 0.25});
    const HeteroGraph g2 = HeteroGraph::build(std::move(in));

    ModelConfig cfg;
    cfg.dim = 2;
    cfg.layers = 0;
    cfg.heads = 1;
    cfg.conv_k = 2;
    cfg.d_b = 1;
    Model model(g2, cfg);
    auto& p = model.params();
    // Kernel picks out column 0 of row 0 and column 1 of row 1, bias 0.1.
    p.at("encoder.conv.kernel") = Tensor::from({2, 4}, {1, 0, 0, 0, 0, 1, 0, 0});
    p.at("encoder.conv.bias") = Tensor::scalar(0.1);
    // Sequence is A U G (l_s=2, l_m1=1, l_m2=0): rows A,U,G -> conv windows (A,U) and (U,G).
    // window1 = 1*A0 + 1*U1 = 1 + 1 = 2 -> 2.1; window2 = U0 + G1 = 0 + 0 -> 0.1.
    p.at("encoder.me.weight") = Tensor::from({2, 2}, {1.0, 0.0, 0.0, 2.0});
    p.at("encoder.me.bias") = Tensor::from({2}, {0.0, -0.2});
    p.at("encoder.de.weight") = Tensor::from({2, 2}, {1.0, 2.0, 3.0, 4.0});
    p.at("encoder.de.bias") = Tensor::from({2}, {0.1, 0.2});
    p.at("encoder.ge.weight") = Tensor::from({2, 2}, {0.0, 1.0, 1.0, 0.0});
    p.at("encoder.ge.bias") = Tensor::from({2}, {0.0, 0.0});

    const ForwardPass fp = model.forward();
    const Tensor& hm = fp.tape.value(fp.final_output[0]);
    CHECK(hm.at(0, 0) == doctest::Approx(2.1).epsilon(1e-12));
    CHECK(hm.at(0, 1) == doctest::Approx(0.2 - 0.2).epsilon(1e-12));
    const Tensor& hd = fp.tape.value(fp.final_output[1]);
    CHECK(hd.at(0, 0) == doctest::Approx(0.5 * 1.0 - 1.0 * 3.0 + 0.1).epsilon(1e-12));
    CHECK(hd.at(0, 1) == doctest::Approx(0.5 * 2.0 - 1.0 * 4.0 + 0.2).epsilon(1e-12));
    const Tensor& hg = fp.tape.value(fp.final_output[2]);
    CHECK(hg.at(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(hg.at(0, 1) == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("attention") {
  SUBCASE("single incoming edge gets attention 1 on every head") {
    const HeteroGraph g = toy_graph();
    Model model(g, small_config(1));
    const ForwardPass fp = model.forward();
    const MetaRelation family{NodeType::miRNA, kinds::family, NodeType::miRNA};
    const int r = g.relation_index(family);
    // family edges: (0,1) symmetric; each target has exactly one incoming edge.
    for (const Var att : fp.attention[0][static_cast<size_t>(r)].att) {
      const Tensor& a = fp.tape.value(att);
      for (int64_t e = 0; e < a.size(); ++e) CHECK(a[e] == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("two identical sources split attention evenly") {
    // miRNAs 0 and 1 share a sequence and both point at PCG 0.
    GraphBuildInput in;
    in.nodes.add(NodeType::miRNA, {"m0", "m", {}});
    in.nodes.add(NodeType::miRNA, {"m1", "m", {}});
    in.nodes.add(NodeType::disease, {"d0", "d", {}});
    in.nodes.add(NodeType::PCG, {"g0", "g", {}});
    in.features.mirna.push_back({"AUCGAU", "GC", ""});
    in.features.mirna.push_back({"AUCGAU", "GC", ""});
    in.features.d_b = 2;
    in.features.disease = Tensor::from({1, 4}, {1, 2, 3, 4});
    in.features.pcg = Tensor::from({1, 4}, {0, 1, 0, 1});
    in.mirna_pcg = {{0, 0}, {1, 0}};
    const HeteroGraph g = HeteroGraph::build(std::move(in));
    Model model(g, small_config(1));
    const ForwardPass fp = model.forward();
    const int r = g.relation_index({NodeType::miRNA, kinds::association, NodeType::PCG});
    for (const Var att : fp.attention[0][static_cast<size_t>(r)].att) {
      const Tensor& a = fp.tape.value(att);
      REQUIRE(a.size() == 2);
      CHECK(a[0] == doctest::Approx(0.5).epsilon(1e-12));
      CHECK(a[1] == doctest::Approx(0.5).epsilon(1e-12));
    }
  }
  SUBCASE("doubling mu exactly doubles that relation's raw scores") {
    const HeteroGraph g = toy_graph();
    const ModelConfig cfg = small_config(1);
    Model a(g, cfg);
    Model b(g, cfg);
    const MetaRelation family{NodeType::miRNA, kinds::family, NodeType::miRNA};
    const MetaRelation group{NodeType::PCG, kinds::group, NodeType::PCG};
    b.params().at(param_names::mu(0, family, 0))[0] *= 2.0;
    const ForwardPass fa = a.forward();
    const ForwardPass fb = b.forward();
    const int rf = g.relation_index(family);
    const int rg = g.relation_index(group);
    const Tensor& raw_a = fa.tape.value(fa.attention[0][static_cast<size_t>(rf)].raw[0]);
    const Tensor& raw_b = fb.tape.value(fb.attention[0][static_cast<size_t>(rf)].raw[0]);
    for (int64_t e = 0; e < raw_a.size(); ++e) CHECK(raw_b[e] == 2.0 * raw_a[e]);
    // Head 1 and other relations are untouched.
    const Tensor& h1_a = fa.tape.value(fa.attention[0][static_cast<size_t>(rf)].raw[1]);
    const Tensor& h1_b = fb.tape.value(fb.attention[0][static_cast<size_t>(rf)].raw[1]);
    for (int64_t e = 0; e < h1_a.size(); ++e) CHECK(h1_b[e] == h1_a[e]);
    const Tensor& g_a = fa.tape.value(fa.attention[0][static_cast<size_t>(rg)].raw[0]);
    const Tensor& g_b = fb.tape.value(fb.attention[0][static_cast<size_t>(rg)].raw[0]);
    for (int64_t e = 0; e < g_a.size(); ++e) CHECK(g_b[e] == g_a[e]);
  }
}

TEST_CASE("message and aggregation") {
  SUBCASE("identity message path reproduces the source vector") {
    // Disease 0's only incoming relation with nonzero W_msg is its self-loop;
    // M-linears select the head slices and W_msg is the identity, so
    // H~[d0] = H0[d0] and H1[d0] = 0.5*A(gelu(H0[d0])) + 0.5*H0[d0] with A = I.
    const HeteroGraph g = toy_graph();
    ModelConfig cfg = small_config(1);
    Model model(g, cfg);
    auto& p = model.params();
    const int64_t dim = cfg.dim, d = cfg.head_dim();
    for (Tensor& t : p.tensors())
      for (int64_t i = 0; i < t.size(); ++i) t[i] = 0.0;  // start from a blank slate
    // Re-build a usable encoder so H0 is nonzero.
    Model fresh(g, cfg);
    p.at("encoder.de.weight") = fresh.params().at("encoder.de.weight");
    p.at("encoder.me.weight") = fresh.params().at("encoder.me.weight");
    p.at("encoder.ge.weight") = fresh.params().at("encoder.ge.weight");
    p.at("encoder.conv.kernel") = fresh.params().at("encoder.conv.kernel");
    const MetaRelation self_d{NodeType::disease, kinds::self, NodeType::disease};
    for (int head = 0; head < cfg.heads; ++head) {
      Tensor& m_w = p.at(param_names::linear_w(param_names::qkm(0, 'm', NodeType::disease, head)));
      for (int64_t row = 0; row < dim; ++row)
        for (int64_t col = 0; col < d; ++col) m_w.at(row, col) = (row == head * d + col) ? 1.0 : 0.0;
      Tensor& w_msg = p.at(param_names::msg_w(0, self_d, head));
      for (int64_t row = 0; row < d; ++row)
        for (int64_t col = 0; col < d; ++col) w_msg.at(row, col) = (row == col) ? 1.0 : 0.0;
      p.at(param_names::mu(0, self_d, head))[0] = 1.0;
    }
    Tensor& a_w = p.at(param_names::linear_w(param_names::a_linear(0, NodeType::disease)));
    for (int64_t row = 0; row < dim; ++row)
      for (int64_t col = 0; col < dim; ++col) a_w.at(row, col) = (row == col) ? 1.0 : 0.0;

    const ForwardPass fp = model.forward();
    const Tensor& h0 = fp.tape.value(fp.layer_outputs[0][static_cast<size_t>(NodeType::disease)]);
    const Tensor& h1 = fp.tape.value(fp.layer_outputs[1][static_cast<size_t>(NodeType::disease)]);
    for (int64_t j = 0; j < dim; ++j) {
      const double expect = 0.5 * test::ref_gelu(h0.at(0, j)) + 0.5 * h0.at(0, j);
      CHECK(h1.at(0, j) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
  SUBCASE("zero sources with zero biases leave only the residual") {
    const HeteroGraph g = toy_graph();
    Model model(g, small_config(1));
    fill_params(model.params(), 0.0);  // every message is zero, alpha = 0 -> gate 0.5
    const ForwardPass fp = model.forward();
    for (NodeType t : kNodeTypes) {
      const Tensor& h0 = fp.tape.value(fp.layer_outputs[0][static_cast<size_t>(t)]);
      const Tensor& h1 = fp.tape.value(fp.layer_outputs[1][static_cast<size_t>(t)]);
      for (int64_t i = 0; i < h0.size(); ++i) CHECK(h1[i] == doctest::Approx(0.5 * h0[i]).epsilon(1e-12));
    }
  }
  SUBCASE("alpha -> -inf drives the gate to 0 and the layer to a pass-through") {
    const HeteroGraph g = toy_graph({.extra_edges = 2});
    Model model(g, small_config(1));
    for (NodeType t : kNodeTypes) model.params().at(param_names::alpha(0, t))[0] = -40.0;  // gate ~ 4e-18
    const ForwardPass fp = model.forward();
    for (NodeType t : kNodeTypes) {
      const auto ti = static_cast<size_t>(t);
      const Tensor& h0 = fp.tape.value(fp.layer_outputs[0][ti]);
      const Tensor& h1 = fp.tape.value(fp.layer_outputs[1][ti]);
      for (int64_t i = 0; i < h0.size(); ++i) CHECK(std::abs(h1[i] - h0[i]) < 1e-12);
    }
  }
  SUBCASE("alpha = 0 is the exact half/half blend (checked via the oracle)") {
    const HeteroGraph g = toy_graph({.extra_edges = 2});
    Model model(g, small_config(2));
    const auto ref = test::ref_forward(g, model.params(), model.config());
    const ForwardPass fp = model.forward();
    for (NodeType t : kNodeTypes) {
      const auto ti = static_cast<size_t>(t);
      const Tensor& h = fp.tape.value(fp.final_output[ti]);
      for (int64_t n = 0; n < h.rows(); ++n)
        for (int64_t j = 0; j < h.cols(); ++j)
          CHECK(std::abs(h.at(n, j) - ref.back()[ti][static_cast<size_t>(n)][static_cast<size_t>(j)]) < 1e-9);
    }
  }
}

TEST_CASE("full model matches the dense enumeration oracle") {
  for (uint64_t seed : {1ull, 2ull, 3ull}) {
    const HeteroGraph g = toy_graph({.n_mirna = 4,
                                     .n_disease = 4,
                                     .n_pcg = 3,
                                     .include_mda = seed == 2,
                                     .seed = seed,
                                     .extra_edges = 3});
    ModelConfig cfg = small_config(2);
    cfg.seed = seed * 31 + 1;
    Model model(g, cfg);
    const auto ref_layers = test::ref_forward(g, model.params(), model.config());
    const ForwardPass fp = model.forward();
    REQUIRE(fp.layer_outputs.size() == ref_layers.size());
    for (size_t l = 0; l < ref_layers.size(); ++l) {
      for (NodeType t : kNodeTypes) {
        const auto ti = static_cast<size_t>(t);
        const Tensor& h = fp.tape.value(fp.layer_outputs[l][ti]);
        for (int64_t n = 0; n < h.rows(); ++n)
          for (int64_t j = 0; j < h.cols(); ++j) {
            INFO("layer " << l << " type " << to_string(t) << " node " << n << " col " << j);
            CHECK(std::abs(h.at(n, j) - ref_layers[l][ti][static_cast<size_t>(n)][static_cast<size_t>(j)]) < 1e-9);
          }
      }
    }
    // Pair scores, engine vs oracle.
    std::vector<Pair> pairs;
    for (int32_t m = 0; m < g.count(NodeType::miRNA); ++m)
      for (int32_t d = 0; d < g.count(NodeType::disease); ++d) pairs.emplace_back(m, d);
    const std::vector<double> scores = model.score_pairs_values(fp, pairs);
    for (size_t i = 0; i < pairs.size(); ++i)
      CHECK(std::abs(scores[i] - test::ref_score(ref_layers.back(), model.params(), pairs[i])) < 1e-9);
  }
}

TEST_CASE("predict_pair") {
  const HeteroGraph g = toy_graph();
  SUBCASE("zero weights score one half everywhere") {
    Model model(g, small_config(2));
    fill_params(model.params(), 0.0);
    const ForwardPass fp = model.forward();
    for (int32_t m = 0; m < g.count(NodeType::miRNA); ++m)
      for (int32_t d = 0; d < g.count(NodeType::disease); ++d) CHECK(model.predict_pair(fp, m, d) == 0.5);
  }
  SUBCASE("tape scores agree with the inference path") {
    Model model(g, small_config(2));
    ForwardPass fp = model.forward();
    const std::vector<Pair> pairs{{0, 0}, {1, 2}, {2, 1}};
    const Var scores = model.score_pairs(fp, pairs);
    const std::vector<double> eager = model.score_pairs_values(fp, pairs);
    for (size_t i = 0; i < pairs.size(); ++i)
      CHECK(fp.tape.value(scores)[static_cast<int64_t>(i)] == doctest::Approx(eager[i]).epsilon(1e-12));
  }
  SUBCASE("out-of-range ordinals are rejected") {
    Model model(g, small_config(0));
    const ForwardPass fp = model.forward();
    CHECK_THROWS_AS(model.predict_pair(fp, 99, 0), std::out_of_range);
    ForwardPass fp2 = model.forward();
    CHECK_THROWS_AS(model.score_pairs(fp2, {{0, 99}}), std::out_of_range);
  }
}

TEST_CASE("bce loss") {
  const HeteroGraph g = toy_graph();
  Model model(g, small_config(0));
  SUBCASE("score one half costs ln 2 for either label") {
    for (int label : {0, 1}) {
      Tape t;
      const Var s = t.constant(Tensor::scalar(0.5));
      const Var loss = ops::bce_sum(t, s, std::make_shared<const std::vector<int>>(std::vector<int>{label}));
      CHECK(t.value(loss)[0] == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    }
  }
  SUBCASE("perfect scores drive the loss to zero") {
    Tape t;
    const Var s = t.constant(Tensor::from({2}, {1.0 - 1e-9, 1e-9}));
    const Var loss = ops::bce_sum(t, s, std::make_shared<const std::vector<int>>(std::vector<int>{1, 0}));
    CHECK(t.value(loss)[0] < 1e-6);
  }
  SUBCASE("labels outside {0,1} are rejected") {
    ForwardPass fp = model.forward();
    const Var scores = model.score_pairs(fp, {{0, 0}});
    CHECK_THROWS_AS(model.loss_bce(fp, scores, {2}), std::invalid_argument);
  }
  SUBCASE("loss gradient w.r.t. scores matches finite differences below 1e-8") {
    const std::vector<double> raw{0.3, 0.62, 0.45, 0.71};
    const std::vector<int> labels{1, 0, 0, 1};
    auto loss_at = [&](const std::vector<double>& s) {
      double total = 0.0;
      for (size_t i = 0; i < s.size(); ++i)
        total -= labels[i] * std::log(s[i]) + (1.0 - labels[i]) * std::log(1.0 - s[i]);
      return total;
    };
    Tape t;
    const Var s = t.leaf(Tensor::from({4}, std::vector<double>(raw)));
    const Var loss = ops::bce_sum(t, s, std::make_shared<const std::vector<int>>(labels));
    t.backward(loss);
    const double h = 1e-5;
    for (size_t i = 0; i < raw.size(); ++i) {
      std::vector<double> up = raw, down = raw;
      up[i] += h;
      down[i] -= h;
      const double numeric = (loss_at(up) - loss_at(down)) / (2.0 * h);
      CHECK(std::abs(t.grad(s)[static_cast<int64_t>(i)] - numeric) < 1e-8);
    }
  }
}

TEST_CASE("locality: scores depend only on the L-hop in-neighborhood") {
  // Chain m0 -> g0 -> d0; d2 and m2 stay isolated (self-loops only).
  GraphBuildInput in;
  Rng seq_rng(9);
  for (int i = 0; i < 3; ++i) {
    in.nodes.add(NodeType::miRNA, {"m" + std::to_string(i), "m", {}});
    in.nodes.add(NodeType::disease, {"d" + std::to_string(i), "d", {}});
    in.nodes.add(NodeType::PCG, {"g" + std::to_string(i), "g", {}});
    in.features.mirna.push_back({test::random_sequence(seq_rng, 6), "AU", ""});
  }
  in.features.d_b = 2;
  Rng frng(4);
  in.features.disease = Tensor::zeros({3, 4});
  in.features.pcg = Tensor::zeros({3, 4});
  for (int64_t i = 0; i < in.features.disease.size(); ++i) in.features.disease[i] = frng.uniform(-1, 1);
  for (int64_t i = 0; i < in.features.pcg.size(); ++i) in.features.pcg[i] = frng.uniform(-1, 1);
  in.mirna_pcg = {{0, 0}};
  in.pcg_disease = {{0, 0}};
  const Tensor disease_feat = in.features.disease;
  const Tensor pcg_feat = in.features.pcg;
  auto clone_input = [&](Tensor disease, Tensor pcg) {
    GraphBuildInput copy;
    for (int i = 0; i < 3; ++i) {
      copy.nodes.add(NodeType::miRNA, in.nodes.entry(NodeType::miRNA, i));
      copy.nodes.add(NodeType::disease, in.nodes.entry(NodeType::disease, i));
      copy.nodes.add(NodeType::PCG, in.nodes.entry(NodeType::PCG, i));
    }
    copy.features = in.features;
    copy.features.disease = std::move(disease);
    copy.features.pcg = std::move(pcg);
    copy.mirna_pcg = in.mirna_pcg;
    copy.pcg_disease = in.pcg_disease;
    return copy;
  };

  const HeteroGraph base = HeteroGraph::build(clone_input(disease_feat, pcg_feat));
  ModelConfig cfg = small_config(2);
  cfg.d_b = 2;
  const Model model(base, cfg);
  const double score_base = model.predict_pair(model.forward(), 0, 0);

  SUBCASE("perturbing a node outside both in-neighborhoods changes nothing") {
    Tensor far = disease_feat;
    far.at(2, 1) += 10.0;  // d2 reaches neither m0 nor d0 within 2 incoming hops
    const HeteroGraph moved = HeteroGraph::build(clone_input(far, pcg_feat));
    const Model model2(moved, model.to_checkpoint());
    CHECK(model2.predict_pair(model2.forward(), 0, 0) == score_base);
  }
  SUBCASE("perturbing a 2-hop in-neighbor moves the score") {
    Tensor near = pcg_feat;
    near.at(0, 0) += 1.0;  // g0 -> d0 within one hop
    const HeteroGraph moved = HeteroGraph::build(clone_input(disease_feat, near));
    const Model model2(moved, model.to_checkpoint());
    CHECK(model2.predict_pair(model2.forward(), 0, 0) != score_base);
  }
}

TEST_CASE("L = 0 reduces to encoder plus predictor") {
  const HeteroGraph g = toy_graph();
  ModelConfig cfg = small_config(0);
  Model model(g, cfg);
  for (const std::string& name : model.params().names()) CHECK(name.rfind("l0.", 0) == std::string::npos);
  const ForwardPass fp = model.forward();
  CHECK(fp.layer_outputs.size() == 1);
  const auto ref = test::ref_forward(g, model.params(), cfg);
  const double score = model.predict_pair(fp, 0, 0);
  CHECK(std::abs(score - test::ref_score(ref.back(), model.params(), {0, 0})) < 1e-12);
}

TEST_CASE("relabeling equivariance") {
  // Build the same toy graph under two node orderings and compare scores by ID.
  auto build_permuted = [](bool permute) {
    GraphBuildInput in;
    const std::vector<int> order_m = permute ? std::vector<int>{2, 0, 1} : std::vector<int>{0, 1, 2};
    const std::vector<int> order_d = permute ? std::vector<int>{1, 2, 0} : std::vector<int>{0, 1, 2};
    const std::vector<int> order_g = permute ? std::vector<int>{2, 1, 0} : std::vector<int>{0, 1, 2};
    const std::vector<MirnaSeq> seqs{{"AUCGAU", "GC", "A"}, {"GGCCUU", "AU", ""}, {"AUAUAU", "CG", "GG"}};
    const std::vector<std::vector<double>> dfeat{{1, 2, 0, 1}, {0, 1, 1, 0}, {2, 0, 0, 2}};
    const std::vector<std::vector<double>> gfeat{{1, 0, 0, 1}, {0, 2, 2, 0}, {1, 1, 0, 0}};
    std::array<int32_t, 3> m_ord{}, d_ord{}, g_ord{};
    for (int i = 0; i < 3; ++i) {
      const int m = order_m[static_cast<size_t>(i)];
      const int d = order_d[static_cast<size_t>(i)];
      const int gg = order_g[static_cast<size_t>(i)];
      m_ord[static_cast<size_t>(m)] = in.nodes.add(NodeType::miRNA, {"m" + std::to_string(m), "m", {}});
      d_ord[static_cast<size_t>(d)] = in.nodes.add(NodeType::disease, {"d" + std::to_string(d), "d", {}});
      g_ord[static_cast<size_t>(gg)] = in.nodes.add(NodeType::PCG, {"g" + std::to_string(gg), "g", {}});
      in.features.mirna.push_back(seqs[static_cast<size_t>(m)]);
    }
    in.features.d_b = 2;
    in.features.disease = Tensor::zeros({3, 4});
    in.features.pcg = Tensor::zeros({3, 4});
    for (int i = 0; i < 3; ++i) {
      const int d = order_d[static_cast<size_t>(i)];
      const int gg = order_g[static_cast<size_t>(i)];
      for (int j = 0; j < 4; ++j) {
        in.features.disease.at(i, j) = dfeat[static_cast<size_t>(d)][static_cast<size_t>(j)];
        in.features.pcg.at(i, j) = gfeat[static_cast<size_t>(gg)][static_cast<size_t>(j)];
      }
    }
    in.family = {{m_ord[0], m_ord[1]}};
    in.father_son = {{d_ord[0], d_ord[1]}};
    in.group = {{g_ord[0], g_ord[1]}};
    in.mirna_pcg = {{m_ord[0], g_ord[0]}, {m_ord[2], g_ord[2]}};
    in.pcg_disease = {{g_ord[1], d_ord[1]}, {g_ord[2], d_ord[2]}};
    return HeteroGraph::build(std::move(in));
  };
  const HeteroGraph a = build_permuted(false);
  const HeteroGraph b = build_permuted(true);
  ModelConfig cfg = small_config(2);
  cfg.d_b = 2;
  const Model model_a(a, cfg);
  const Model model_b(b, model_a.to_checkpoint());
  const ForwardPass fa = model_a.forward();
  const ForwardPass fb = model_b.forward();
  for (int m = 0; m < 3; ++m)
    for (int d = 0; d < 3; ++d) {
      const std::string mid = "m" + std::to_string(m);
      const std::string did = "d" + std::to_string(d);
      const double sa = model_a.predict_pair(fa, *a.nodes().find(NodeType::miRNA, mid), *a.nodes().find(NodeType::disease, did));
      const double sb = model_b.predict_pair(fb, *b.nodes().find(NodeType::miRNA, mid), *b.nodes().find(NodeType::disease, did));
      CHECK(std::abs(sa - sb) <= 1e-9);
    }
}

TEST_CASE("checkpoint round trip and graph validation") {
  const HeteroGraph g = toy_graph();
  Model model(g, small_config(2));
  const Checkpoint cp = model.to_checkpoint();
  const std::vector<uint8_t> bytes = cp.serialize();
  const Checkpoint back = Checkpoint::deserialize(bytes);
  CHECK(back.serialize() == bytes);
  CHECK(back.config.dim == 8);
  CHECK(back.shape.relations == g.relations());

  const Model resumed(g, back);
  const double s1 = model.predict_pair(model.forward(), 0, 0);
  const double s2 = resumed.predict_pair(resumed.forward(), 0, 0);
  CHECK(s1 == s2);

  const HeteroGraph other = toy_graph({.include_mda = true});
  CHECK_THROWS_AS(Model(other, back), std::runtime_error);
}
