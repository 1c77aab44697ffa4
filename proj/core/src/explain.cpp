#include "egpmda/explain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace egpmda {

using ordered_json = nlohmann::ordered_json;

MuReport mu_hierarchy(const std::vector<Checkpoint>& checkpoints) {
  if (checkpoints.empty()) throw std::invalid_argument("mu_hierarchy: no checkpoints");
  const ModelShape& shape = checkpoints.front().shape;
  const int64_t layers = checkpoints.front().config.layers;
  const int64_t heads = checkpoints.front().config.heads;
  for (const Checkpoint& cp : checkpoints) {
    if (!(cp.shape.relations == shape.relations) || cp.config.layers != layers || cp.config.heads != heads)
      throw std::invalid_argument("mu_hierarchy: checkpoints disagree on registry or layer/head counts");
  }
  MuReport report;
  report.layers.resize(static_cast<size_t>(layers));
  for (int l = 0; l < layers; ++l) {
    for (const MetaRelation& rel : shape.relations) {
      double sum = 0.0;
      int64_t n = 0;
      for (const Checkpoint& cp : checkpoints) {
        for (int h = 0; h < heads; ++h) {
          sum += cp.params.at(param_names::mu(l, rel, h))[0];
          ++n;
        }
      }
      MuReport::Entry entry;
      entry.relation = rel;
      entry.mean_mu = sum / static_cast<double>(n);
      entry.highlighted = entry.mean_mu > 1.0;
      report.layers[static_cast<size_t>(l)].push_back(std::move(entry));
    }
  }
  return report;
}

std::string MuReport::to_json_string() const {
  ordered_json j;
  ordered_json layer_list = ordered_json::array();
  for (const auto& layer : layers) {
    ordered_json entries = ordered_json::array();
    for (const Entry& e : layer)
      entries.push_back({{"relation", e.relation.key()}, {"mean_mu", e.mean_mu}, {"highlighted", e.highlighted}});
    layer_list.push_back(std::move(entries));
  }
  j["layers"] = std::move(layer_list);
  return j.dump(2) + "\n";
}

void MuReport::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json_string();
}

namespace {

int64_t typed_key(NodeType type, int32_t ordinal) {
  return (static_cast<int64_t>(static_cast<uint8_t>(type)) << 32) | static_cast<uint32_t>(ordinal);
}

int32_t resolve_or_explain(const NodeTable& table, NodeType type, const std::string& symbol) {
  if (auto found = table.find(type, symbol)) return *found;
  std::string msg = "unknown " + std::string(to_string(type)) + " '" + symbol + "'";
  const auto near = table.near_misses(type, symbol);
  if (!near.empty()) {
    msg += "; close matches:";
    for (const std::string& n : near) msg += " " + n;
  }
  throw std::runtime_error(msg);
}

const char* dot_prefix(NodeType type) {
  switch (type) {
    case NodeType::miRNA: return "m";
    case NodeType::disease: return "d";
    case NodeType::PCG: return "g";
  }
  return "?";
}

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

ExplanationSubgraph explain_pair(const Model& model, const HeteroGraph& graph, const std::string& mirna_id,
                                 const std::string& disease_id) {
  const int32_t m = resolve_or_explain(graph.nodes(), NodeType::miRNA, mirna_id);
  const int32_t d = resolve_or_explain(graph.nodes(), NodeType::disease, disease_id);
  const int64_t hops = model.config().layers;

  const ForwardPass fp = model.forward();

  ExplanationSubgraph sub;
  sub.mirna_id = graph.nodes().entry(NodeType::miRNA, m).id;
  sub.disease_id = graph.nodes().entry(NodeType::disease, d).id;
  sub.score = model.predict_pair(fp, m, d);
  sub.hops = hops;

  // Incoming BFS from both endpoints, in discovery order.
  std::map<int64_t, int64_t> depth;  // typed key -> min hops
  std::vector<std::pair<NodeType, int32_t>> order;
  auto visit = [&](NodeType type, int32_t ordinal, int64_t at) {
    const int64_t key = typed_key(type, ordinal);
    if (depth.contains(key)) return false;
    depth[key] = at;
    order.emplace_back(type, ordinal);
    return true;
  };
  visit(NodeType::miRNA, m, 0);
  visit(NodeType::disease, d, 0);
  size_t frontier_begin = 0;
  for (int64_t hop = 1; hop <= hops; ++hop) {
    const size_t frontier_end = order.size();
    for (size_t i = frontier_begin; i < frontier_end; ++i) {
      const auto [type, ordinal] = order[i];
      for (size_t r = 0; r < graph.relations().size(); ++r) {
        const MetaRelation& rel = graph.relations()[r];
        if (rel.dst != type) continue;
        for (int32_t src : graph.neighbors(static_cast<int>(r), ordinal)) visit(rel.src, src, hop);
      }
    }
    frontier_begin = frontier_end;
  }

  for (const auto& [type, ordinal] : order) {
    ExplanationSubgraph::Node node;
    node.type = type;
    node.ordinal = ordinal;
    const NodeEntry& e = graph.nodes().entry(type, ordinal);
    node.id = e.id;
    node.name = e.name;
    node.depth = depth.at(typed_key(type, ordinal));
    for (int l = 0; l < model.config().layers; ++l) node.gate_per_layer.push_back(model.residual_gate(l, type));
    sub.nodes.push_back(std::move(node));
  }

  // Every incoming edge of a node at depth < hops lies on a message path.
  for (const auto& [type, ordinal] : order) {
    if (depth.at(typed_key(type, ordinal)) >= hops) continue;
    for (size_t r = 0; r < graph.relations().size(); ++r) {
      const MetaRelation& rel = graph.relations()[r];
      if (rel.dst != type) continue;
      const auto span = graph.neighbors(static_cast<int>(r), ordinal);
      if (span.empty()) continue;
      const auto base = static_cast<size_t>(span.data() - graph.edge_sources(static_cast<int>(r)).data());
      for (size_t j = 0; j < span.size(); ++j) {
        ExplanationSubgraph::Edge edge;
        edge.relation = rel;
        edge.src = span[j];
        edge.dst = ordinal;
        const size_t pos = base + j;
        for (int l = 0; l < model.config().layers; ++l) {
          const auto& cache = fp.attention[static_cast<size_t>(l)][r];
          std::vector<double> heads;
          double mean = 0.0;
          for (const Var att : cache.att) {
            const double v = fp.tape.value(att)[static_cast<int64_t>(pos)];
            heads.push_back(v);
            mean += v;
          }
          mean /= static_cast<double>(heads.size());
          edge.attention.push_back(std::move(heads));
          edge.attention_mean.push_back(mean);
        }
        sub.edges.push_back(std::move(edge));
      }
    }
  }
  return sub;
}

std::string ExplanationSubgraph::to_json_string() const {
  ordered_json j;
  j["mirna_id"] = mirna_id;
  j["disease_id"] = disease_id;
  j["score"] = score;
  j["hops"] = hops;
  ordered_json nodes_json = ordered_json::array();
  for (const Node& n : nodes) {
    nodes_json.push_back({{"type", to_string(n.type)},
                          {"ordinal", n.ordinal},
                          {"id", n.id},
                          {"name", n.name},
                          {"depth", n.depth},
                          {"gate_per_layer", n.gate_per_layer}});
  }
  j["nodes"] = std::move(nodes_json);
  ordered_json edges_json = ordered_json::array();
  for (const Edge& e : edges) {
    edges_json.push_back({{"relation", {{"src", to_string(e.relation.src)},
                                        {"kind", e.relation.kind},
                                        {"dst", to_string(e.relation.dst)}}},
                          {"src", e.src},
                          {"dst", e.dst},
                          {"attention", e.attention},
                          {"attention_mean", e.attention_mean}});
  }
  j["edges"] = std::move(edges_json);
  return j.dump(2) + "\n";
}

ExplanationSubgraph ExplanationSubgraph::from_json_string(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  ExplanationSubgraph sub;
  sub.mirna_id = j.at("mirna_id").get<std::string>();
  sub.disease_id = j.at("disease_id").get<std::string>();
  sub.score = j.at("score").get<double>();
  sub.hops = j.at("hops").get<int64_t>();
  for (const auto& n : j.at("nodes")) {
    Node node;
    node.type = *node_type_from(n.at("type").get<std::string>());
    node.ordinal = n.at("ordinal").get<int32_t>();
    node.id = n.at("id").get<std::string>();
    node.name = n.at("name").get<std::string>();
    node.depth = n.at("depth").get<int64_t>();
    node.gate_per_layer = n.at("gate_per_layer").get<std::vector<double>>();
    sub.nodes.push_back(std::move(node));
  }
  for (const auto& e : j.at("edges")) {
    Edge edge;
    edge.relation.src = *node_type_from(e.at("relation").at("src").get<std::string>());
    edge.relation.kind = e.at("relation").at("kind").get<std::string>();
    edge.relation.dst = *node_type_from(e.at("relation").at("dst").get<std::string>());
    edge.src = e.at("src").get<int32_t>();
    edge.dst = e.at("dst").get<int32_t>();
    edge.attention = e.at("attention").get<std::vector<std::vector<double>>>();
    edge.attention_mean = e.at("attention_mean").get<std::vector<double>>();
    sub.edges.push_back(std::move(edge));
  }
  return sub;
}

std::string ExplanationSubgraph::to_dot_string() const {
  std::string out = "digraph explanation {\n";
  out += "  rankdir=LR;\n";
  out += "  label=\"" + dot_escape(mirna_id) + " - " + dot_escape(disease_id) + ", score=" + std::to_string(score) +
         "\";\n";
  char buf[64];
  for (const Node& n : nodes) {
    std::string gates;
    for (size_t l = 0; l < n.gate_per_layer.size(); ++l) {
      std::snprintf(buf, sizeof(buf), "%.3f", n.gate_per_layer[l]);
      gates += (l ? "/" : "") + std::string(buf);
    }
    out += "  " + std::string(dot_prefix(n.type)) + std::to_string(n.ordinal) + " [label=\"" + dot_escape(n.name) +
           (gates.empty() ? "" : "\\ngate=" + gates) + "\"];\n";
  }
  for (const Edge& e : edges) {
    double mean = 0.0;
    for (double v : e.attention_mean) mean += v;
    if (!e.attention_mean.empty()) mean /= static_cast<double>(e.attention_mean.size());
    std::snprintf(buf, sizeof(buf), "%.6f", mean);
    const double pen = 0.5 + 4.0 * mean;
    char penbuf[32];
    std::snprintf(penbuf, sizeof(penbuf), "%.3f", pen);
    out += "  " + std::string(dot_prefix(e.relation.src)) + std::to_string(e.src) + " -> " +
           dot_prefix(e.relation.dst) + std::to_string(e.dst) + " [label=\"" + dot_escape(e.relation.kind) + " a=" +
           buf + "\", penwidth=" + penbuf + "];\n";
  }
  out += "}\n";
  return out;
}

void ExplanationSubgraph::save(const std::filesystem::path& path, const std::string& format) const {
  std::string content;
  if (format == "json")
    content = to_json_string();
  else if (format == "dot")
    content = to_dot_string();
  else
    throw std::invalid_argument("unknown explanation format '" + format + "' (expected json or dot)");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

}  // namespace egpmda
