#pragma once
// Learned-importance extraction: the per-meta-relation mu hierarchy across
// checkpoints, and per-pair explanations that restore the L-hop incoming
// neighborhood of a scored (miRNA, disease) pair with the attention and
// residual-gate values captured during the forward pass that produced the
// score.

#include <filesystem>
#include <string>
#include <vector>

#include "egpmda/checkpoint.hpp"
#include "egpmda/graph.hpp"
#include "egpmda/model.hpp"

namespace egpmda {

struct MuReport {
  struct Entry {
    MetaRelation relation;
    double mean_mu = 0.0;   // averaged over heads and checkpoints
    bool highlighted = false;  // mean > 1
  };
  std::vector<std::vector<Entry>> layers;  // [layer][relation]

  std::string to_json_string() const;
  void save(const std::filesystem::path& path) const;
};

// Requires every checkpoint to share one meta-relation registry and layer count.
MuReport mu_hierarchy(const std::vector<Checkpoint>& checkpoints);

struct ExplanationSubgraph {
  struct Node {
    NodeType type = NodeType::miRNA;
    int32_t ordinal = 0;
    std::string id;
    std::string name;
    int64_t depth = 0;                   // min incoming hops to an endpoint
    std::vector<double> gate_per_layer;  // sigmoid(alpha of this type), per layer
  };
  struct Edge {
    MetaRelation relation;
    int32_t src = 0;  // ordinal within relation.src
    int32_t dst = 0;  // ordinal within relation.dst
    std::vector<std::vector<double>> attention;  // [layer][head]
    std::vector<double> attention_mean;          // [layer], head-averaged
  };

  std::string mirna_id;
  std::string disease_id;
  double score = 0.0;
  int64_t hops = 0;
  std::vector<Node> nodes;
  std::vector<Edge> edges;

  std::string to_json_string() const;
  static ExplanationSubgraph from_json_string(const std::string& text);
  std::string to_dot_string() const;
  // format: "json" or "dot"
  void save(const std::filesystem::path& path, const std::string& format) const;
};

// Scores the pair, then restricts the graph to the union of the L-hop
// incoming neighborhoods of the two endpoints. The attached attention values
// are the exact cached values of the scoring forward pass. Unknown IDs raise
// an error listing near-miss candidates.
ExplanationSubgraph explain_pair(const Model& model, const HeteroGraph& graph, const std::string& mirna_id,
                                 const std::string& disease_id);

}  // namespace egpmda
