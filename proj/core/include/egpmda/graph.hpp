#pragma once
// Typed miRNA–PCG–disease graph. Nodes are loaded from TSV tables with
// alias-aware identifier resolution; edges are indexed per meta-relation as
// compressed incoming adjacency (sorted by target, then source). The built
// graph is immutable and safe to share across threads.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "egpmda/tensor.hpp"

namespace egpmda {

enum class NodeType : uint8_t { miRNA = 0, disease = 1, PCG = 2 };

inline constexpr std::array<NodeType, 3> kNodeTypes = {NodeType::miRNA, NodeType::disease, NodeType::PCG};
inline constexpr int kNumNodeTypes = 3;

const char* to_string(NodeType type);
std::optional<NodeType> node_type_from(const std::string& name);

namespace kinds {
inline constexpr const char* family = "family";
inline constexpr const char* father_son = "father-son";
inline constexpr const char* group = "group";
inline constexpr const char* association = "association";
inline constexpr const char* rev_association = "rev_association";
inline constexpr const char* self = "self";
}  // namespace kinds

struct MetaRelation {
  NodeType src;
  std::string kind;
  NodeType dst;

  std::string key() const { return std::string(to_string(src)) + ":" + kind + ":" + to_string(dst); }
  bool operator==(const MetaRelation&) const = default;
};

struct NodeEntry {
  std::string id;
  std::string name;
  std::vector<std::string> aliases;
};

// Per-type node registry with dense ordinals and a primary-ID/alias index.
class NodeTable {
 public:
  // Throws on duplicate primary IDs and on aliases claimed by two nodes.
  int32_t add(NodeType type, NodeEntry entry);

  int64_t count(NodeType type) const { return static_cast<int64_t>(entries_[idx(type)].size()); }
  const NodeEntry& entry(NodeType type, int32_t ordinal) const;
  const std::vector<NodeEntry>& entries(NodeType type) const { return entries_[idx(type)]; }

  // Primary-ID match first, alias transfer second.
  std::optional<int32_t> find(NodeType type, const std::string& symbol) const;

  // Case-insensitive near misses for error messages, best first.
  std::vector<std::string> near_misses(NodeType type, const std::string& symbol, size_t limit = 5) const;

 private:
  static size_t idx(NodeType t) { return static_cast<size_t>(t); }
  std::array<std::vector<NodeEntry>, kNumNodeTypes> entries_;
  std::array<std::unordered_map<std::string, int32_t>, kNumNodeTypes> primary_;
  std::array<std::unordered_map<std::string, int32_t>, kNumNodeTypes> alias_;
};

// Reads `id<TAB>name<TAB>aliases` (aliases '|'-separated, possibly empty).
NodeTable load_nodes(const std::filesystem::path& path, NodeType type);
void load_nodes_into(NodeTable& table, const std::filesystem::path& path, NodeType type);

struct ResolvedEdges {
  std::vector<std::pair<int32_t, int32_t>> pairs;
  int64_t dropped = 0;
};

// Resolves both endpoints (primary ID, then alias), drops what it cannot
// resolve, and de-duplicates while keeping first-seen order.
ResolvedEdges resolve_edges(const std::vector<std::pair<std::string, std::string>>& raw_pairs, NodeType src_type,
                            NodeType dst_type, const NodeTable& table);

std::vector<std::pair<std::string, std::string>> load_edge_pairs(const std::filesystem::path& path);

struct MirnaSeq {
  std::string stem_loop;
  std::string mature_1;
  std::string mature_2;  // may be empty
};

// Reads `id<TAB>stem_loop<TAB>mature_1<TAB>mature_2`; sequences are
// upper-cased and must contain only A/U/C/G. Every miRNA in the table needs
// a row; rows for unknown IDs are dropped.
std::vector<MirnaSeq> load_mirna_sequences(const std::filesystem::path& path, const NodeTable& table,
                                           int64_t* dropped = nullptr);

struct RawFeatures {
  std::vector<MirnaSeq> mirna;  // by miRNA ordinal
  Tensor disease;               // count × 2·d_b
  Tensor pcg;                   // count × 2·d_b
  int64_t d_b = 64;
  // Dataset maxima of the three sequence blocks, frozen at build time.
  int64_t l_s = 0;
  int64_t l_m1 = 0;
  int64_t l_m2 = 0;
};

// Deterministic stand-in for precomputed text embeddings: character 3-gram
// counts of the two texts hashed into 2·d_b buckets (fixed seed, one salt per
// text), then L2-normalized.
Tensor hashed_text_embedding(const std::string& name, const std::string& note, int64_t d_b);

struct TextFeatureResult {
  Tensor features;
  int64_t d_b = 0;
  int64_t dropped_rows = 0;  // embedding rows for unknown IDs
};

// Uses `embeddings_tsv` (`id<TAB>v1,v2,...`) when given; nodes without a row
// fall back to the hashed embedding. Without a file, everything is hashed at
// `default_d_b`.
TextFeatureResult build_text_features(const NodeTable& table, NodeType type,
                                      const std::optional<std::filesystem::path>& embeddings_tsv,
                                      int64_t default_d_b);

struct GraphBuildInput {
  NodeTable nodes;
  RawFeatures features;
  // Canonical-direction edge lists, already resolved to ordinals.
  std::vector<std::pair<int32_t, int32_t>> family;        // miRNA-miRNA, symmetric
  std::vector<std::pair<int32_t, int32_t>> father_son;    // disease-disease, symmetric
  std::vector<std::pair<int32_t, int32_t>> group;         // PCG-PCG, symmetric
  std::vector<std::pair<int32_t, int32_t>> mirna_pcg;     // miRNA -> PCG
  std::vector<std::pair<int32_t, int32_t>> pcg_disease;   // PCG -> disease
  std::vector<std::pair<int32_t, int32_t>> mirna_disease; // miRNA -> disease (ablation condition 4)
  bool use_intra_edges = true;
  bool use_pcg = true;
  bool include_mda = false;
};

class HeteroGraph {
 public:
  // Materializes reverse edges, symmetric intra-class pairs and self-loops,
  // de-duplicates, and builds the incoming-adjacency index.
  static HeteroGraph build(GraphBuildInput in);

  const NodeTable& nodes() const { return nodes_; }
  const RawFeatures& features() const { return features_; }
  int64_t count(NodeType type) const { return counts_[static_cast<size_t>(type)]; }

  const std::vector<MetaRelation>& relations() const { return relations_; }
  int relation_index(const MetaRelation& rel) const;  // -1 when absent
  bool has_relation(const MetaRelation& rel) const { return relation_index(rel) >= 0; }

  // Incoming sources of `target`, contiguous and sorted.
  std::span<const int32_t> neighbors(int relation, int32_t target) const;
  std::span<const int32_t> neighbors(const MetaRelation& rel, int32_t target) const;  // throws when unknown

  int64_t edge_count(int relation) const { return static_cast<int64_t>(adj_[relation].sources.size()); }
  int64_t total_edge_count() const;
  // Per-edge arrays in index order (targets ascending, sources ascending within a target).
  const std::vector<int32_t>& edge_sources(int relation) const { return adj_[relation].sources; }
  const std::vector<int32_t>& edge_targets(int relation) const { return adj_[relation].targets; }

  bool use_intra_edges() const { return use_intra_edges_; }
  bool use_pcg() const { return use_pcg_; }
  bool include_mda() const { return include_mda_; }

  // Version-tagged bundle: JSON header + little-endian binary arrays.
  std::vector<uint8_t> serialize() const;
  void save(const std::filesystem::path& path) const;
  static HeteroGraph deserialize(std::span<const uint8_t> bytes);
  static HeteroGraph load_file(const std::filesystem::path& path);

 private:
  struct Adjacency {
    std::vector<int64_t> offsets;   // per target ordinal, size count(dst)+1
    std::vector<int32_t> sources;   // concatenated incoming lists
    std::vector<int32_t> targets;   // expanded, aligned with sources
  };

  NodeTable nodes_;
  RawFeatures features_;
  std::array<int64_t, kNumNodeTypes> counts_{};
  std::vector<MetaRelation> relations_;
  std::unordered_map<std::string, int> relation_lookup_;
  std::vector<Adjacency> adj_;
  bool use_intra_edges_ = true;
  bool use_pcg_ = true;
  bool include_mda_ = false;
};

}  // namespace egpmda
