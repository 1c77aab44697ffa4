#include "egpmda/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "egpmda/tsv.hpp"

static_assert(std::endian::native == std::endian::little, "serialized bundles assume a little-endian host");

namespace egpmda {

using ordered_json = nlohmann::ordered_json;

const char* to_string(NodeType type) {
  switch (type) {
    case NodeType::miRNA: return "miRNA";
    case NodeType::disease: return "disease";
    case NodeType::PCG: return "PCG";
  }
  return "?";
}

std::optional<NodeType> node_type_from(const std::string& name) {
  for (NodeType t : kNodeTypes)
    if (name == to_string(t)) return t;
  return std::nullopt;
}

int32_t NodeTable::add(NodeType type, NodeEntry entry) {
  auto& prim = primary_[idx(type)];
  auto& alias = alias_[idx(type)];
  auto& list = entries_[idx(type)];
  if (prim.contains(entry.id))
    throw std::runtime_error("duplicate primary ID '" + entry.id + "' for type " + to_string(type));
  const auto ordinal = static_cast<int32_t>(list.size());
  prim.emplace(entry.id, ordinal);
  for (const std::string& a : entry.aliases) {
    auto [it, inserted] = alias.emplace(a, ordinal);
    if (!inserted && it->second != ordinal)
      throw std::runtime_error("alias '" + a + "' maps to two primary IDs ('" + list[it->second].id + "' and '" +
                               entry.id + "')");
  }
  list.push_back(std::move(entry));
  return ordinal;
}

const NodeEntry& NodeTable::entry(NodeType type, int32_t ordinal) const {
  const auto& list = entries_[idx(type)];
  if (ordinal < 0 || static_cast<size_t>(ordinal) >= list.size())
    throw std::out_of_range(std::string("node ordinal out of range for type ") + to_string(type));
  return list[static_cast<size_t>(ordinal)];
}

std::optional<int32_t> NodeTable::find(NodeType type, const std::string& symbol) const {
  const auto& prim = primary_[idx(type)];
  if (auto it = prim.find(symbol); it != prim.end()) return it->second;
  const auto& alias = alias_[idx(type)];
  if (auto it = alias.find(symbol); it != alias.end()) return it->second;
  return std::nullopt;
}

std::vector<std::string> NodeTable::near_misses(NodeType type, const std::string& symbol, size_t limit) const {
  std::string lowered = symbol;
  std::transform(lowered.begin(), lowered.end(), lowered.begin(), ::tolower);
  auto matches = [&lowered](const std::string& candidate) {
    std::string c = candidate;
    std::transform(c.begin(), c.end(), c.begin(), ::tolower);
    return c == lowered || c.find(lowered) != std::string::npos || lowered.find(c) != std::string::npos;
  };
  std::vector<std::string> out;
  for (const NodeEntry& e : entries_[idx(type)]) {
    if (out.size() >= limit) break;
    if (matches(e.id) || matches(e.name)) {
      out.push_back(e.id);
      continue;
    }
    for (const std::string& a : e.aliases)
      if (matches(a)) {
        out.push_back(e.id + " (alias " + a + ")");
        break;
      }
  }
  return out;
}

void load_nodes_into(NodeTable& table, const std::filesystem::path& path, NodeType type) {
  const TsvFile file = read_tsv(path, {"id", "name", "aliases"});
  for (const auto& row : file.rows) {
    NodeEntry entry;
    entry.id = row[0];
    entry.name = row[1];
    if (!row[2].empty()) {
      auto aliases = split_on(row[2], '|');
      for (std::string& a : aliases)
        if (!a.empty()) entry.aliases.push_back(std::move(a));
    }
    table.add(type, std::move(entry));
  }
}

NodeTable load_nodes(const std::filesystem::path& path, NodeType type) {
  NodeTable table;
  load_nodes_into(table, path, type);
  return table;
}

ResolvedEdges resolve_edges(const std::vector<std::pair<std::string, std::string>>& raw_pairs, NodeType src_type,
                            NodeType dst_type, const NodeTable& table) {
  ResolvedEdges out;
  std::unordered_set<uint64_t> seen;
  for (const auto& [src_sym, dst_sym] : raw_pairs) {
    const auto src = table.find(src_type, src_sym);
    const auto dst = table.find(dst_type, dst_sym);
    if (!src || !dst) {
      ++out.dropped;
      continue;
    }
    const uint64_t key = (static_cast<uint64_t>(static_cast<uint32_t>(*src)) << 32) | static_cast<uint32_t>(*dst);
    if (seen.insert(key).second) out.pairs.emplace_back(*src, *dst);
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> load_edge_pairs(const std::filesystem::path& path) {
  const TsvFile file = read_tsv(path, {"src_id", "dst_id"});
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(file.rows.size());
  for (const auto& row : file.rows) out.emplace_back(row[0], row[1]);
  return out;
}

namespace {

std::string validate_sequence(std::string seq, const std::string& id, const char* field) {
  std::transform(seq.begin(), seq.end(), seq.begin(), ::toupper);
  for (size_t i = 0; i < seq.size(); ++i) {
    const char c = seq[i];
    if (c != 'A' && c != 'U' && c != 'C' && c != 'G')
      throw std::runtime_error("sequence for '" + id + "' (" + field + ") has illegal character '" +
                               std::string(1, c) + "' at position " + std::to_string(i));
  }
  return seq;
}

}  // namespace

std::vector<MirnaSeq> load_mirna_sequences(const std::filesystem::path& path, const NodeTable& table,
                                           int64_t* dropped) {
  const TsvFile file = read_tsv(path, {"id", "stem_loop", "mature_1", "mature_2"});
  std::unordered_map<std::string, MirnaSeq> by_id;
  int64_t unknown = 0;
  for (const auto& row : file.rows) {
    if (!table.find(NodeType::miRNA, row[0])) {
      ++unknown;
      continue;
    }
    MirnaSeq seq;
    seq.stem_loop = validate_sequence(row[1], row[0], "stem_loop");
    seq.mature_1 = validate_sequence(row[2], row[0], "mature_1");
    seq.mature_2 = validate_sequence(row[3], row[0], "mature_2");
    by_id[row[0]] = std::move(seq);
  }
  if (dropped) *dropped = unknown;
  std::vector<MirnaSeq> out;
  const auto& entries = table.entries(NodeType::miRNA);
  out.reserve(entries.size());
  for (const NodeEntry& e : entries) {
    auto it = by_id.find(e.id);
    if (it == by_id.end()) throw std::runtime_error("no sequence row for miRNA '" + e.id + "' in " + path.string());
    out.push_back(std::move(it->second));
  }
  return out;
}

namespace {

uint64_t fnv1a(const char* data, size_t n, uint64_t seed) {
  uint64_t h = 14695981039346656037ull ^ seed;
  for (size_t i = 0; i < n; ++i) {
    h ^= static_cast<uint8_t>(data[i]);
    h *= 1099511628211ull;
  }
  return h;
}

void hash_grams(const std::string& text, uint64_t salt, int64_t buckets, Tensor& acc) {
  if (text.empty()) return;
  if (text.size() < 3) {
    acc[static_cast<int64_t>(fnv1a(text.data(), text.size(), salt) % static_cast<uint64_t>(buckets))] += 1.0;
    return;
  }
  for (size_t i = 0; i + 3 <= text.size(); ++i)
    acc[static_cast<int64_t>(fnv1a(text.data() + i, 3, salt) % static_cast<uint64_t>(buckets))] += 1.0;
}

}  // namespace

Tensor hashed_text_embedding(const std::string& name, const std::string& note, int64_t d_b) {
  const int64_t buckets = 2 * d_b;
  Tensor v = Tensor::zeros({buckets});
  hash_grams(name, 0x9e3779b97f4a7c15ull, buckets, v);
  hash_grams(note, 0x2545f4914f6cdd1dull, buckets, v);
  double norm = 0.0;
  for (int64_t i = 0; i < buckets; ++i) norm += v[i] * v[i];
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (int64_t i = 0; i < buckets; ++i) v[i] /= norm;
  }
  return v;
}

TextFeatureResult build_text_features(const NodeTable& table, NodeType type,
                                      const std::optional<std::filesystem::path>& embeddings_tsv,
                                      int64_t default_d_b) {
  TextFeatureResult result;
  std::unordered_map<std::string, std::vector<double>> rows;
  int64_t width = 2 * default_d_b;
  if (embeddings_tsv) {
    const TsvFile file = read_tsv(*embeddings_tsv, {"id", "values"});
    int64_t file_width = -1;
    for (const auto& row : file.rows) {
      std::vector<double> values;
      for (const std::string& field : split_on(row[1], ',')) {
        size_t pos = 0;
        const double v = std::stod(field, &pos);
        if (pos != field.size()) throw std::runtime_error(embeddings_tsv->string() + ": bad float '" + field + "'");
        if (!std::isfinite(v)) throw std::runtime_error(embeddings_tsv->string() + ": non-finite embedding value");
        values.push_back(v);
      }
      if (file_width < 0) {
        file_width = static_cast<int64_t>(values.size());
        if (file_width <= 0 || file_width % 2 != 0)
          throw std::runtime_error(embeddings_tsv->string() + ": embedding width must be positive and even (2*d_B)");
      } else if (file_width != static_cast<int64_t>(values.size())) {
        throw std::runtime_error(embeddings_tsv->string() + ": inconsistent embedding widths");
      }
      if (!table.find(type, row[0])) {
        ++result.dropped_rows;
        continue;
      }
      rows[row[0]] = std::move(values);
    }
    if (file_width > 0) width = file_width;
  }
  result.d_b = width / 2;
  const auto& entries = table.entries(type);
  result.features = Tensor::zeros({static_cast<int64_t>(entries.size()), width});
  for (size_t i = 0; i < entries.size(); ++i) {
    const NodeEntry& e = entries[i];
    auto it = rows.find(e.id);
    if (it != rows.end()) {
      for (int64_t j = 0; j < width; ++j) result.features.at(static_cast<int64_t>(i), j) = it->second[static_cast<size_t>(j)];
    } else {
      std::string aliases;
      for (const std::string& a : e.aliases) {
        if (!aliases.empty()) aliases += ' ';
        aliases += a;
      }
      const Tensor h = hashed_text_embedding(e.name, aliases, result.d_b);
      for (int64_t j = 0; j < width; ++j) result.features.at(static_cast<int64_t>(i), j) = h[j];
    }
  }
  return result;
}

namespace {

uint64_t pair_key(int32_t a, int32_t b) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) | static_cast<uint32_t>(b);
}

}  // namespace

HeteroGraph HeteroGraph::build(GraphBuildInput in) {
  HeteroGraph g;
  g.nodes_ = std::move(in.nodes);
  g.features_ = std::move(in.features);
  g.use_intra_edges_ = in.use_intra_edges;
  g.use_pcg_ = in.use_pcg;
  g.include_mda_ = in.include_mda;
  for (NodeType t : kNodeTypes) g.counts_[static_cast<size_t>(t)] = g.nodes_.count(t);

  if (static_cast<int64_t>(g.features_.mirna.size()) != g.count(NodeType::miRNA))
    throw std::runtime_error("feature/node count mismatch for miRNA sequences");
  const int64_t width = 2 * g.features_.d_b;
  if (g.features_.disease.rows() != g.count(NodeType::disease) || g.features_.disease.cols() != width)
    throw std::runtime_error("disease embedding matrix must be count x 2*d_b");
  if (g.features_.pcg.rows() != g.count(NodeType::PCG) || g.features_.pcg.cols() != width)
    throw std::runtime_error("PCG embedding matrix must be count x 2*d_b");
  if (!g.features_.disease.all_finite() || !g.features_.pcg.all_finite())
    throw std::runtime_error("embedding vectors must be finite");

  // Sequence-block maxima are frozen into the graph (and later the checkpoint).
  for (const MirnaSeq& s : g.features_.mirna) {
    g.features_.l_s = std::max<int64_t>(g.features_.l_s, static_cast<int64_t>(s.stem_loop.size()));
    g.features_.l_m1 = std::max<int64_t>(g.features_.l_m1, static_cast<int64_t>(s.mature_1.size()));
    g.features_.l_m2 = std::max<int64_t>(g.features_.l_m2, static_cast<int64_t>(s.mature_2.size()));
  }

  if (!in.use_intra_edges && (!in.family.empty() || !in.father_son.empty()))
    throw std::runtime_error("intra-class edges supplied but use_intra_edges is off");
  if (!in.use_pcg && (!in.group.empty() || !in.mirna_pcg.empty() || !in.pcg_disease.empty()))
    throw std::runtime_error("PCG edges supplied but use_pcg is off");
  if (!in.include_mda && !in.mirna_disease.empty())
    throw std::runtime_error("miRNA-disease edges supplied but include_mda is off");

  // Registry order is fixed; self-loop kinds close the list.
  if (in.use_intra_edges) {
    g.relations_.push_back({NodeType::miRNA, kinds::family, NodeType::miRNA});
    g.relations_.push_back({NodeType::disease, kinds::father_son, NodeType::disease});
  }
  if (in.use_pcg) {
    g.relations_.push_back({NodeType::PCG, kinds::group, NodeType::PCG});
    g.relations_.push_back({NodeType::miRNA, kinds::association, NodeType::PCG});
    g.relations_.push_back({NodeType::PCG, kinds::rev_association, NodeType::miRNA});
    g.relations_.push_back({NodeType::PCG, kinds::association, NodeType::disease});
    g.relations_.push_back({NodeType::disease, kinds::rev_association, NodeType::PCG});
  }
  if (in.include_mda) {
    g.relations_.push_back({NodeType::miRNA, kinds::association, NodeType::disease});
    g.relations_.push_back({NodeType::disease, kinds::rev_association, NodeType::miRNA});
  }
  for (NodeType t : kNodeTypes) g.relations_.push_back({t, kinds::self, t});
  for (size_t i = 0; i < g.relations_.size(); ++i) g.relation_lookup_[g.relations_[i].key()] = static_cast<int>(i);

  // Directed (source, target) pairs per relation, de-duplicated.
  std::vector<std::vector<std::pair<int32_t, int32_t>>> edges(g.relations_.size());
  std::vector<std::unordered_set<uint64_t>> seen(g.relations_.size());
  auto push = [&](const MetaRelation& rel, int32_t src, int32_t tgt) {
    const int idx = g.relation_index(rel);
    if (src < 0 || src >= g.count(rel.src) || tgt < 0 || tgt >= g.count(rel.dst))
      throw std::runtime_error("edge under '" + rel.key() + "' references an out-of-range ordinal (" +
                               std::to_string(src) + " -> " + std::to_string(tgt) + ")");
    if (seen[static_cast<size_t>(idx)].insert(pair_key(src, tgt)).second)
      edges[static_cast<size_t>(idx)].emplace_back(src, tgt);
  };
  auto push_symmetric = [&](const MetaRelation& rel, const std::vector<std::pair<int32_t, int32_t>>& list) {
    for (const auto& [a, b] : list) {
      if (a == b) continue;  // intra-class cliques carry no self-pairs; self-loops are separate
      push(rel, a, b);
      push(rel, b, a);
    }
  };
  auto push_directed = [&](const MetaRelation& fwd, const MetaRelation& rev,
                           const std::vector<std::pair<int32_t, int32_t>>& list) {
    for (const auto& [s, t] : list) {
      push(fwd, s, t);
      push(rev, t, s);
    }
  };

  if (in.use_intra_edges) {
    push_symmetric({NodeType::miRNA, kinds::family, NodeType::miRNA}, in.family);
    push_symmetric({NodeType::disease, kinds::father_son, NodeType::disease}, in.father_son);
  }
  if (in.use_pcg) {
    push_symmetric({NodeType::PCG, kinds::group, NodeType::PCG}, in.group);
    push_directed({NodeType::miRNA, kinds::association, NodeType::PCG},
                  {NodeType::PCG, kinds::rev_association, NodeType::miRNA}, in.mirna_pcg);
    push_directed({NodeType::PCG, kinds::association, NodeType::disease},
                  {NodeType::disease, kinds::rev_association, NodeType::PCG}, in.pcg_disease);
  }
  if (in.include_mda) {
    push_directed({NodeType::miRNA, kinds::association, NodeType::disease},
                  {NodeType::disease, kinds::rev_association, NodeType::miRNA}, in.mirna_disease);
  }
  for (NodeType t : kNodeTypes) {
    const MetaRelation rel{t, kinds::self, t};
    for (int32_t v = 0; v < g.count(t); ++v) push(rel, v, v);
  }

  // Incoming-adjacency index: sorted by target, then source.
  g.adj_.resize(g.relations_.size());
  for (size_t r = 0; r < g.relations_.size(); ++r) {
    auto& list = edges[r];
    std::sort(list.begin(), list.end(),
              [](const auto& a, const auto& b) { return a.second != b.second ? a.second < b.second : a.first < b.first; });
    Adjacency& adj = g.adj_[r];
    const int64_t n_tgt = g.count(g.relations_[r].dst);
    adj.offsets.assign(static_cast<size_t>(n_tgt) + 1, 0);
    adj.sources.reserve(list.size());
    adj.targets.reserve(list.size());
    for (const auto& [src, tgt] : list) {
      adj.offsets[static_cast<size_t>(tgt) + 1]++;
      adj.sources.push_back(src);
      adj.targets.push_back(tgt);
    }
    for (size_t i = 1; i < adj.offsets.size(); ++i) adj.offsets[i] += adj.offsets[i - 1];
  }
  return g;
}

int HeteroGraph::relation_index(const MetaRelation& rel) const {
  auto it = relation_lookup_.find(rel.key());
  return it == relation_lookup_.end() ? -1 : it->second;
}

std::span<const int32_t> HeteroGraph::neighbors(int relation, int32_t target) const {
  const Adjacency& adj = adj_.at(static_cast<size_t>(relation));
  if (target < 0 || static_cast<size_t>(target) + 1 >= adj.offsets.size())
    throw std::out_of_range("neighbors: target ordinal out of range");
  const int64_t lo = adj.offsets[static_cast<size_t>(target)];
  const int64_t hi = adj.offsets[static_cast<size_t>(target) + 1];
  return {adj.sources.data() + lo, static_cast<size_t>(hi - lo)};
}

std::span<const int32_t> HeteroGraph::neighbors(const MetaRelation& rel, int32_t target) const {
  const int idx = relation_index(rel);
  if (idx < 0) throw std::invalid_argument("unknown meta-relation '" + rel.key() + "'");
  return neighbors(idx, target);
}

int64_t HeteroGraph::total_edge_count() const {
  int64_t total = 0;
  for (const auto& adj : adj_) total += static_cast<int64_t>(adj.sources.size());
  return total;
}

namespace {

constexpr char kMagic[4] = {'E', 'G', 'P', 'G'};
constexpr uint32_t kVersion = 1;

template <typename T>
void append_array(std::vector<uint8_t>& out, const std::vector<T>& data) {
  const size_t bytes = data.size() * sizeof(T);
  const size_t at = out.size();
  out.resize(at + bytes);
  std::memcpy(out.data() + at, data.data(), bytes);
}

void append_tensor(std::vector<uint8_t>& out, const Tensor& t) {
  const size_t bytes = static_cast<size_t>(t.size()) * sizeof(double);
  const size_t at = out.size();
  out.resize(at + bytes);
  std::memcpy(out.data() + at, t.data(), bytes);
}

template <typename T>
std::vector<T> read_array(std::span<const uint8_t> bytes, size_t& cursor, size_t count) {
  const size_t need = count * sizeof(T);
  if (cursor + need > bytes.size()) throw std::runtime_error("graph bundle truncated");
  std::vector<T> out(count);
  std::memcpy(out.data(), bytes.data() + cursor, need);
  cursor += need;
  return out;
}

}  // namespace

std::vector<uint8_t> HeteroGraph::serialize() const {
  ordered_json header;
  header["format"] = "egpmda-graph";
  header["version"] = kVersion;
  ordered_json counts;
  for (NodeType t : kNodeTypes) counts[to_string(t)] = count(t);
  header["counts"] = counts;
  header["flags"] = {{"use_intra_edges", use_intra_edges_}, {"use_pcg", use_pcg_}, {"include_mda", include_mda_}};
  header["d_b"] = features_.d_b;
  header["l_s"] = features_.l_s;
  header["l_m1"] = features_.l_m1;
  header["l_m2"] = features_.l_m2;
  ordered_json nodes;
  for (NodeType t : kNodeTypes) {
    ordered_json list = ordered_json::array();
    for (const NodeEntry& e : nodes_.entries(t))
      list.push_back({{"id", e.id}, {"name", e.name}, {"aliases", e.aliases}});
    nodes[to_string(t)] = std::move(list);
  }
  header["nodes"] = std::move(nodes);
  ordered_json seqs = ordered_json::array();
  for (const MirnaSeq& s : features_.mirna) seqs.push_back({s.stem_loop, s.mature_1, s.mature_2});
  header["sequences"] = std::move(seqs);
  ordered_json rels = ordered_json::array();
  for (size_t r = 0; r < relations_.size(); ++r) {
    const MetaRelation& rel = relations_[r];
    rels.push_back({{"src", to_string(rel.src)},
                    {"kind", rel.kind},
                    {"dst", to_string(rel.dst)},
                    {"edges", static_cast<int64_t>(adj_[r].sources.size())}});
  }
  header["relations"] = std::move(rels);

  const std::string header_str = header.dump();
  std::vector<uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  const uint32_t version = kVersion;
  const uint64_t header_len = header_str.size();
  out.resize(out.size() + sizeof(version) + sizeof(header_len));
  std::memcpy(out.data() + 4, &version, sizeof(version));
  std::memcpy(out.data() + 8, &header_len, sizeof(header_len));
  out.insert(out.end(), header_str.begin(), header_str.end());
  for (const Adjacency& adj : adj_) {
    append_array(out, adj.offsets);
    append_array(out, adj.sources);
  }
  append_tensor(out, features_.disease);
  append_tensor(out, features_.pcg);
  return out;
}

void HeteroGraph::save(const std::filesystem::path& path) const {
  const std::vector<uint8_t> bytes = serialize();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

HeteroGraph HeteroGraph::deserialize(std::span<const uint8_t> bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw std::runtime_error("not an egpmda graph bundle");
  uint32_t version = 0;
  uint64_t header_len = 0;
  std::memcpy(&version, bytes.data() + 4, sizeof(version));
  std::memcpy(&header_len, bytes.data() + 8, sizeof(header_len));
  if (version != kVersion) throw std::runtime_error("unsupported graph bundle version " + std::to_string(version));
  if (16 + header_len > bytes.size()) throw std::runtime_error("graph bundle truncated");
  const ordered_json header = ordered_json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<size_t>(header_len));
  size_t cursor = 16 + static_cast<size_t>(header_len);

  HeteroGraph g;
  g.use_intra_edges_ = header.at("flags").at("use_intra_edges").get<bool>();
  g.use_pcg_ = header.at("flags").at("use_pcg").get<bool>();
  g.include_mda_ = header.at("flags").at("include_mda").get<bool>();
  for (NodeType t : kNodeTypes) {
    for (const auto& e : header.at("nodes").at(to_string(t))) {
      NodeEntry entry;
      entry.id = e.at("id").get<std::string>();
      entry.name = e.at("name").get<std::string>();
      for (const auto& a : e.at("aliases")) entry.aliases.push_back(a.get<std::string>());
      g.nodes_.add(t, std::move(entry));
    }
    g.counts_[static_cast<size_t>(t)] = g.nodes_.count(t);
    if (g.counts_[static_cast<size_t>(t)] != header.at("counts").at(to_string(t)).get<int64_t>())
      throw std::runtime_error("graph bundle node count mismatch");
  }
  g.features_.d_b = header.at("d_b").get<int64_t>();
  g.features_.l_s = header.at("l_s").get<int64_t>();
  g.features_.l_m1 = header.at("l_m1").get<int64_t>();
  g.features_.l_m2 = header.at("l_m2").get<int64_t>();
  for (const auto& s : header.at("sequences")) {
    MirnaSeq seq;
    seq.stem_loop = s.at(0).get<std::string>();
    seq.mature_1 = s.at(1).get<std::string>();
    seq.mature_2 = s.at(2).get<std::string>();
    g.features_.mirna.push_back(std::move(seq));
  }
  if (static_cast<int64_t>(g.features_.mirna.size()) != g.count(NodeType::miRNA))
    throw std::runtime_error("graph bundle sequence count mismatch");

  for (const auto& r : header.at("relations")) {
    MetaRelation rel;
    rel.src = *node_type_from(r.at("src").get<std::string>());
    rel.kind = r.at("kind").get<std::string>();
    rel.dst = *node_type_from(r.at("dst").get<std::string>());
    g.relations_.push_back(std::move(rel));
  }
  for (size_t i = 0; i < g.relations_.size(); ++i) g.relation_lookup_[g.relations_[i].key()] = static_cast<int>(i);

  g.adj_.resize(g.relations_.size());
  size_t rel_idx = 0;
  for (const auto& r : header.at("relations")) {
    Adjacency& adj = g.adj_[rel_idx];
    const int64_t n_tgt = g.count(g.relations_[rel_idx].dst);
    const auto n_edges = r.at("edges").get<int64_t>();
    adj.offsets = read_array<int64_t>(bytes, cursor, static_cast<size_t>(n_tgt) + 1);
    adj.sources = read_array<int32_t>(bytes, cursor, static_cast<size_t>(n_edges));
    adj.targets.reserve(static_cast<size_t>(n_edges));
    for (int64_t tgt = 0; tgt < n_tgt; ++tgt)
      for (int64_t i = adj.offsets[static_cast<size_t>(tgt)]; i < adj.offsets[static_cast<size_t>(tgt) + 1]; ++i)
        adj.targets.push_back(static_cast<int32_t>(tgt));
    ++rel_idx;
  }
  const int64_t width = 2 * g.features_.d_b;
  g.features_.disease =
      Tensor::from({g.count(NodeType::disease), width},
                   read_array<double>(bytes, cursor, static_cast<size_t>(g.count(NodeType::disease) * width)));
  g.features_.pcg = Tensor::from({g.count(NodeType::PCG), width},
                                 read_array<double>(bytes, cursor, static_cast<size_t>(g.count(NodeType::PCG) * width)));
  return g;
}

HeteroGraph HeteroGraph::load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace egpmda
