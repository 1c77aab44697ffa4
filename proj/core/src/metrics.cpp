#include "egpmda/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "egpmda/rng.hpp"

namespace egpmda {

using ordered_json = nlohmann::ordered_json;

double auc(std::span<const ScoredPair> pairs) {
  int64_t n_pos = 0, n_neg = 0;
  for (const ScoredPair& p : pairs) (p.label ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("auc: needs at least one positive and one negative");
  std::vector<std::pair<double, int>> sorted;
  sorted.reserve(pairs.size());
  for (const ScoredPair& p : pairs) sorted.emplace_back(p.score, p.label);
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double concordant = 0.0;
  int64_t neg_below = 0;
  size_t i = 0;
  while (i < sorted.size()) {
    size_t j = i;
    int64_t pos_tied = 0, neg_tied = 0;
    while (j < sorted.size() && sorted[j].first == sorted[i].first) {
      (sorted[j].second ? pos_tied : neg_tied)++;
      ++j;
    }
    concordant += static_cast<double>(pos_tied) * static_cast<double>(neg_below);
    concordant += 0.5 * static_cast<double>(pos_tied) * static_cast<double>(neg_tied);
    neg_below += neg_tied;
    i = j;
  }
  return concordant / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double aupr(std::span<const ScoredPair> pairs) {
  int64_t n_pos = 0;
  for (const ScoredPair& p : pairs) n_pos += p.label;
  if (n_pos == 0) throw std::invalid_argument("aupr: needs at least one positive");
  std::vector<std::pair<double, int>> sorted;
  sorted.reserve(pairs.size());
  for (const ScoredPair& p : pairs) sorted.emplace_back(p.score, p.label);
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  double area = 0.0;
  double recall_prev = 0.0;
  int64_t tp = 0, fp = 0;
  size_t i = 0;
  while (i < sorted.size()) {
    size_t j = i;
    while (j < sorted.size() && sorted[j].first == sorted[i].first) {
      (sorted[j].second ? tp : fp)++;
      ++j;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    area += (recall - recall_prev) * precision;
    recall_prev = recall;
    i = j;
  }
  return area;
}

ThresholdMetrics threshold_metrics(std::span<const ScoredPair> pairs, double threshold) {
  if (pairs.empty()) throw std::invalid_argument("threshold_metrics: no pairs");
  ThresholdMetrics m;
  for (const ScoredPair& p : pairs) {
    const bool predicted = p.score >= threshold;
    if (predicted && p.label)
      ++m.tp;
    else if (predicted && !p.label)
      ++m.fp;
    else if (!predicted && p.label)
      ++m.fn;
    else
      ++m.tn;
  }
  const auto total = static_cast<double>(pairs.size());
  m.accuracy = static_cast<double>(m.tp + m.tn) / total;
  if (m.tp + m.fp == 0) {
    m.precision = 0.0;
    m.precision_undefined = true;
  } else {
    m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
  }
  m.recall = (m.tp + m.fn == 0) ? 0.0 : static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
  m.f1 = (m.precision + m.recall == 0.0) ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

double recall_at_percent(std::span<const ScoredPair> pairs, double pct) {
  if (pairs.empty()) throw std::invalid_argument("recall_at_percent: no pairs");
  if (pct <= 0.0 || pct > 100.0) throw std::invalid_argument("recall_at_percent: pct must be in (0, 100]");
  int64_t n_pos = 0;
  for (const ScoredPair& p : pairs) n_pos += p.label;
  if (n_pos == 0) throw std::invalid_argument("recall_at_percent: needs at least one positive");
  std::vector<const ScoredPair*> sorted;
  sorted.reserve(pairs.size());
  for (const ScoredPair& p : pairs) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(), [](const ScoredPair* a, const ScoredPair* b) {
    if (a->score != b->score) return a->score > b->score;
    if (a->mirna != b->mirna) return a->mirna < b->mirna;
    return a->disease < b->disease;
  });
  const auto top = static_cast<int64_t>(std::floor(pct / 100.0 * static_cast<double>(pairs.size())));
  int64_t hits = 0;
  for (int64_t i = 0; i < top; ++i) hits += sorted[static_cast<size_t>(i)]->label;
  return static_cast<double>(hits) / static_cast<double>(n_pos);
}

std::map<std::string, double> subset_recall(std::span<const ScoredPair> pairs) {
  std::map<std::string, std::pair<int64_t, int64_t>> tally;  // tag -> (detected, total)
  for (const ScoredPair& p : pairs) {
    if (!p.label || p.region.empty()) continue;
    auto& [detected, total] = tally[p.region];
    ++total;
    if (p.score >= 0.5) ++detected;
  }
  std::map<std::string, double> out;
  for (const auto& [tag, counts] : tally)
    out[tag] = static_cast<double>(counts.first) / static_cast<double>(counts.second);
  return out;
}

namespace {

// (type, ordinal) packed into one key so "all" keeps types distinct.
int64_t typed_key(NodeType type, int32_t ordinal) {
  return (static_cast<int64_t>(static_cast<uint8_t>(type)) << 32) | static_cast<uint32_t>(ordinal);
}

class NeighborIndex {
 public:
  NeighborIndex(const HeteroGraph& graph, const std::vector<Pair>& all_mda) : graph_(graph) {
    for (const Pair& p : all_mda) {
      mda_by_mirna_[p.first].push_back(p.second);
      mda_by_disease_[p.second].push_back(p.first);
    }
  }

  // All neighbors of (type, ordinal) over non-self relations plus the
  // momentary MDA edges, as sorted unique typed keys.
  std::vector<int64_t> neighbors(NodeType type, int32_t ordinal) {
    const int64_t key = typed_key(type, ordinal);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    std::vector<int64_t> out;
    const auto& rels = graph_.relations();
    for (size_t r = 0; r < rels.size(); ++r) {
      if (rels[r].kind == kinds::self) continue;
      if (rels[r].dst != type) continue;
      for (int32_t src : graph_.neighbors(static_cast<int>(r), ordinal)) out.push_back(typed_key(rels[r].src, src));
    }
    if (type == NodeType::miRNA) {
      if (auto m = mda_by_mirna_.find(ordinal); m != mda_by_mirna_.end())
        for (int32_t d : m->second) out.push_back(typed_key(NodeType::disease, d));
    } else if (type == NodeType::disease) {
      if (auto m = mda_by_disease_.find(ordinal); m != mda_by_disease_.end())
        for (int32_t mi : m->second) out.push_back(typed_key(NodeType::miRNA, mi));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    cache_.emplace(key, out);
    return out;
  }

 private:
  const HeteroGraph& graph_;
  std::unordered_map<int32_t, std::vector<int32_t>> mda_by_mirna_;
  std::unordered_map<int32_t, std::vector<int32_t>> mda_by_disease_;
  std::unordered_map<int64_t, std::vector<int64_t>> cache_;
};

}  // namespace

std::vector<double> common_neighbor_stat(const HeteroGraph& graph, const std::vector<Pair>& all_mda,
                                         const std::vector<Pair>& query, NeighborType type) {
  NeighborIndex index(graph, all_mda);
  std::vector<double> out;
  out.reserve(query.size());
  for (const Pair& q : query) {
    auto filter = [&](std::vector<int64_t> set) {
      std::vector<int64_t> kept;
      kept.reserve(set.size());
      const int64_t self_m = typed_key(NodeType::miRNA, q.first);
      const int64_t self_d = typed_key(NodeType::disease, q.second);
      for (int64_t k : set) {
        if (k == self_m || k == self_d) continue;  // the query nodes themselves
        if (type != NeighborType::all && (k >> 32) != static_cast<int64_t>(type)) continue;
        kept.push_back(k);
      }
      return kept;
    };
    const std::vector<int64_t> n_m = filter(index.neighbors(NodeType::miRNA, q.first));
    const std::vector<int64_t> n_d = filter(index.neighbors(NodeType::disease, q.second));
    std::vector<int64_t> inter, uni;
    std::set_intersection(n_m.begin(), n_m.end(), n_d.begin(), n_d.end(), std::back_inserter(inter));
    std::set_union(n_m.begin(), n_m.end(), n_d.begin(), n_d.end(), std::back_inserter(uni));
    out.push_back(uni.empty() ? std::numeric_limits<double>::quiet_NaN()
                              : static_cast<double>(inter.size()) / static_cast<double>(uni.size()));
  }
  return out;
}

std::string MetricsReport::to_json_string() const {
  ordered_json j;
  j["balanced"] = {{"auc", balanced.auc},
                   {"aupr", balanced.aupr},
                   {"accuracy", balanced.threshold.accuracy},
                   {"precision", balanced.threshold.precision},
                   {"precision_undefined", balanced.threshold.precision_undefined},
                   {"recall", balanced.threshold.recall},
                   {"f1", balanced.threshold.f1},
                   {"positives", balanced.positives},
                   {"negatives", balanced.negatives}};
  ordered_json recall_at = ordered_json::object();
  for (const auto& [pct, value] : imbalanced.recall_at) recall_at[std::to_string(pct)] = value;
  j["imbalanced"] = {{"auc", imbalanced.auc},
                     {"aupr", imbalanced.aupr},
                     {"recall_at_percent", std::move(recall_at)},
                     {"positives", imbalanced.positives},
                     {"negatives", imbalanced.negatives}};
  ordered_json regions = ordered_json::object();
  for (const auto& [tag, value] : region_recall)
    regions[tag] = {{"recall", value}, {"positives", region_positive_counts.at(tag)}};
  j["region_recall"] = std::move(regions);
  return j.dump(2) + "\n";
}

void MetricsReport::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json_string();
}

MetricsReport build_report(const std::vector<ScoredPair>& positives, const std::vector<ScoredPair>& negatives) {
  if (positives.empty()) throw std::invalid_argument("build_report: no positive pairs");
  MetricsReport report;

  std::vector<ScoredPair> balanced = positives;
  const size_t n_bal = std::min(negatives.size(), positives.size());
  balanced.insert(balanced.end(), negatives.begin(), negatives.begin() + static_cast<std::ptrdiff_t>(n_bal));
  report.balanced.positives = static_cast<int64_t>(positives.size());
  report.balanced.negatives = static_cast<int64_t>(n_bal);
  report.balanced.auc = auc(balanced);
  report.balanced.aupr = aupr(balanced);
  report.balanced.threshold = threshold_metrics(balanced);

  std::vector<ScoredPair> full = positives;
  full.insert(full.end(), negatives.begin(), negatives.end());
  report.imbalanced.positives = static_cast<int64_t>(positives.size());
  report.imbalanced.negatives = static_cast<int64_t>(negatives.size());
  report.imbalanced.auc = auc(full);
  report.imbalanced.aupr = aupr(full);
  report.imbalanced.recall_at[5] = recall_at_percent(full, 5.0);
  report.imbalanced.recall_at[10] = recall_at_percent(full, 10.0);

  report.region_recall = subset_recall(positives);
  for (const ScoredPair& p : positives)
    if (p.label && !p.region.empty()) report.region_positive_counts[p.region]++;
  return report;
}

void write_predictions(const std::filesystem::path& path, const HeteroGraph& graph,
                       std::span<const ScoredPair> pairs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "mirna_id\tdisease_id\tscore\tlabel\tregion\n";
  char buf[64];
  for (const ScoredPair& p : pairs) {
    std::snprintf(buf, sizeof(buf), "%.17g", p.score);
    out << graph.nodes().entry(NodeType::miRNA, p.mirna).id << '\t'
        << graph.nodes().entry(NodeType::disease, p.disease).id << '\t' << buf << '\t' << p.label << '\t'
        << (p.region.empty() ? "-" : p.region) << '\n';
  }
}

std::string adjacency_heatmap_tsv(const SplitManifest& manifest, int64_t bins) {
  if (bins <= 0) throw std::invalid_argument("adjacency_heatmap_tsv: bins must be positive");
  std::vector<Pair> train_val = manifest.train.pos;
  train_val.insert(train_val.end(), manifest.val.pos.begin(), manifest.val.pos.end());
  const RegionMap regions = RegionMap::from_positives(train_val, manifest.n_mirna, manifest.n_disease);

  // Rank nodes by known degree (descending; ordinal breaks ties) and bin the ranks.
  auto rank_bins = [bins](int64_t n, auto degree_of) {
    std::vector<int32_t> order(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) order[static_cast<size_t>(i)] = static_cast<int32_t>(i);
    std::sort(order.begin(), order.end(), [&](int32_t a, int32_t b) {
      const int32_t da = degree_of(a), db = degree_of(b);
      return da != db ? da > db : a < b;
    });
    std::vector<int64_t> bin_of(static_cast<size_t>(n));
    for (int64_t rank = 0; rank < n; ++rank)
      bin_of[static_cast<size_t>(order[static_cast<size_t>(rank)])] = std::min(bins - 1, rank * bins / std::max<int64_t>(n, 1));
    return bin_of;
  };
  const auto mirna_bin = rank_bins(manifest.n_mirna, [&](int32_t m) { return regions.mirna_degree(m); });
  const auto disease_bin = rank_bins(manifest.n_disease, [&](int32_t d) { return regions.disease_degree(d); });

  std::map<std::tuple<std::string, int64_t, int64_t>, int64_t> counts;
  auto accumulate = [&](const std::vector<Pair>& pairs, const std::string& partition) {
    for (const Pair& p : pairs)
      counts[{partition, mirna_bin[static_cast<size_t>(p.first)], disease_bin[static_cast<size_t>(p.second)]}]++;
  };
  accumulate(manifest.train.pos, "train");
  accumulate(manifest.val.pos, "val");
  accumulate(manifest.test.pos, "test");

  std::string out = "partition\tbin_mirna\tbin_disease\tcount\n";
  for (const auto& [key, count] : counts) {
    const auto& [partition, bm, bd] = key;
    out += partition + "\t" + std::to_string(bm) + "\t" + std::to_string(bd) + "\t" + std::to_string(count) + "\n";
  }
  return out;
}

std::string cm_histogram_tsv(const HeteroGraph& graph, const std::vector<Pair>& verified, uint64_t seed) {
  PairSet verified_set;
  for (const Pair& p : verified) verified_set.insert(p);
  Rng rng = Rng::salted(seed, 0x636d737461747321ull);
  const std::vector<Pair> random_pairs =
      sample_negatives(verified_set, graph.count(NodeType::miRNA), graph.count(NodeType::disease),
                       std::min<int64_t>(static_cast<int64_t>(verified.size()),
                                         graph.count(NodeType::miRNA) * graph.count(NodeType::disease) -
                                             static_cast<int64_t>(verified_set.size())),
                       rng);

  constexpr int kBins = 20;
  std::string out = "group\ttau\tbin\tlo\thi\tcount\n";
  const std::pair<const char*, const std::vector<Pair>*> groups[] = {{"verified", &verified},
                                                                     {"random", &random_pairs}};
  const std::pair<const char*, NeighborType> taus[] = {{"miRNA", NeighborType::miRNA},
                                                       {"PCG", NeighborType::PCG},
                                                       {"disease", NeighborType::disease},
                                                       {"all", NeighborType::all}};
  for (const auto& [group_name, pairs] : groups) {
    for (const auto& [tau_name, tau] : taus) {
      const std::vector<double> values = common_neighbor_stat(graph, verified, *pairs, tau);
      std::array<int64_t, kBins> hist{};
      int64_t nan_count = 0;
      for (double v : values) {
        if (std::isnan(v)) {
          ++nan_count;
          continue;
        }
        const int bin = std::min(kBins - 1, static_cast<int>(v * kBins));
        hist[static_cast<size_t>(bin)]++;
      }
      out += std::string(group_name) + "\t" + tau_name + "\t-1\tnan\tnan\t" + std::to_string(nan_count) + "\n";
      for (int b = 0; b < kBins; ++b) {
        char lo[16], hi[16];
        std::snprintf(lo, sizeof(lo), "%.2f", static_cast<double>(b) / kBins);
        std::snprintf(hi, sizeof(hi), "%.2f", static_cast<double>(b + 1) / kBins);
        out += std::string(group_name) + "\t" + tau_name + "\t" + std::to_string(b) + "\t" + lo + "\t" + hi + "\t" +
               std::to_string(hist[static_cast<size_t>(b)]) + "\n";
      }
    }
  }
  return out;
}

}  // namespace egpmda
