#pragma once
// Evaluation metrics: rank-based AUC with tied scores counted 1/2,
// step-interpolated AUPR with atomic tie groups, confusion-matrix metrics at
// a threshold, Recall@N% with deterministic tie-breaking, per-region subset
// recall, and the Jaccard-style common-neighbor statistic CM^τ.

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "egpmda/graph.hpp"
#include "egpmda/split.hpp"

namespace egpmda {

struct ScoredPair {
  int32_t mirna = 0;
  int32_t disease = 0;
  double score = 0.0;
  int label = 0;
  std::string region;  // optional tag, e.g. "M-0"
};

// Concordance probability; throws when only one class is present.
double auc(std::span<const ScoredPair> pairs);

// Area under precision-recall: sum (R_i - R_{i-1})·P_i over descending
// thresholds; throws when there are no positives.
double aupr(std::span<const ScoredPair> pairs);

struct ThresholdMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_undefined = false;  // no predicted positives; precision reported as 0
  int64_t tp = 0, fp = 0, tn = 0, fn = 0;
};

// score >= threshold counts as a positive prediction.
ThresholdMetrics threshold_metrics(std::span<const ScoredPair> pairs, double threshold = 0.5);

// Top floor(pct/100·n) by (score desc, (mirna,disease) asc) declared positive.
double recall_at_percent(std::span<const ScoredPair> pairs, double pct);

// Recall over positives per region tag at threshold 0.5; tags without
// positives are absent from the map.
std::map<std::string, double> subset_recall(std::span<const ScoredPair> pairs);

enum class NeighborType { miRNA = 0, disease = 1, PCG = 2, all = 3 };

// CM^τ(m, d) = |N_m ∩ N_d| / |N_m ∪ N_d| over τ-typed neighbors, with all
// the supplied MDA pairs momentarily treated as edges. Self-loops and the
// two query nodes are excluded from the neighbor sets. NaN when the union
// is empty.
std::vector<double> common_neighbor_stat(const HeteroGraph& graph, const std::vector<Pair>& all_mda,
                                         const std::vector<Pair>& query, NeighborType type);

struct MetricsReport {
  struct Balanced {
    double auc = 0.0;
    double aupr = 0.0;
    ThresholdMetrics threshold;
    int64_t positives = 0;
    int64_t negatives = 0;
  } balanced;
  struct Imbalanced {
    double auc = 0.0;
    double aupr = 0.0;
    std::map<int, double> recall_at;  // percent -> recall
    int64_t positives = 0;
    int64_t negatives = 0;
  } imbalanced;
  std::map<std::string, double> region_recall;
  std::map<std::string, int64_t> region_positive_counts;

  std::string to_json_string() const;
  void save(const std::filesystem::path& path) const;
};

// Balanced block = positives + the first |positives| negatives of the pool;
// imbalanced block = positives + the whole pool.
MetricsReport build_report(const std::vector<ScoredPair>& positives, const std::vector<ScoredPair>& negatives);

void write_predictions(const std::filesystem::path& path, const HeteroGraph& graph,
                       std::span<const ScoredPair> pairs);

// Fig.-1-style binned adjacency counts: nodes sorted by known degree
// (train+val positives), `bins` buckets per axis, one row per
// (partition, bin_mirna, bin_disease).
std::string adjacency_heatmap_tsv(const SplitManifest& manifest, int64_t bins);

// CM^τ histograms for verified pairs vs. an equally sized random sample of
// unverified pairs; 20 value bins on [0,1] plus a NaN row per group/τ.
std::string cm_histogram_tsv(const HeteroGraph& graph, const std::vector<Pair>& verified, uint64_t seed);

}  // namespace egpmda
