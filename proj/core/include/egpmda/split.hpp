#pragma once
// Time-based benchmark construction: earliest-year partitioning of verified
// miRNA-disease pairs, seeded negative sampling over the complement of the
// verified set, and the nine-region generalizability map.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "egpmda/graph.hpp"
#include "egpmda/rng.hpp"

namespace egpmda {

using Pair = std::pair<int32_t, int32_t>;  // (miRNA ordinal, disease ordinal)

struct MdaRecord {
  int32_t mirna = 0;
  int32_t disease = 0;
  std::string pmid;
  int32_t year = 0;
};

// Reads `mirna_id<TAB>disease_id<TAB>pmid<TAB>year`, resolving IDs against
// the node table. Unresolvable rows and rows without a positive integer year
// are dropped and counted.
struct MdaLoadResult {
  std::vector<MdaRecord> records;
  std::vector<Pair> pairs_all;  // unique resolved pairs, year-less rows included
  int64_t dropped_unresolved = 0;
  int64_t dropped_no_year = 0;
};
MdaLoadResult load_mda_records(const std::filesystem::path& path, const NodeTable& table);

struct TimeSplit {
  std::vector<Pair> train;  // earliest year < y1
  std::vector<Pair> val;    // y1 <= earliest year <= y2
  std::vector<Pair> test;   // earliest year > y2
};

// One entry per unique pair, keyed by its earliest evidence year.
TimeSplit split_by_time(const std::vector<MdaRecord>& records, int32_t y1 = 2019, int32_t y2 = 2020);

struct PairHash {
  size_t operator()(const Pair& p) const {
    return std::hash<uint64_t>()((static_cast<uint64_t>(static_cast<uint32_t>(p.first)) << 32) |
                                 static_cast<uint32_t>(p.second));
  }
};
using PairSet = std::unordered_set<Pair, PairHash>;

// Uniform sample, without replacement, from the complement of
// `positives_all` in the n_mirna×n_disease grid. Deterministic per seed.
std::vector<Pair> sample_negatives(const PairSet& positives_all, int64_t n_mirna, int64_t n_disease, int64_t count,
                                   Rng& rng);
std::vector<Pair> sample_negatives(const PairSet& positives_all, int64_t n_mirna, int64_t n_disease, int64_t count,
                                   uint64_t seed);

// Known degree = occurrences among train+val positives. Median is taken over
// nodes with degree >= 1 (lower median for even counts). Bands: 0 -> '0',
// [1, median] -> 'L', (median, inf) -> 'M'.
class RegionMap {
 public:
  static RegionMap from_positives(const std::vector<Pair>& train_val_positives, int64_t n_mirna, int64_t n_disease);

  int32_t mirna_median() const { return mirna_median_; }
  int32_t disease_median() const { return disease_median_; }
  int32_t mirna_degree(int32_t ordinal) const { return mirna_degree_.at(static_cast<size_t>(ordinal)); }
  int32_t disease_degree(int32_t ordinal) const { return disease_degree_.at(static_cast<size_t>(ordinal)); }

  char mirna_band(int32_t ordinal) const { return band(mirna_degree(ordinal), mirna_median_); }
  char disease_band(int32_t ordinal) const { return band(disease_degree(ordinal), disease_median_); }

  // Tag string, miRNA band first: e.g. "M-0".
  std::string classify(const Pair& pair) const;

 private:
  static char band(int32_t degree, int32_t median) {
    if (degree == 0) return '0';
    return degree <= median ? 'L' : 'M';
  }
  std::vector<int32_t> mirna_degree_;
  std::vector<int32_t> disease_degree_;
  int32_t mirna_median_ = 0;
  int32_t disease_median_ = 0;
};

struct SplitManifest {
  struct Partition {
    std::vector<Pair> pos;
    std::vector<Pair> neg;
  };
  Partition train, val, test;
  std::vector<std::string> test_pos_region;  // aligned with test.pos
  std::vector<std::string> test_neg_region;  // aligned with test.neg
  uint64_t seed = 0;
  int32_t y1 = 2019;
  int32_t y2 = 2020;
  int64_t negative_ratio_test = 100;
  int32_t mirna_median = 0;
  int32_t disease_median = 0;
  int64_t n_mirna = 0;
  int64_t n_disease = 0;
  int64_t dropped_no_year = 0;

  // All unique verified pairs (union of the partitions).
  std::vector<Pair> verified() const;
  PairSet verified_set() const;

  std::string to_json_string() const;
  static SplitManifest from_json_string(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static SplitManifest load_file(const std::filesystem::path& path);
};

struct ManifestOptions {
  int32_t y1 = 2019;
  int32_t y2 = 2020;
  uint64_t seed = 0;
  int64_t negative_ratio_test = 100;
};

// Splits by time, samples 1:1 negatives for train/val and ratio× negatives
// for test, and tags every test pair with its region.
SplitManifest build_manifest(const std::vector<MdaRecord>& records, int64_t n_mirna, int64_t n_disease,
                             const ManifestOptions& opts, int64_t dropped_no_year = 0);

}  // namespace egpmda
