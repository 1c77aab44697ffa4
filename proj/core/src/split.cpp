#include "egpmda/split.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "egpmda/tsv.hpp"

namespace egpmda {

using ordered_json = nlohmann::ordered_json;

MdaLoadResult load_mda_records(const std::filesystem::path& path, const NodeTable& table) {
  const TsvFile file = read_tsv(path, {"mirna_id", "disease_id", "pmid", "year"});
  MdaLoadResult result;
  PairSet seen;
  for (const auto& row : file.rows) {
    const auto m = table.find(NodeType::miRNA, row[0]);
    const auto d = table.find(NodeType::disease, row[1]);
    if (!m || !d) {
      ++result.dropped_unresolved;
      continue;
    }
    if (seen.insert({*m, *d}).second) result.pairs_all.emplace_back(*m, *d);
    int32_t year = 0;
    try {
      size_t pos = 0;
      year = std::stoi(row[3], &pos);
      if (pos != row[3].size()) year = 0;
    } catch (const std::exception&) {
      year = 0;
    }
    if (year <= 0) {
      ++result.dropped_no_year;
      continue;
    }
    result.records.push_back({*m, *d, row[2], year});
  }
  return result;
}

TimeSplit split_by_time(const std::vector<MdaRecord>& records, int32_t y1, int32_t y2) {
  if (records.empty()) throw std::invalid_argument("split_by_time: no records");
  std::unordered_map<Pair, int32_t, PairHash> earliest;
  std::vector<Pair> order;  // first-seen order keeps the output deterministic
  for (const MdaRecord& r : records) {
    const Pair p{r.mirna, r.disease};
    auto [it, inserted] = earliest.emplace(p, r.year);
    if (inserted)
      order.push_back(p);
    else
      it->second = std::min(it->second, r.year);
  }
  TimeSplit split;
  for (const Pair& p : order) {
    const int32_t y = earliest.at(p);
    if (y < y1)
      split.train.push_back(p);
    else if (y <= y2)
      split.val.push_back(p);
    else
      split.test.push_back(p);
  }
  return split;
}

std::vector<Pair> sample_negatives(const PairSet& positives_all, int64_t n_mirna, int64_t n_disease, int64_t count,
                                   Rng& rng) {
  const int64_t grid = n_mirna * n_disease;
  const int64_t complement = grid - static_cast<int64_t>(positives_all.size());
  if (count < 0 || count > complement)
    throw std::invalid_argument("sample_negatives: requested " + std::to_string(count) + " from a complement of " +
                                std::to_string(complement));
  std::vector<Pair> out;
  out.reserve(static_cast<size_t>(count));
  if (count == 0) return out;

  if (count * 2 > complement) {
    // Dense request: enumerate the complement and take a partial shuffle.
    std::vector<Pair> pool;
    pool.reserve(static_cast<size_t>(complement));
    for (int32_t m = 0; m < n_mirna; ++m)
      for (int32_t d = 0; d < n_disease; ++d)
        if (!positives_all.contains({m, d})) pool.emplace_back(m, d);
    for (int64_t i = 0; i < count; ++i) {
      const auto j = static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(pool.size() - i))) + i;
      std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
      out.push_back(pool[static_cast<size_t>(i)]);
    }
    return out;
  }

  PairSet taken;
  while (static_cast<int64_t>(out.size()) < count) {
    const auto flat = static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(grid)));
    const Pair p{static_cast<int32_t>(flat / n_disease), static_cast<int32_t>(flat % n_disease)};
    if (positives_all.contains(p) || taken.contains(p)) continue;
    taken.insert(p);
    out.push_back(p);
  }
  return out;
}

std::vector<Pair> sample_negatives(const PairSet& positives_all, int64_t n_mirna, int64_t n_disease, int64_t count,
                                   uint64_t seed) {
  Rng rng(seed);
  return sample_negatives(positives_all, n_mirna, n_disease, count, rng);
}

RegionMap RegionMap::from_positives(const std::vector<Pair>& train_val_positives, int64_t n_mirna,
                                    int64_t n_disease) {
  RegionMap map;
  map.mirna_degree_.assign(static_cast<size_t>(n_mirna), 0);
  map.disease_degree_.assign(static_cast<size_t>(n_disease), 0);
  for (const Pair& p : train_val_positives) {
    map.mirna_degree_.at(static_cast<size_t>(p.first))++;
    map.disease_degree_.at(static_cast<size_t>(p.second))++;
  }
  auto median_nonzero = [](const std::vector<int32_t>& degrees) -> int32_t {
    std::vector<int32_t> nz;
    for (int32_t d : degrees)
      if (d > 0) nz.push_back(d);
    if (nz.empty()) return 0;
    std::sort(nz.begin(), nz.end());
    return nz[(nz.size() - 1) / 2];  // lower median
  };
  map.mirna_median_ = median_nonzero(map.mirna_degree_);
  map.disease_median_ = median_nonzero(map.disease_degree_);
  return map;
}

std::string RegionMap::classify(const Pair& pair) const {
  return std::string(1, mirna_band(pair.first)) + "-" + std::string(1, disease_band(pair.second));
}

std::vector<Pair> SplitManifest::verified() const {
  std::vector<Pair> out;
  out.reserve(train.pos.size() + val.pos.size() + test.pos.size());
  for (const auto* part : {&train, &val, &test}) out.insert(out.end(), part->pos.begin(), part->pos.end());
  return out;
}

PairSet SplitManifest::verified_set() const {
  PairSet set;
  for (const Pair& p : verified()) set.insert(p);
  return set;
}

namespace {

ordered_json pairs_to_json(const std::vector<Pair>& pairs) {
  ordered_json arr = ordered_json::array();
  for (const Pair& p : pairs) arr.push_back({p.first, p.second});
  return arr;
}

std::vector<Pair> pairs_from_json(const ordered_json& arr) {
  std::vector<Pair> out;
  out.reserve(arr.size());
  for (const auto& e : arr) out.emplace_back(e.at(0).get<int32_t>(), e.at(1).get<int32_t>());
  return out;
}

}  // namespace

std::string SplitManifest::to_json_string() const {
  ordered_json j;
  j["format"] = "egpmda-split";
  j["version"] = 1;
  j["seed"] = seed;
  j["boundaries"] = {{"y1", y1}, {"y2", y2}};
  j["negative_ratio_test"] = negative_ratio_test;
  j["n_mirna"] = n_mirna;
  j["n_disease"] = n_disease;
  j["dropped_no_year"] = dropped_no_year;
  j["medians"] = {{"miRNA", mirna_median}, {"disease", disease_median}};
  j["train"] = {{"pos", pairs_to_json(train.pos)}, {"neg", pairs_to_json(train.neg)}};
  j["val"] = {{"pos", pairs_to_json(val.pos)}, {"neg", pairs_to_json(val.neg)}};
  j["test"] = {{"pos", pairs_to_json(test.pos)}, {"neg", pairs_to_json(test.neg)}};
  j["test_pos_region"] = test_pos_region;
  j["test_neg_region"] = test_neg_region;
  return j.dump(2) + "\n";
}

SplitManifest SplitManifest::from_json_string(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  if (j.value("format", "") != "egpmda-split") throw std::runtime_error("not an egpmda split manifest");
  SplitManifest m;
  m.seed = j.at("seed").get<uint64_t>();
  m.y1 = j.at("boundaries").at("y1").get<int32_t>();
  m.y2 = j.at("boundaries").at("y2").get<int32_t>();
  m.negative_ratio_test = j.at("negative_ratio_test").get<int64_t>();
  m.n_mirna = j.at("n_mirna").get<int64_t>();
  m.n_disease = j.at("n_disease").get<int64_t>();
  m.dropped_no_year = j.at("dropped_no_year").get<int64_t>();
  m.mirna_median = j.at("medians").at("miRNA").get<int32_t>();
  m.disease_median = j.at("medians").at("disease").get<int32_t>();
  m.train.pos = pairs_from_json(j.at("train").at("pos"));
  m.train.neg = pairs_from_json(j.at("train").at("neg"));
  m.val.pos = pairs_from_json(j.at("val").at("pos"));
  m.val.neg = pairs_from_json(j.at("val").at("neg"));
  m.test.pos = pairs_from_json(j.at("test").at("pos"));
  m.test.neg = pairs_from_json(j.at("test").at("neg"));
  m.test_pos_region = j.at("test_pos_region").get<std::vector<std::string>>();
  m.test_neg_region = j.at("test_neg_region").get<std::vector<std::string>>();
  return m;
}

void SplitManifest::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json_string();
}

SplitManifest SplitManifest::load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_string(text);
}

SplitManifest build_manifest(const std::vector<MdaRecord>& records, int64_t n_mirna, int64_t n_disease,
                             const ManifestOptions& opts, int64_t dropped_no_year) {
  const TimeSplit split = split_by_time(records, opts.y1, opts.y2);
  SplitManifest m;
  m.seed = opts.seed;
  m.y1 = opts.y1;
  m.y2 = opts.y2;
  m.negative_ratio_test = opts.negative_ratio_test;
  m.n_mirna = n_mirna;
  m.n_disease = n_disease;
  m.dropped_no_year = dropped_no_year;
  m.train.pos = split.train;
  m.val.pos = split.val;
  m.test.pos = split.test;

  PairSet verified;
  for (const auto* part : {&split.train, &split.val, &split.test})
    for (const Pair& p : *part) verified.insert(p);

  // Negatives for the three partitions come from one seeded stream, in a
  // fixed order, and never overlap each other or any verified pair.
  Rng rng = Rng::salted(opts.seed, 0x6e656761746976ull);
  PairSet excluded = verified;
  auto draw = [&](int64_t count) {
    std::vector<Pair> sample = sample_negatives(excluded, n_mirna, n_disease, count, rng);
    for (const Pair& p : sample) excluded.insert(p);
    return sample;
  };
  m.train.neg = draw(static_cast<int64_t>(m.train.pos.size()));
  m.val.neg = draw(static_cast<int64_t>(m.val.pos.size()));
  m.test.neg = draw(static_cast<int64_t>(m.test.pos.size()) * opts.negative_ratio_test);

  std::vector<Pair> train_val;
  train_val.reserve(m.train.pos.size() + m.val.pos.size());
  train_val.insert(train_val.end(), m.train.pos.begin(), m.train.pos.end());
  train_val.insert(train_val.end(), m.val.pos.begin(), m.val.pos.end());
  const RegionMap regions = RegionMap::from_positives(train_val, n_mirna, n_disease);
  m.mirna_median = regions.mirna_median();
  m.disease_median = regions.disease_median();
  m.test_pos_region.reserve(m.test.pos.size());
  for (const Pair& p : m.test.pos) m.test_pos_region.push_back(regions.classify(p));
  m.test_neg_region.reserve(m.test.neg.size());
  for (const Pair& p : m.test.neg) m.test_neg_region.push_back(regions.classify(p));
  return m;
}

}  // namespace egpmda
