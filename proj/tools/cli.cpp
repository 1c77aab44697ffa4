#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "egpmda/explain.hpp"
#include "egpmda/metrics.hpp"
#include "egpmda/model.hpp"
#include "egpmda/split.hpp"
#include "egpmda/trainer.hpp"
#include "egpmda/tsv.hpp"

namespace egpmda::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

void RunConfig::apply_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  const ordered_json j = ordered_json::parse(in);
  for (const auto& [key, value] : j.items()) {
    if (key == "dim") dim = value.get<int64_t>();
    else if (key == "layers") layers = value.get<int64_t>();
    else if (key == "heads") heads = value.get<int64_t>();
    else if (key == "conv_k") conv_k = value.get<int64_t>();
    else if (key == "d_b") d_b = value.get<int64_t>();
    else if (key == "use_node_features") use_node_features = value.get<bool>();
    else if (key == "use_intra_edges") use_intra_edges = value.get<bool>();
    else if (key == "use_pcg") use_pcg = value.get<bool>();
    else if (key == "include_mda") include_mda = value.get<bool>();
    else if (key == "lr") lr = value.get<double>();
    else if (key == "max_epochs") max_epochs = value.get<int64_t>();
    else if (key == "patience") patience = value.get<int64_t>();
    else if (key == "repeats") repeats = value.get<int64_t>();
    else if (key == "batch") batch = value.get<int64_t>();
    else if (key == "resample_train_negatives") resample_train_negatives = value.get<bool>();
    else if (key == "y1") y1 = value.get<int32_t>();
    else if (key == "y2") y2 = value.get<int32_t>();
    else if (key == "negative_ratio_test") negative_ratio_test = value.get<int64_t>();
    else if (key == "seed") seed = value.get<uint64_t>();
    else if (key == "threads") threads = value.get<int64_t>();
    else if (key == "allow_any_hparams") allow_any_hparams = value.get<bool>();
    else throw std::runtime_error("config " + path.string() + ": unknown key '" + key + "'");
  }
}

void RunConfig::validate() const {
  if (use_pcg && !use_intra_edges)
    throw std::runtime_error("config: use_pcg requires use_intra_edges (incremental ablation ladder)");
  if (include_mda && !use_pcg)
    throw std::runtime_error("config: include_mda requires use_pcg (incremental ablation ladder)");
  if (!allow_any_hparams) {
    const bool dim_ok = dim == 32 || dim == 64 || dim == 96 || dim == 128;
    const bool heads_ok = heads == 1 || heads == 2 || heads == 4 || heads == 8;
    const bool layers_ok = layers >= 0 && layers <= 4;
    if (!dim_ok || !heads_ok || !layers_ok)
      throw std::runtime_error(
          "config: hyperparameters outside the search grid (dim in {32,64,96,128}, heads in {1,2,4,8}, layers in "
          "0..4); pass --allow-any-hparams to override");
  }
  if (layers > 0 && dim % heads != 0) throw std::runtime_error("config: dim must be divisible by heads");
  if (conv_k <= 0 || d_b <= 0) throw std::runtime_error("config: conv_k and d_b must be positive");
  if (negative_ratio_test <= 0) throw std::runtime_error("config: negative_ratio_test must be positive");
  if (threads <= 0) throw std::runtime_error("config: threads must be positive");
}

ModelConfig RunConfig::model_config() const {
  ModelConfig mc;
  mc.dim = dim;
  mc.layers = layers;
  mc.heads = heads;
  mc.conv_k = conv_k;
  mc.d_b = d_b;
  mc.use_node_features = use_node_features;
  mc.include_mda = include_mda;
  mc.seed = seed;
  return mc;
}

namespace {

std::optional<fs::path> optional_file(const fs::path& path) {
  if (fs::exists(path)) return path;
  return std::nullopt;
}

std::vector<std::pair<int32_t, int32_t>> load_kind(const fs::path& dir, const std::string& file_kind,
                                                   NodeType src_type, NodeType dst_type, const NodeTable& table) {
  const fs::path path = dir / ("edges_" + file_kind + ".tsv");
  if (!fs::exists(path)) {
    std::cerr << "note: " << path.string() << " not found, treating as empty\n";
    return {};
  }
  const auto raw = load_edge_pairs(path);
  const ResolvedEdges resolved = resolve_edges(raw, src_type, dst_type, table);
  std::cout << "edges_" << file_kind << ": " << resolved.pairs.size() << " resolved, " << resolved.dropped
            << " dropped\n";
  return resolved.pairs;
}

int cmd_build_graph(const RunConfig& cfg, const fs::path& data_dir, const fs::path& out,
                    const std::string& manifest_path) {
  cfg.validate();
  NodeTable table;
  load_nodes_into(table, data_dir / "nodes_mirna.tsv", NodeType::miRNA);
  load_nodes_into(table, data_dir / "nodes_disease.tsv", NodeType::disease);
  load_nodes_into(table, data_dir / "nodes_pcg.tsv", NodeType::PCG);

  GraphBuildInput in;
  int64_t seq_dropped = 0;
  in.features.mirna = load_mirna_sequences(data_dir / "mirna_seq.tsv", table, &seq_dropped);
  if (seq_dropped > 0) std::cerr << "note: " << seq_dropped << " sequence rows for unknown miRNAs dropped\n";
  const TextFeatureResult disease_feat =
      build_text_features(table, NodeType::disease, optional_file(data_dir / "embeddings_disease.tsv"), cfg.d_b);
  const TextFeatureResult pcg_feat =
      build_text_features(table, NodeType::PCG, optional_file(data_dir / "embeddings_pcg.tsv"), disease_feat.d_b);
  if (disease_feat.d_b != pcg_feat.d_b)
    throw std::runtime_error("disease and PCG embedding widths disagree (" + std::to_string(disease_feat.d_b) +
                             " vs " + std::to_string(pcg_feat.d_b) + ")");
  in.features.disease = disease_feat.features;
  in.features.pcg = pcg_feat.features;
  in.features.d_b = disease_feat.d_b;

  in.use_intra_edges = cfg.use_intra_edges;
  in.use_pcg = cfg.use_pcg;
  in.include_mda = cfg.include_mda;
  if (cfg.use_intra_edges) {
    in.family = load_kind(data_dir, "family", NodeType::miRNA, NodeType::miRNA, table);
    in.father_son = load_kind(data_dir, "father_son", NodeType::disease, NodeType::disease, table);
  }
  if (cfg.use_pcg) {
    in.group = load_kind(data_dir, "group", NodeType::PCG, NodeType::PCG, table);
    in.mirna_pcg = load_kind(data_dir, "mirna_pcg", NodeType::miRNA, NodeType::PCG, table);
    in.pcg_disease = load_kind(data_dir, "pcg_disease", NodeType::PCG, NodeType::disease, table);
  }
  if (cfg.include_mda) {
    if (manifest_path.empty()) throw std::runtime_error("--include-mda requires --manifest (train+val MDA edges)");
    const SplitManifest manifest = SplitManifest::load_file(manifest_path);
    in.mirna_disease = manifest.train.pos;
    in.mirna_disease.insert(in.mirna_disease.end(), manifest.val.pos.begin(), manifest.val.pos.end());
  }
  in.nodes = std::move(table);

  const HeteroGraph graph = HeteroGraph::build(std::move(in));
  graph.save(out);
  std::cout << "graph: " << graph.count(NodeType::miRNA) << " miRNA, " << graph.count(NodeType::disease)
            << " disease, " << graph.count(NodeType::PCG) << " PCG; " << graph.relations().size() << " relations, "
            << graph.total_edge_count() << " directed edges; d_b=" << graph.features().d_b << "\n";
  std::cout << "saved " << out.string() << "\n";
  return 0;
}

int cmd_split(const fs::path& graph_path, const fs::path& mda_path, const fs::path& out, const ManifestOptions& opts) {
  const HeteroGraph graph = HeteroGraph::load_file(graph_path);
  const MdaLoadResult mda = load_mda_records(mda_path, graph.nodes());
  if (mda.dropped_unresolved > 0)
    std::cerr << "note: " << mda.dropped_unresolved << " MDA rows with unresolvable IDs dropped\n";
  if (mda.dropped_no_year > 0) std::cerr << "note: " << mda.dropped_no_year << " MDA rows without a year dropped\n";
  const SplitManifest manifest = build_manifest(mda.records, graph.count(NodeType::miRNA),
                                                graph.count(NodeType::disease), opts, mda.dropped_no_year);
  manifest.save(out);
  const auto total = static_cast<double>(manifest.train.pos.size() + manifest.val.pos.size() + manifest.test.pos.size());
  std::cout << "split: train " << manifest.train.pos.size() << " (" << 100.0 * manifest.train.pos.size() / total
            << "%), val " << manifest.val.pos.size() << " (" << 100.0 * manifest.val.pos.size() / total << "%), test "
            << manifest.test.pos.size() << " (" << 100.0 * manifest.test.pos.size() / total << "%)\n";
  std::cout << "median known degree: miRNA " << manifest.mirna_median << ", disease " << manifest.disease_median
            << "\n";
  std::cout << "saved " << out.string() << "\n";
  return 0;
}

int cmd_train(const RunConfig& cfg, const fs::path& graph_path, const fs::path& manifest_path, const fs::path& out_dir,
              TrainPhase phase) {
  cfg.validate();
  const HeteroGraph graph = HeteroGraph::load_file(graph_path);
  const SplitManifest manifest = SplitManifest::load_file(manifest_path);
  ModelConfig mc = cfg.model_config();
  TrainConfig tc;
  tc.max_epochs = cfg.max_epochs;
  tc.patience = cfg.patience;
  tc.lr = cfg.lr;
  tc.seed = cfg.seed;
  tc.repeats = cfg.repeats;
  tc.phase = phase;
  tc.batch_size = cfg.batch;
  tc.resample_train_negatives = cfg.resample_train_negatives;

  fs::create_directories(out_dir);
  if (cfg.repeats == 1) {
    const TrainResult result = train(graph, manifest, mc, tc);
    result.checkpoint.save(out_dir / "checkpoint.bin");
    result.history.save(out_dir / "history.json");
    std::cout << "trained " << result.history.epochs.size() << " epochs, best epoch " << result.history.best_epoch
              << ", stop: " << result.history.stop_reason << "\n";
    std::cout << "saved " << (out_dir / "checkpoint.bin").string() << "\n";
  } else {
    const RepeatResult result = run_repeats(graph, manifest, mc, tc);
    for (size_t i = 0; i < result.runs.size(); ++i) {
      result.runs[i].checkpoint.save(out_dir / ("checkpoint_r" + std::to_string(i) + ".bin"));
      result.runs[i].history.save(out_dir / ("history_r" + std::to_string(i) + ".json"));
    }
    result.save(out_dir / "aggregate.json");
    std::cout << "ran " << result.runs.size() << " repeats";
    if (phase == TrainPhase::select) std::cout << ", mean best val accuracy " << result.mean_best_val_accuracy;
    std::cout << "\n";
    std::cout << "saved " << (out_dir / "aggregate.json").string() << "\n";
  }
  return 0;
}

std::vector<double> score_threaded(const Model& model, const ForwardPass& fp, const std::vector<Pair>& pairs,
                                   int64_t threads) {
  if (threads <= 1 || pairs.size() < 2) return model.score_pairs_values(fp, pairs);
  const auto n_threads = static_cast<size_t>(std::min<int64_t>(threads, static_cast<int64_t>(pairs.size())));
  std::vector<double> scores(pairs.size());
  std::vector<std::thread> workers;
  const size_t chunk = (pairs.size() + n_threads - 1) / n_threads;
  for (size_t t = 0; t < n_threads; ++t) {
    const size_t lo = t * chunk;
    const size_t hi = std::min(pairs.size(), lo + chunk);
    if (lo >= hi) break;
    workers.emplace_back([&, lo, hi] {
      const std::vector<Pair> slice(pairs.begin() + static_cast<std::ptrdiff_t>(lo),
                                    pairs.begin() + static_cast<std::ptrdiff_t>(hi));
      const std::vector<double> part = model.score_pairs_values(fp, slice);
      std::copy(part.begin(), part.end(), scores.begin() + static_cast<std::ptrdiff_t>(lo));
    });
  }
  for (std::thread& w : workers) w.join();
  return scores;
}

int cmd_evaluate(const fs::path& graph_path, const fs::path& manifest_path, const fs::path& checkpoint_path,
                 const fs::path& out_dir, const std::string& partition, int64_t threads) {
  const HeteroGraph graph = HeteroGraph::load_file(graph_path);
  const SplitManifest manifest = SplitManifest::load_file(manifest_path);
  const Checkpoint checkpoint = Checkpoint::load_file(checkpoint_path);
  const Model model(graph, checkpoint);
  const ForwardPass fp = model.forward();

  const bool test = partition == "test";
  if (!test && partition != "val") throw std::runtime_error("--partition must be test or val");
  const auto& part = test ? manifest.test : manifest.val;
  if (part.pos.empty()) throw std::runtime_error("partition '" + partition + "' has no positives");

  auto score_group = [&](const std::vector<Pair>& pairs, int label,
                         const std::vector<std::string>* regions) {
    const std::vector<double> scores = score_threaded(model, fp, pairs, threads);
    std::vector<ScoredPair> out;
    out.reserve(pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i) {
      ScoredPair sp;
      sp.mirna = pairs[i].first;
      sp.disease = pairs[i].second;
      sp.score = scores[i];
      sp.label = label;
      if (regions) sp.region = (*regions)[i];
      out.push_back(std::move(sp));
    }
    return out;
  };
  const std::vector<ScoredPair> pos = score_group(part.pos, 1, test ? &manifest.test_pos_region : nullptr);
  const std::vector<ScoredPair> neg = score_group(part.neg, 0, test ? &manifest.test_neg_region : nullptr);

  const MetricsReport report = build_report(pos, neg);
  fs::create_directories(out_dir);
  report.save(out_dir / "report.json");
  std::vector<ScoredPair> all = pos;
  all.insert(all.end(), neg.begin(), neg.end());
  write_predictions(out_dir / "predictions.tsv", graph, all);
  std::cout << "balanced: auc " << report.balanced.auc << ", aupr " << report.balanced.aupr << ", acc "
            << report.balanced.threshold.accuracy << ", recall " << report.balanced.threshold.recall << "\n";
  std::cout << "imbalanced: auc " << report.imbalanced.auc << ", recall@5% " << report.imbalanced.recall_at.at(5)
            << ", recall@10% " << report.imbalanced.recall_at.at(10) << "\n";
  std::cout << "saved " << (out_dir / "report.json").string() << "\n";
  return 0;
}

int32_t resolve_id(const NodeTable& table, NodeType type, const std::string& symbol) {
  if (auto found = table.find(type, symbol)) return *found;
  std::string msg = "unknown " + std::string(to_string(type)) + " '" + symbol + "'";
  const auto near = table.near_misses(type, symbol);
  if (!near.empty()) {
    msg += "; close matches:";
    for (const std::string& n : near) msg += " " + n;
  }
  throw std::runtime_error(msg);
}

int cmd_predict(const fs::path& graph_path, const fs::path& checkpoint_path, const std::string& mirna,
                const std::string& disease, const fs::path& pairs_file, int64_t top, const std::string& out_path,
                int64_t threads) {
  const HeteroGraph graph = HeteroGraph::load_file(graph_path);
  const Checkpoint checkpoint = Checkpoint::load_file(checkpoint_path);
  const Model model(graph, checkpoint);

  std::vector<Pair> pairs;
  bool ranked = false;
  if (!pairs_file.empty()) {
    const TsvFile file = read_tsv(pairs_file, {"mirna_id", "disease_id"});
    for (const auto& row : file.rows)
      pairs.emplace_back(resolve_id(graph.nodes(), NodeType::miRNA, row[0]),
                         resolve_id(graph.nodes(), NodeType::disease, row[1]));
  } else if (!mirna.empty() && !disease.empty()) {
    pairs.emplace_back(resolve_id(graph.nodes(), NodeType::miRNA, mirna),
                       resolve_id(graph.nodes(), NodeType::disease, disease));
  } else if (!disease.empty()) {
    const int32_t d = resolve_id(graph.nodes(), NodeType::disease, disease);
    for (int32_t m = 0; m < graph.count(NodeType::miRNA); ++m) pairs.emplace_back(m, d);
    ranked = true;
  } else if (!mirna.empty()) {
    const int32_t m = resolve_id(graph.nodes(), NodeType::miRNA, mirna);
    for (int32_t d = 0; d < graph.count(NodeType::disease); ++d) pairs.emplace_back(m, d);
    ranked = true;
  } else {
    throw std::runtime_error("predict needs --pairs, --mirna/--disease, or one of --mirna/--disease to rank against");
  }

  const ForwardPass fp = model.forward();
  const std::vector<double> scores = score_threaded(model, fp, pairs, threads);

  std::vector<size_t> order(pairs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (ranked) {
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return pairs[a] < pairs[b];
    });
    if (top > 0 && static_cast<size_t>(top) < order.size()) order.resize(static_cast<size_t>(top));
  }

  std::ostream* out = &std::cout;
  std::ofstream file_out;
  if (!out_path.empty()) {
    file_out.open(out_path, std::ios::binary);
    if (!file_out) throw std::runtime_error("cannot write " + out_path);
    out = &file_out;
  }
  (*out) << "mirna_id\tdisease_id\tscore\n";
  char buf[64];
  for (size_t i : order) {
    std::snprintf(buf, sizeof(buf), "%.6f", scores[i]);
    (*out) << graph.nodes().entry(NodeType::miRNA, pairs[i].first).id << '\t'
           << graph.nodes().entry(NodeType::disease, pairs[i].second).id << '\t' << buf << '\n';
  }
  if (!out_path.empty()) std::cout << "saved " << out_path << "\n";
  return 0;
}

int cmd_explain(const fs::path& graph_path, const std::vector<std::string>& checkpoint_paths, const std::string& mirna,
                const std::string& disease, const fs::path& out_dir, bool mu_report) {
  fs::create_directories(out_dir);
  if (mu_report) {
    std::vector<Checkpoint> checkpoints;
    checkpoints.reserve(checkpoint_paths.size());
    for (const std::string& p : checkpoint_paths) checkpoints.push_back(Checkpoint::load_file(p));
    const MuReport report = mu_hierarchy(checkpoints);
    report.save(out_dir / "mu_report.json");
    std::cout << "saved " << (out_dir / "mu_report.json").string() << "\n";
    return 0;
  }
  if (checkpoint_paths.size() != 1) throw std::runtime_error("explain needs exactly one --checkpoint");
  if (mirna.empty() || disease.empty()) throw std::runtime_error("explain needs --mirna and --disease");
  const HeteroGraph graph = HeteroGraph::load_file(graph_path);
  const Checkpoint checkpoint = Checkpoint::load_file(checkpoint_paths[0]);
  const Model model(graph, checkpoint);
  const ExplanationSubgraph sub = explain_pair(model, graph, mirna, disease);
  sub.save(out_dir / "explain.json", "json");
  sub.save(out_dir / "explain.dot", "dot");
  std::cout << "pair " << sub.mirna_id << " - " << sub.disease_id << ": score " << sub.score << ", "
            << sub.nodes.size() << " nodes / " << sub.edges.size() << " edges in the " << sub.hops
            << "-hop neighborhood\n";
  std::cout << "saved " << (out_dir / "explain.json").string() << " and explain.dot\n";
  return 0;
}

int cmd_stats(const fs::path& graph_path, const fs::path& mda_path, const std::string& manifest_path,
              const fs::path& out_dir, uint64_t seed, int64_t bins) {
  const HeteroGraph graph = HeteroGraph::load_file(graph_path);
  const MdaLoadResult mda = load_mda_records(mda_path, graph.nodes());
  fs::create_directories(out_dir);
  {
    std::ofstream out(out_dir / "cm_hist.tsv", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write cm_hist.tsv");
    out << cm_histogram_tsv(graph, mda.pairs_all, seed);
  }
  std::cout << "saved " << (out_dir / "cm_hist.tsv").string() << "\n";
  if (!manifest_path.empty()) {
    const SplitManifest manifest = SplitManifest::load_file(manifest_path);
    std::ofstream out(out_dir / "adjacency_heatmap.tsv", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write adjacency_heatmap.tsv");
    out << adjacency_heatmap_tsv(manifest, bins);
    std::cout << "saved " << (out_dir / "adjacency_heatmap.tsv").string() << "\n";
  }
  return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args);
}

int dispatch(const std::vector<std::string>& args) {
  RunConfig cfg;
  // The config file applies first; explicit flags override it below.
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      cfg.apply_json_file(args[i + 1]);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      cfg.apply_json_file(args[i].substr(9));
      break;
    }
  }

  CLI::App app{"heterogeneous miRNA-PCG-disease link-prediction engine"};
  app.require_subcommand(1);
  std::string config_path;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file (applied before flag overrides)");
    cmd->add_option("--seed", cfg.seed, "random seed");
    cmd->add_option("--threads", cfg.threads, "worker threads for pair scoring");
    cmd->add_flag("--allow-any-hparams", cfg.allow_any_hparams, "skip the hyperparameter-grid check");
  };
  auto add_model_flags = [&](CLI::App* cmd) {
    cmd->add_option("--dim", cfg.dim, "hidden dimension");
    cmd->add_option("--layers", cfg.layers, "HGT layer count (0 = encoder only)");
    cmd->add_option("--heads", cfg.heads, "attention heads");
    cmd->add_option("--conv-k", cfg.conv_k, "sequence convolution kernel height");
    cmd->add_option("--d-b", cfg.d_b, "text-embedding half width");
    cmd->add_flag_callback("--no-node-features", [&] { cfg.use_node_features = false; },
                           "replace node features with seeded random vectors (ablation condition 0)");
  };

  // build-graph
  auto* build = app.add_subcommand("build-graph", "assemble the typed graph bundle from TSV tables");
  std::string data_dir, graph_out = "graph.bin", manifest_opt;
  build->add_option("--data", data_dir, "directory with nodes_*.tsv / edges_*.tsv / mirna_seq.tsv")->required();
  build->add_option("--out", graph_out, "output bundle path");
  build->add_option("--manifest", manifest_opt, "split manifest (train+val MDA edges, with --include-mda)");
  build->add_flag_callback("--no-intra", [&] { cfg.use_intra_edges = false; }, "drop family/father-son edges");
  build->add_flag_callback("--no-pcg", [&] { cfg.use_pcg = false; }, "drop PCG edges");
  build->add_flag("--include-mda", cfg.include_mda, "add train+val MDA edges (ablation condition 4)");
  build->add_option("--d-b", cfg.d_b, "hashed text-embedding half width (ignored when embeddings_*.tsv exist)");
  add_common(build);

  // split
  auto* split = app.add_subcommand("split", "time-based benchmark manifest from mda.tsv");
  std::string split_graph, split_mda, split_out = "manifest.json";
  split->add_option("--graph", split_graph, "graph bundle")->required();
  split->add_option("--mda", split_mda, "mda.tsv")->required();
  split->add_option("--out", split_out, "output manifest path");
  split->add_option("--y1", cfg.y1, "train/val boundary year");
  split->add_option("--y2", cfg.y2, "val/test boundary year");
  split->add_option("--ratio", cfg.negative_ratio_test, "test negatives per positive");
  add_common(split);

  // train
  auto* train_cmd = app.add_subcommand("train", "optimize a model on the benchmark");
  std::string train_graph, train_manifest, train_out = "run", phase_name = "select";
  train_cmd->add_option("--graph", train_graph, "graph bundle")->required();
  train_cmd->add_option("--manifest", train_manifest, "split manifest")->required();
  train_cmd->add_option("--out", train_out, "output directory");
  train_cmd->add_option("--phase", phase_name, "select | final");
  train_cmd->add_option("--lr", cfg.lr, "Adam learning rate");
  train_cmd->add_option("--epochs", cfg.max_epochs, "maximum epochs");
  train_cmd->add_option("--patience", cfg.patience, "early-stopping patience");
  train_cmd->add_option("--repeats", cfg.repeats, "independent repeats (seeds seed+0..)");
  train_cmd->add_option("--batch", cfg.batch, "mini-batch size (0 = full batch)");
  train_cmd->add_flag_callback("--fixed-negatives", [&] { cfg.resample_train_negatives = false; },
                               "use the manifest's train negatives instead of per-epoch resampling");
  add_model_flags(train_cmd);
  add_common(train_cmd);

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "score a partition and emit report.json/predictions.tsv");
  std::string eval_graph, eval_manifest, eval_checkpoint, eval_out = "eval", eval_partition = "test";
  eval_cmd->add_option("--graph", eval_graph, "graph bundle")->required();
  eval_cmd->add_option("--manifest", eval_manifest, "split manifest")->required();
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "trained checkpoint")->required();
  eval_cmd->add_option("--out", eval_out, "output directory");
  eval_cmd->add_option("--partition", eval_partition, "test | val");
  add_common(eval_cmd);

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "score ID pairs or rank candidates for one node");
  std::string pred_graph, pred_checkpoint, pred_mirna, pred_disease, pred_pairs, pred_out;
  int64_t pred_top = 0;
  predict_cmd->add_option("--graph", pred_graph, "graph bundle")->required();
  predict_cmd->add_option("--checkpoint", pred_checkpoint, "trained checkpoint")->required();
  predict_cmd->add_option("--mirna", pred_mirna, "miRNA ID or alias");
  predict_cmd->add_option("--disease", pred_disease, "disease ID or alias");
  predict_cmd->add_option("--pairs", pred_pairs, "TSV of mirna_id/disease_id pairs to score");
  predict_cmd->add_option("--top", pred_top, "keep only the K best-ranked rows");
  predict_cmd->add_option("--out", pred_out, "output TSV (default stdout)");
  add_common(predict_cmd);

  // explain
  auto* explain_cmd = app.add_subcommand("explain", "per-pair attention subgraph or mu hierarchy report");
  std::string exp_graph, exp_mirna, exp_disease, exp_out = "explain";
  std::vector<std::string> exp_checkpoints;
  bool exp_mu = false;
  explain_cmd->add_option("--graph", exp_graph, "graph bundle");
  explain_cmd->add_option("--checkpoint", exp_checkpoints, "trained checkpoint (repeatable for --mu-report)")
      ->required();
  explain_cmd->add_option("--mirna", exp_mirna, "miRNA ID or alias");
  explain_cmd->add_option("--disease", exp_disease, "disease ID or alias");
  explain_cmd->add_option("--out", exp_out, "output directory");
  explain_cmd->add_flag("--mu-report", exp_mu, "emit the per-relation mu hierarchy across checkpoints");
  add_common(explain_cmd);

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "common-neighbor histograms and adjacency heatmap bins");
  std::string stats_graph, stats_mda, stats_manifest, stats_out = "stats";
  int64_t stats_bins = 50;
  stats_cmd->add_option("--graph", stats_graph, "graph bundle")->required();
  stats_cmd->add_option("--mda", stats_mda, "mda.tsv (all MDAs, treated as momentary edges)")->required();
  stats_cmd->add_option("--manifest", stats_manifest, "split manifest (enables the adjacency heatmap)");
  stats_cmd->add_option("--out", stats_out, "output directory");
  stats_cmd->add_option("--bins", stats_bins, "heatmap bins per axis");
  add_common(stats_cmd);

  std::vector<const char*> argv_c;
  argv_c.push_back("egpmda");
  for (const std::string& a : args) argv_c.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv_c.size()), argv_c.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (build->parsed()) return cmd_build_graph(cfg, data_dir, graph_out, manifest_opt);
    if (split->parsed()) {
      ManifestOptions opts;
      opts.y1 = cfg.y1;
      opts.y2 = cfg.y2;
      opts.seed = cfg.seed;
      opts.negative_ratio_test = cfg.negative_ratio_test;
      return cmd_split(split_graph, split_mda, split_out, opts);
    }
    if (train_cmd->parsed()) {
      const auto phase = train_phase_from(phase_name);
      if (!phase) throw std::runtime_error("--phase must be select or final");
      return cmd_train(cfg, train_graph, train_manifest, train_out, *phase);
    }
    if (eval_cmd->parsed())
      return cmd_evaluate(eval_graph, eval_manifest, eval_checkpoint, eval_out, eval_partition, cfg.threads);
    if (predict_cmd->parsed())
      return cmd_predict(pred_graph, pred_checkpoint, pred_mirna, pred_disease, pred_pairs, pred_top, pred_out,
                         cfg.threads);
    if (explain_cmd->parsed()) return cmd_explain(exp_graph, exp_checkpoints, exp_mirna, exp_disease, exp_out, exp_mu);
    if (stats_cmd->parsed()) return cmd_stats(stats_graph, stats_mda, stats_manifest, stats_out, cfg.seed, stats_bins);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace egpmda::cli
