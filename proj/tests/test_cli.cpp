#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cli.hpp"
#include "egpmda/checkpoint.hpp"
#include "egpmda/graph.hpp"
#include "egpmda/split.hpp"
#include "support/toy.hpp"

using namespace egpmda;
using cli::dispatch;
using test::TempDir;
using test::read_file;
using test::write_file;

namespace {

// TSV fixtures mirroring the documented input formats.
void write_dataset(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "nodes_mirna.tsv",
             "id\tname\taliases\n"
             "MI01\thsa-mir-1\tmiR-1|hsa-miR-1-3p\n"
             "MI02\thsa-mir-2\tmiR-2\n"
             "MI03\thsa-mir-3\t\n"
             "MI04\thsa-mir-4\tmiR-4\n"
             "MI05\thsa-mir-5\t\n"
             "MI06\thsa-mir-6\t\n");
  write_file(dir / "nodes_disease.tsv",
             "id\tname\taliases\n"
             "D01\tdisease one\tdz1\n"
             "D02\tdisease two\t\n"
             "D03\tdisease three\tdz3\n"
             "D04\tdisease four\t\n"
             "D05\tdisease five\t\n");
  write_file(dir / "nodes_pcg.tsv",
             "id\tname\taliases\n"
             "G01\tgene one\tg1\n"
             "G02\tgene two\t\n"
             "G03\tgene three\t\n"
             "G04\tgene four\t\n");
  write_file(dir / "mirna_seq.tsv",
             "id\tstem_loop\tmature_1\tmature_2\n"
             "MI01\tAUCGAUCGAUCG\tAUCGAUCG\tGCUA\n"
             "MI02\tGGGCCCAAAUUU\tGGCCAAUU\t\n"
             "MI03\tAUAUAUGCGCGC\tAUGCGC\tAU\n"
             "MI04\tCCCGGGAUAUAU\tCGGAUA\t\n"
             "MI05\tAAAUUUCCCGGG\tAUCCGG\tGG\n"
             "MI06\tGCGCAUAUGCGC\tGCAUGC\t\n");
  write_file(dir / "edges_family.tsv", "src_id\tdst_id\nMI01\tMI02\nMI03\tMI04\n");
  write_file(dir / "edges_father_son.tsv", "src_id\tdst_id\nD01\tD02\nD02\tD03\n");
  write_file(dir / "edges_group.tsv", "src_id\tdst_id\nG01\tG02\n");
  write_file(dir / "edges_mirna_pcg.tsv", "src_id\tdst_id\nMI01\tG01\nMI02\tG02\nmiR-4\tG03\nMI05\tG04\n");
  write_file(dir / "edges_pcg_disease.tsv", "src_id\tdst_id\nG01\tD01\nG02\tD02\nG03\tD04\nG04\tD05\n");
  write_file(dir / "mda.tsv",
             "mirna_id\tdisease_id\tpmid\tyear\n"
             "MI01\tD01\t111\t2015\n"
             "MI01\tD02\t112\t2016\n"
             "MI02\tD01\t113\t2017\n"
             "MI02\tD02\t114\t2018\n"
             "MI03\tD03\t115\t2017\n"
             "MI04\tD01\t116\t2019\n"
             "MI03\tD01\t117\t2020\n"
             "MI05\tD04\t118\t2021\n"
             "miR-2\tdz3\t119\t2022\n"
             "MI06\tD05\t120\t2021\n"
             "MI04\tD04\t121\t2018\n"
             "MI05\tD01\t122\t2016\n");
}

std::string s(const std::filesystem::path& p) { return p.string(); }

}  // namespace

TEST_CASE("dispatch exit codes") {
  CHECK(dispatch({"--help"}) == 0);
  CHECK(dispatch({"no-such-command"}) == 2);
  CHECK(dispatch({"split"}) == 2);                                // missing required flags
  CHECK(dispatch({"split", "--graph", "/nonexistent/graph.bin",  // runtime failure
                  "--mda", "/nonexistent/mda.tsv"}) == 1);
}

TEST_CASE("full pipeline through the CLI") {
  TempDir dir;
  const auto data = dir.file("data");
  write_dataset(data);
  const auto graph = dir.file("graph.bin");
  const auto manifest = dir.file("manifest.json");

  REQUIRE(dispatch({"build-graph", "--data", s(data), "--out", s(graph), "--d-b", "8"}) == 0);
  REQUIRE(dispatch({"split", "--graph", s(graph), "--mda", s(data / "mda.tsv"), "--seed", "7", "--ratio", "3",
                    "--out", s(manifest)}) == 0);
  REQUIRE(dispatch({"train", "--graph", s(graph), "--manifest", s(manifest), "--out", s(dir.file("run")), "--phase",
                    "select", "--epochs", "4", "--patience", "2", "--dim", "32", "--heads", "2", "--conv-k", "4",
                    "--seed", "3"}) == 0);
  const auto checkpoint = dir.file("run") / "checkpoint.bin";
  REQUIRE(std::filesystem::exists(checkpoint));
  REQUIRE(std::filesystem::exists(dir.file("run") / "history.json"));

  SUBCASE("evaluate writes report and predictions") {
    REQUIRE(dispatch({"evaluate", "--graph", s(graph), "--manifest", s(manifest), "--checkpoint", s(checkpoint),
                      "--out", s(dir.file("eval"))}) == 0);
    const std::string report = read_file(dir.file("eval") / "report.json");
    CHECK(report.find("\"balanced\"") != std::string::npos);
    const std::string predictions = read_file(dir.file("eval") / "predictions.tsv");
    CHECK(predictions.rfind("mirna_id\tdisease_id\tscore\tlabel\tregion", 0) == 0);
  }
  SUBCASE("predict ranks candidates for a disease") {
    REQUIRE(dispatch({"predict", "--graph", s(graph), "--checkpoint", s(checkpoint), "--disease", "D01", "--top",
                      "3", "--out", s(dir.file("top.tsv"))}) == 0);
    const std::string out = read_file(dir.file("top.tsv"));
    CHECK(out.rfind("mirna_id\tdisease_id\tscore", 0) == 0);
    CHECK(std::count(out.begin(), out.end(), '\n') == 4);  // header + 3 rows
  }
  SUBCASE("predict resolves aliases in pair files") {
    write_file(dir.file("pairs.tsv"), "mirna_id\tdisease_id\nmiR-1\tD01\nMI02\tdz3\n");
    REQUIRE(dispatch({"predict", "--graph", s(graph), "--checkpoint", s(checkpoint), "--pairs",
                      s(dir.file("pairs.tsv")), "--out", s(dir.file("scored.tsv"))}) == 0);
    const std::string out = read_file(dir.file("scored.tsv"));
    CHECK(out.find("MI01\tD01") != std::string::npos);
    CHECK(out.find("MI02\tD03") != std::string::npos);
  }
  SUBCASE("explain emits json and dot") {
    REQUIRE(dispatch({"explain", "--graph", s(graph), "--checkpoint", s(checkpoint), "--mirna", "hsa-miR-1-3p",
                      "--disease", "D01", "--out", s(dir.file("expl"))}) == 0);
    CHECK(read_file(dir.file("expl") / "explain.json").find("\"score\"") != std::string::npos);
    CHECK(read_file(dir.file("expl") / "explain.dot").rfind("digraph", 0) == 0);
  }
  SUBCASE("mu report across two checkpoints") {
    REQUIRE(dispatch({"explain", "--checkpoint", s(checkpoint), "--checkpoint", s(checkpoint), "--mu-report",
                      "--out", s(dir.file("mu"))}) == 0);
    CHECK(read_file(dir.file("mu") / "mu_report.json").find("\"layers\"") != std::string::npos);
  }
  SUBCASE("stats emits histograms and the heatmap") {
    REQUIRE(dispatch({"stats", "--graph", s(graph), "--mda", s(data / "mda.tsv"), "--manifest", s(manifest),
                      "--out", s(dir.file("stats")), "--bins", "3"}) == 0);
    CHECK(read_file(dir.file("stats") / "cm_hist.tsv").rfind("group\ttau\tbin", 0) == 0);
    CHECK(read_file(dir.file("stats") / "adjacency_heatmap.tsv").rfind("partition\t", 0) == 0);
  }
}

TEST_CASE("idempotence: identical inputs give byte-identical outputs") {
  TempDir dir;
  const auto data = dir.file("data");
  write_dataset(data);
  REQUIRE(dispatch({"build-graph", "--data", s(data), "--out", s(dir.file("g1.bin")), "--d-b", "8"}) == 0);
  REQUIRE(dispatch({"build-graph", "--data", s(data), "--out", s(dir.file("g2.bin")), "--d-b", "8"}) == 0);
  CHECK(read_file(dir.file("g1.bin")) == read_file(dir.file("g2.bin")));

  REQUIRE(dispatch({"split", "--graph", s(dir.file("g1.bin")), "--mda", s(data / "mda.tsv"), "--seed", "9",
                    "--ratio", "2", "--out", s(dir.file("m1.json"))}) == 0);
  REQUIRE(dispatch({"split", "--graph", s(dir.file("g2.bin")), "--mda", s(data / "mda.tsv"), "--seed", "9",
                    "--ratio", "2", "--out", s(dir.file("m2.json"))}) == 0);
  CHECK(read_file(dir.file("m1.json")) == read_file(dir.file("m2.json")));
}

TEST_CASE("run config validation and overrides") {
  TempDir dir;
  SUBCASE("config file applies and flags override it") {
    write_file(dir.file("c.json"), "{\"dim\": 32, \"heads\": 2, \"layers\": 1}\n");
    cli::RunConfig cfg;
    cfg.apply_json_file(dir.file("c.json"));
    CHECK(cfg.dim == 32);
    CHECK(cfg.heads == 2);
    CHECK(cfg.layers == 1);
  }
  SUBCASE("unknown config keys are rejected") {
    write_file(dir.file("bad.json"), "{\"dimension\": 32}\n");
    cli::RunConfig cfg;
    CHECK_THROWS_AS(cfg.apply_json_file(dir.file("bad.json")), std::runtime_error);
  }
  SUBCASE("ablation ladder is enforced") {
    cli::RunConfig cfg;
    cfg.use_intra_edges = false;  // but use_pcg stays on
    CHECK_THROWS_AS(cfg.validate(), std::runtime_error);
    cfg.use_pcg = false;
    CHECK_NOTHROW(cfg.validate());
    cfg.include_mda = true;  // requires use_pcg
    CHECK_THROWS_AS(cfg.validate(), std::runtime_error);
  }
  SUBCASE("grid bounds are enforced unless explicitly waived") {
    cli::RunConfig cfg;
    cfg.dim = 48;
    CHECK_THROWS_AS(cfg.validate(), std::runtime_error);
    cfg.allow_any_hparams = true;
    CHECK_NOTHROW(cfg.validate());
  }
}

TEST_CASE("ablation conditions through build-graph") {
  TempDir dir;
  const auto data = dir.file("data");
  write_dataset(data);

  // Condition 2: intra-class only.
  REQUIRE(dispatch({"build-graph", "--data", s(data), "--out", s(dir.file("c2.bin")), "--no-pcg", "--d-b", "8"}) == 0);
  const HeteroGraph c2 = HeteroGraph::load_file(dir.file("c2.bin"));
  CHECK(c2.has_relation({NodeType::miRNA, kinds::family, NodeType::miRNA}));
  CHECK(!c2.has_relation({NodeType::miRNA, kinds::association, NodeType::PCG}));

  // Condition 3 (default) lacks the MDA relation; condition 4 carries it.
  REQUIRE(dispatch({"build-graph", "--data", s(data), "--out", s(dir.file("c3.bin")), "--d-b", "8"}) == 0);
  REQUIRE(dispatch({"split", "--graph", s(dir.file("c3.bin")), "--mda", s(data / "mda.tsv"), "--ratio", "2", "--out",
                    s(dir.file("manifest.json"))}) == 0);
  REQUIRE(dispatch({"build-graph", "--data", s(data), "--out", s(dir.file("c4.bin")), "--include-mda", "--manifest",
                    s(dir.file("manifest.json")), "--d-b", "8"}) == 0);
  const HeteroGraph c3 = HeteroGraph::load_file(dir.file("c3.bin"));
  const HeteroGraph c4 = HeteroGraph::load_file(dir.file("c4.bin"));
  CHECK(!c3.has_relation({NodeType::miRNA, kinds::association, NodeType::disease}));
  CHECK(c4.has_relation({NodeType::miRNA, kinds::association, NodeType::disease}));

  // include-mda without a manifest is a usage error at runtime.
  CHECK(dispatch({"build-graph", "--data", s(data), "--out", s(dir.file("x.bin")), "--include-mda"}) == 1);
}
