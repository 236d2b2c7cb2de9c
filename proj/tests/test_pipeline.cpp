#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "tabgraph/pipeline.hpp"

#include "support.hpp"

using namespace tabgraph;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("tabgraph_test_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

/// Small synthetic pipeline config that runs in a few seconds.
PipelineConfig small_config(const fs::path& dir) {
    PipelineConfig cfg;
    const SyntheticTable s = generate_synthetic_table(3, 3, 240, 0.9, 0.3, 13);
    write_file(dir / "table.csv", table_to_csv(s.table));
    cfg.input = dir / "table.csv";
    cfg.out_dir = dir / "run";
    cfg.master_seed = 13;
    cfg.gbm.n_trees = 25;
    cfg.nsbm_restarts = 2;
    cfg.nsbm.n_sweeps = 200;
    cfg.walk.walks_per_vertex = 5;
    cfg.walk.walk_length = 30;
    cfg.sgns.epochs = 2;
    cfg.sgns.dims = 16;
    return cfg;
}

std::vector<std::string> artifact_names(const PipelineResult& r) {
    std::vector<std::string> names;
    for (const auto& [name, hash] : r.artifacts) names.push_back(name);
    return names;
}

}  // namespace

TEST_CASE("config files parse with overrides and reject junk", "[pipeline]") {
    TempDir tmp("config");
    write_file(tmp.path / "good.conf",
               "# comment\ninput = data.csv\nmaster_seed = 99\nalpha = 0.2\ncharge=0.25\n"
               "gbm_trees = 50\nnsbm_sweeps = 10\nembed_dims = 32\n");
    const PipelineConfig cfg = load_config(tmp.path / "good.conf");
    CHECK(cfg.input == fs::path("data.csv"));
    CHECK(cfg.master_seed == 99);
    CHECK(cfg.alpha == 0.2);
    CHECK(cfg.charge == 0.25);
    CHECK(cfg.gbm.n_trees == 50);
    CHECK(cfg.nsbm.n_sweeps == 10);
    CHECK(cfg.sgns.dims == 32);

    write_file(tmp.path / "bad_key.conf", "no_such_key = 1\n");
    CHECK_THROWS_AS(load_config(tmp.path / "bad_key.conf"), ConfigError);
    write_file(tmp.path / "bad_alpha.conf", "alpha = 2.0\n");
    CHECK_THROWS_AS(load_config(tmp.path / "bad_alpha.conf"), ConfigError);
    write_file(tmp.path / "bad_line.conf", "alpha 0.5\n");
    CHECK_THROWS_AS(load_config(tmp.path / "bad_line.conf"), ConfigError);
}

TEST_CASE("pipeline writes the full artifact bundle", "[pipeline]") {
    TempDir tmp("bundle");
    const PipelineConfig cfg = small_config(tmp.path);
    const PipelineResult result = run_pipeline(cfg);

    const std::vector<std::string> expected{
        "table_manifest.json", "graph.graphml", "graph.json", "build_manifest.json",
        "hits.csv",            "backbone.json", "disparity.csv", "layout.csv",
        "layout.svg",          "spectral.csv",  "torus.svg",     "partition.json",
        "hierarchy.svg",       "embeddings.csv", "run_manifest.json"};
    CHECK(artifact_names(result) == expected);
    for (const auto& name : expected) CHECK(fs::exists(cfg.out_dir / name));
    CHECK_FALSE(fs::exists(cfg.out_dir / "FAILED"));

    // artifacts validate against their schemas
    const auto manifest = nlohmann::json::parse(read_file(cfg.out_dir / "run_manifest.json"));
    CHECK(manifest.at("status") == "ok");
    CHECK(manifest.at("artifacts").size() == expected.size() - 1);
    const Digraph graph = import_graph(read_file(cfg.out_dir / "graph.json"), GraphFormat::Json);
    const Digraph graphml = import_graph(read_file(cfg.out_dir / "graph.graphml"), GraphFormat::GraphML);
    CHECK(graph == graphml);
    const auto partition = HierPartition::from_json(
        nlohmann::json::parse(read_file(cfg.out_dir / "partition.json")));
    CHECK(partition.levels.at(0).size() == graph.n());
    const auto table_manifest = nlohmann::json::parse(read_file(cfg.out_dir / "table_manifest.json"));
    CHECK(table_manifest.at("columns").size() == graph.n());

    // hub scores in the manifest-hashed CSV match the in-memory result
    CHECK(result.hits_scores.hub.size() == graph.n());
}

TEST_CASE("pipeline reruns are byte-identical", "[pipeline]") {
    TempDir tmp("repro");
    PipelineConfig cfg = small_config(tmp.path);
    const PipelineResult first = run_pipeline(cfg);
    cfg.out_dir = tmp.path / "run2";
    cfg.threads = 3;  // thread count must not affect artifact bytes
    const PipelineResult second = run_pipeline(cfg);

    REQUIRE(first.artifacts.size() == second.artifacts.size());
    for (std::size_t i = 0; i < first.artifacts.size(); ++i) {
        CHECK(first.artifacts[i].first == second.artifacts[i].first);
        CHECK(first.artifacts[i].second == second.artifacts[i].second);  // fnv1a64
        CHECK(read_file(tmp.path / "run" / first.artifacts[i].first) ==
              read_file(tmp.path / "run2" / second.artifacts[i].first));
    }
}

TEST_CASE("alpha = 1 backbone keeps the whole graph", "[pipeline]") {
    TempDir tmp("alpha1");
    PipelineConfig cfg = small_config(tmp.path);
    cfg.alpha = 1.0;
    const PipelineResult result = run_pipeline(cfg);
    const Digraph graph = import_graph(read_file(cfg.out_dir / "graph.json"), GraphFormat::Json);
    const Digraph bb = import_graph(read_file(cfg.out_dir / "backbone.json"), GraphFormat::Json);
    CHECK(bb.edge_count() == graph.edge_count());
}

TEST_CASE("refine on all vertices reproduces the analysis stages", "[pipeline]") {
    TempDir tmp("refine_all");
    const PipelineConfig cfg = small_config(tmp.path);
    const PipelineResult original = run_pipeline(cfg);

    std::vector<int> all(original.graph.n());
    std::iota(all.begin(), all.end(), 0);
    const PipelineResult refined = refine(cfg.out_dir, all, cfg, "all");

    for (const char* name : {"hits.csv", "backbone.json", "disparity.csv", "layout.csv",
                             "layout.svg", "spectral.csv", "torus.svg", "partition.json",
                             "hierarchy.svg", "embeddings.csv"}) {
        CHECK(read_file(cfg.out_dir / name) == read_file(refined.out_dir / name));
    }
}

TEST_CASE("refine restricts to a subset and nests its outputs", "[pipeline]") {
    TempDir tmp("refine_block");
    const PipelineConfig cfg = small_config(tmp.path);
    const PipelineResult original = run_pipeline(cfg);

    // refine on the union of two planted groups by name
    std::vector<int> subset;
    for (std::size_t u = 0; u < original.graph.n(); ++u) {
        const std::string& name = original.graph.name(int(u));
        if (name.rfind("g0_", 0) == 0 || name.rfind("g1_", 0) == 0) subset.push_back(int(u));
    }
    REQUIRE(subset.size() == 6);
    const PipelineResult refined = refine(cfg.out_dir, subset, cfg, "pair");
    CHECK(refined.graph.n() == 6);
    CHECK(refined.graph == induced_subgraph(original.graph, subset));
    for (const char* name : {"hits.csv", "backbone.json", "partition.json", "embeddings.csv"})
        CHECK(fs::exists(cfg.out_dir / "refine" / "pair" / name));

    std::vector<int> bogus{0, 99};
    CHECK_THROWS(refine(cfg.out_dir, bogus, cfg, "bad"));
}

TEST_CASE("refine recovers planted blocks from a prepared bundle", "[pipeline]") {
    // Bundle written directly: two 6-cliques bridged by one edge, with a
    // known level-0 partition for --group selection.
    TempDir tmp("refine_planted");
    Digraph g(12);
    std::vector<int> a, b;
    for (int i = 0; i < 6; ++i) a.push_back(i);
    for (int i = 6; i < 12; ++i) b.push_back(i);
    test_support::add_clique(g, a);
    test_support::add_clique(g, b);
    g.add_edge(0, 6, 1.0);
    const fs::path bundle = tmp.path / "bundle";
    fs::create_directories(bundle);
    write_file(bundle / "graph.json", export_graph(g, GraphFormat::Json));
    HierPartition part;
    std::vector<int> level0(12, 0);
    for (int i = 6; i < 12; ++i) level0[std::size_t(i)] = 1;
    part.levels = {level0, {0, 0}};
    part.description_length = description_length(g, part);
    write_file(bundle / "partition.json", part.to_json().dump(2) + "\n");

    PipelineConfig cfg;
    cfg.master_seed = 5;
    cfg.alpha = 1.0;  // keep the cliques intact at this tiny scale
    cfg.nsbm_restarts = 2;

    // whole-graph refinement separates the two cliques
    std::vector<int> all(12);
    std::iota(all.begin(), all.end(), 0);
    const PipelineResult whole = refine(bundle, all, cfg, "all");
    std::vector<int> truth(12, 0);
    for (int i = 6; i < 12; ++i) truth[std::size_t(i)] = 1;
    CHECK(nmi(whole.partition.levels[0], truth) == 1.0);

    // group-based refinement restricted to one clique stays one block
    const std::vector<int> members = block_members(bundle, 0);
    REQUIRE(members.size() == 6);
    const PipelineResult by_group = refine(bundle, members, cfg, "g0");
    CHECK(by_group.graph.n() == 6);
    CHECK(by_group.partition.b_per_level()[0] == 1);
    CHECK(fs::exists(bundle / "refine" / "g0" / "partition.json"));
    CHECK_THROWS_AS(block_members(bundle, 7), std::invalid_argument);
}

TEST_CASE("refine with retraining rebuilds the graph from data", "[pipeline]") {
    TempDir tmp("refine_retrain");
    const PipelineConfig cfg = small_config(tmp.path);
    const PipelineResult original = run_pipeline(cfg);

    std::vector<int> subset;
    for (std::size_t u = 0; u < original.graph.n(); ++u)
        if (original.graph.name(int(u)).rfind("g2_", 0) != 0) subset.push_back(int(u));
    const PipelineResult retrained = refine_retrain(cfg.out_dir, subset, cfg, "retrained");
    CHECK(retrained.graph.n() == subset.size());
    CHECK(fs::exists(cfg.out_dir / "refine" / "retrained" / "graph.json"));
    // retrained weights differ from the induced subgraph of the original
    const Digraph induced = induced_subgraph(original.graph, subset);
    CHECK_FALSE(retrained.graph == induced);
}

TEST_CASE("stage failures leave a FAILED marker and partial outputs", "[pipeline]") {
    TempDir tmp("failure");
    PipelineConfig cfg = small_config(tmp.path);
    cfg.input = tmp.path / "missing.csv";
    cfg.out_dir = tmp.path / "failed_run";
    CHECK_THROWS_AS(run_pipeline(cfg), StageError);
    CHECK(fs::exists(cfg.out_dir / "FAILED"));
    const std::string marker = read_file(cfg.out_dir / "FAILED");
    CHECK(marker.find("ingest") != std::string::npos);
}
