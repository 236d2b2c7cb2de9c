#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tabgraph/centrality.hpp"
#include "tabgraph/communities.hpp"
#include "tabgraph/csv.hpp"
#include "tabgraph/embed.hpp"
#include "tabgraph/graph_io.hpp"
#include "tabgraph/interp_graph.hpp"
#include "tabgraph/layout.hpp"
#include "tabgraph/sparsify.hpp"
#include "tabgraph/spectral.hpp"
#include "tabgraph/svg.hpp"
#include "tabgraph/table.hpp"
#include "tabgraph/util.hpp"

#include <nlohmann/json.hpp>

namespace tabgraph {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StageError : std::runtime_error {
    StageError(const std::string& stage_, const std::string& msg)
        : std::runtime_error("stage '" + stage_ + "' failed: " + msg), stage(stage_) {}
    std::string stage;
};

struct PipelineConfig {
    std::filesystem::path input;
    std::filesystem::path out_dir;
    std::uint64_t master_seed = 7;
    bool header = true;
    EncodeOptions encode_opts;
    GbmParams gbm;
    double alpha = 0.1;
    double charge = 0.1;
    NsbmParams nsbm;
    int nsbm_restarts = 3;
    WalkParams walk;
    SgnsParams sgns;
    bool embed_symmetrize = false;
    int threads = 1;
};

inline void validate_config(const PipelineConfig& cfg) {
    if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw ConfigError("config: alpha must be in (0, 1]");
    if (!(cfg.charge >= 0.0 && cfg.charge <= 1.0)) throw ConfigError("config: charge must be in [0, 1]");
    if (cfg.threads < 1) throw ConfigError("config: threads must be >= 1");
    if (cfg.nsbm_restarts < 1) throw ConfigError("config: nsbm_restarts must be >= 1");
}

/// Applies one key/value setting; unknown keys are config errors.
inline void apply_config_line(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    auto as_double = [&](const std::string& v) {
        double d;
        if (!parse_double(v, d)) throw ConfigError("config: bad number for '" + key + "': " + v);
        return d;
    };
    auto as_int = [&](const std::string& v) { return int(as_double(v)); };
    auto as_bool = [&](const std::string& v) {
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        throw ConfigError("config: bad bool for '" + key + "': " + v);
    };

    if (key == "input") cfg.input = value;
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "master_seed") cfg.master_seed = std::uint64_t(as_double(value));
    else if (key == "header") cfg.header = as_bool(value);
    else if (key == "categorical_max_cardinality") cfg.encode_opts.categorical_max_cardinality = as_int(value);
    else if (key == "missing_policy") {
        if (value == "drop_row") cfg.encode_opts.missing = MissingPolicy::DropRow;
        else if (value == "error") cfg.encode_opts.missing = MissingPolicy::Error;
        else throw ConfigError("config: missing_policy must be drop_row or error");
    }
    else if (key == "gbm_trees") cfg.gbm.n_trees = as_int(value);
    else if (key == "gbm_depth") cfg.gbm.max_depth = as_int(value);
    else if (key == "gbm_learning_rate") cfg.gbm.learning_rate = as_double(value);
    else if (key == "gbm_min_child_cover") cfg.gbm.min_child_cover = as_double(value);
    else if (key == "gbm_holdout") cfg.gbm.holdout_fraction = as_double(value);
    else if (key == "alpha") cfg.alpha = as_double(value);
    else if (key == "charge") cfg.charge = as_double(value);
    else if (key == "nsbm_sweeps") cfg.nsbm.n_sweeps = as_int(value);
    else if (key == "nsbm_agglom_factor") cfg.nsbm.agglomeration_factor = as_int(value);
    else if (key == "nsbm_patience") cfg.nsbm.patience = as_int(value);
    else if (key == "nsbm_restarts") cfg.nsbm_restarts = as_int(value);
    else if (key == "walk_length") cfg.walk.walk_length = as_int(value);
    else if (key == "walks_per_vertex") cfg.walk.walks_per_vertex = as_int(value);
    else if (key == "walk_p") cfg.walk.p = as_double(value);
    else if (key == "walk_q") cfg.walk.q_walk = as_double(value);
    else if (key == "embed_dims") cfg.sgns.dims = as_int(value);
    else if (key == "embed_window") cfg.sgns.window = as_int(value);
    else if (key == "embed_negative") cfg.sgns.negative = as_int(value);
    else if (key == "embed_epochs") cfg.sgns.epochs = as_int(value);
    else if (key == "embed_lr") cfg.sgns.lr = as_double(value);
    else if (key == "embed_symmetrize") cfg.embed_symmetrize = as_bool(value);
    else if (key == "threads") cfg.threads = as_int(value);
    else throw ConfigError("config: unknown key '" + key + "'");
}

/// Plain text config: key = value lines, '#' comments.
inline PipelineConfig load_config(const std::filesystem::path& path) {
    PipelineConfig cfg;
    const std::string text = read_file(path);
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size() || (start == 0 && text.empty())) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto l = line.find_first_not_of(" \t\r");
        if (l == std::string::npos) {
            if (end == text.size()) break;
            continue;
        }
        const auto r = line.find_last_not_of(" \t\r");
        line = line.substr(l, r - l + 1);
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(line_no) + " is not key = value");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            if (a == std::string::npos) return std::string();
            const auto b = s.find_last_not_of(" \t");
            return s.substr(a, b - a + 1);
        };
        apply_config_line(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        if (end == text.size()) break;
    }
    validate_config(cfg);
    return cfg;
}

/// Config as recorded in the run manifest. Output paths and the thread count
/// are excluded: neither may influence artifact bytes.
inline nlohmann::json config_echo(const PipelineConfig& cfg) {
    return nlohmann::json{
        {"input", cfg.input.filename().string()},
        {"master_seed", cfg.master_seed},
        {"header", cfg.header},
        {"alpha", cfg.alpha},
        {"charge", cfg.charge},
        {"encode",
         {{"categorical_max_cardinality", cfg.encode_opts.categorical_max_cardinality},
          {"missing_policy", cfg.encode_opts.missing == MissingPolicy::DropRow ? "drop_row" : "error"}}},
        {"gbm",
         {{"n_trees", cfg.gbm.n_trees},
          {"max_depth", cfg.gbm.max_depth},
          {"learning_rate", cfg.gbm.learning_rate},
          {"min_child_cover", cfg.gbm.min_child_cover},
          {"holdout_fraction", cfg.gbm.holdout_fraction}}},
        {"nsbm",
         {{"n_sweeps", cfg.nsbm.n_sweeps},
          {"agglomeration_factor", cfg.nsbm.agglomeration_factor},
          {"patience", cfg.nsbm.patience},
          {"restarts", cfg.nsbm_restarts}}},
        {"walk",
         {{"walk_length", cfg.walk.walk_length},
          {"walks_per_vertex", cfg.walk.walks_per_vertex},
          {"p", cfg.walk.p},
          {"q_walk", cfg.walk.q_walk}}},
        {"sgns",
         {{"dims", cfg.sgns.dims},
          {"window", cfg.sgns.window},
          {"negative", cfg.sgns.negative},
          {"epochs", cfg.sgns.epochs},
          {"lr", cfg.sgns.lr}}},
        {"embed_symmetrize", cfg.embed_symmetrize}};
}

// Stage seed salts.
inline constexpr std::uint64_t kSeedNsbm = 0x5b3a0001;
inline constexpr std::uint64_t kSeedWalks = 0x77a1c5;
inline constexpr std::uint64_t kSeedSgns = 0x53c7a9;
inline constexpr std::uint64_t kSeedLayout = 0xf0aa11;

struct PipelineResult {
    std::filesystem::path out_dir;
    EncodeResult encoded;
    Digraph graph;
    Digraph backbone_graph;
    HitsScores hits_scores;
    TorusEmbedding torus;
    HierPartition partition;
    EmbeddingTable embeddings;
    std::vector<std::pair<std::string, std::string>> artifacts;  // (name, fnv1a64 hex)
};

namespace detail {

class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }
    void write(const std::string& name, const std::string& content) {
        write_file(dir_ / name, content);
        hashes_.emplace_back(name, to_hex(fnv1a64(content)));
    }
    const std::vector<std::pair<std::string, std::string>>& hashes() const { return hashes_; }
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::vector<std::pair<std::string, std::string>> hashes_;
};

/// Best-DL nSBM over several restarts; ties resolve to the earliest seed.
inline HierPartition best_nsbm(const Digraph& g, std::uint64_t master_seed, const NsbmParams& params,
                               int restarts) {
    std::optional<HierPartition> best;
    for (int i = 0; i < restarts; ++i) {
        HierPartition part = infer_nsbm(g, derive_seed(master_seed, kSeedNsbm + std::uint64_t(i)), params);
        if (!best || part.description_length < best->description_length - 1e-12)
            best = std::move(part);
    }
    return *best;
}

/// Analysis stages shared by pipeline and refine: disparity backbone (+
/// force-directed view), magnetic torus embedding, nSBM hierarchy on the
/// backbone, node2vec embeddings.
inline void run_analysis_stages(const PipelineConfig& cfg, const Digraph& graph,
                                ArtifactWriter& writer, PipelineResult& result) {
    std::string stage = "filter";
    try {
        result.backbone_graph = backbone(graph, cfg.alpha);
        writer.write("backbone.json", export_graph(result.backbone_graph, GraphFormat::Json));
        writer.write("disparity.csv", disparity_csv(graph));
    } catch (const std::exception& ex) {
        throw StageError(stage, ex.what());
    }

    stage = "layout";
    try {
        const auto pos = fr_layout(result.backbone_graph, 500, derive_seed(cfg.master_seed, kSeedLayout));
        std::string csv = "vertex,x,y\n";
        for (std::size_t u = 0; u < result.backbone_graph.n(); ++u)
            csv += csv_escape(result.backbone_graph.name(int(u))) + ',' + fmt_double(pos[u][0]) + ',' +
                   fmt_double(pos[u][1]) + '\n';
        writer.write("layout.csv", csv);
        writer.write("layout.svg", svg_graph_layout(result.backbone_graph, pos));
    } catch (const std::exception& ex) {
        throw StageError(stage, ex.what());
    }

    stage = "spectral";
    try {
        result.torus = torus_embedding(graph, cfg.charge, result.hits_scores.hub);
        writer.write("spectral.csv", spectral_csv(graph, result.torus));
        writer.write("torus.svg", svg_torus(graph, result.torus));
    } catch (const std::exception& ex) {
        throw StageError(stage, ex.what());
    }

    stage = "communities";
    try {
        result.partition = best_nsbm(result.backbone_graph, cfg.master_seed, cfg.nsbm, cfg.nsbm_restarts);
        writer.write("partition.json", result.partition.to_json().dump(2) + "\n");
        writer.write("hierarchy.svg", svg_radial_hierarchy(result.backbone_graph, result.partition));
    } catch (const std::exception& ex) {
        throw StageError(stage, ex.what());
    }

    stage = "embed";
    try {
        const Digraph sym = cfg.embed_symmetrize ? symmetrized(graph) : Digraph();
        const Digraph& source = cfg.embed_symmetrize ? sym : graph;
        const WalkCorpus corpus = generate_walks(source, cfg.walk, derive_seed(cfg.master_seed, kSeedWalks));
        result.embeddings = train_embeddings(corpus, cfg.sgns, derive_seed(cfg.master_seed, kSeedSgns));
        writer.write("embeddings.csv", embeddings_csv(graph, result.embeddings));
    } catch (const std::exception& ex) {
        throw StageError(stage, ex.what());
    }
}

inline void write_run_manifest(const PipelineConfig& cfg, ArtifactWriter& writer,
                               PipelineResult& result, const std::string& status) {
    nlohmann::json files = nlohmann::json::array();
    for (const auto& [name, hash] : writer.hashes())
        files.push_back({{"file", name}, {"fnv1a64", hash}});
    nlohmann::json manifest{{"version", std::string(kVersion)},
                            {"status", status},
                            {"config", config_echo(cfg)},
                            {"master_seed", cfg.master_seed},
                            {"artifacts", files}};
    const std::string text = manifest.dump(2) + "\n";
    write_file(writer.dir() / "run_manifest.json", text);
    result.artifacts = writer.hashes();
    result.artifacts.emplace_back("run_manifest.json", to_hex(fnv1a64(text)));
}

/// Graph construction + every analysis stage over an already encoded table.
inline PipelineResult run_pipeline_on_table(const PipelineConfig& cfg, EncodeResult encoded,
                                            ArtifactWriter& writer) {
    PipelineResult result;
    result.out_dir = writer.dir();
    result.encoded = std::move(encoded);
    try {
        writer.write("table_manifest.json",
                     table_manifest(result.encoded, cfg.encode_opts).dump(2) + "\n");

        std::string stage = "build-graph";
        try {
            InterpBuild build =
                build_global_graph(result.encoded.table, cfg.gbm, cfg.master_seed, cfg.threads);
            result.graph = build.graph;
            writer.write("graph.graphml", export_graph(result.graph, GraphFormat::GraphML));
            writer.write("graph.json", export_graph(result.graph, GraphFormat::Json));
            writer.write("build_manifest.json", build_manifest(build).dump(2) + "\n");
        } catch (const std::exception& ex) {
            throw StageError(stage, ex.what());
        }

        stage = "hits";
        try {
            result.hits_scores = hits(result.graph);
            writer.write("hits.csv", hits_csv(result.graph, result.hits_scores));
        } catch (const std::exception& ex) {
            throw StageError(stage, ex.what());
        }

        run_analysis_stages(cfg, result.graph, writer, result);
        write_run_manifest(cfg, writer, result, "ok");
        return result;
    } catch (const StageError& ex) {
        write_file(writer.dir() / "FAILED", std::string(ex.what()) + "\n");
        write_run_manifest(cfg, writer, result, std::string("failed: ") + ex.what());
        throw;
    }
}

}  // namespace detail

/// Runs the full flow — ingest, per-column models, global graph, HITS,
/// disparity backbone, magnetic torus embedding, nSBM hierarchy, node2vec
/// embeddings — writing each artifact plus a hashed run manifest. On stage
/// failure, partial outputs stay on disk next to a FAILED marker.
inline PipelineResult run_pipeline(const PipelineConfig& cfg) {
    validate_config(cfg);
    if (cfg.out_dir.empty()) throw ConfigError("config: out_dir is required");
    if (cfg.input.empty()) throw ConfigError("config: input is required");

    detail::ArtifactWriter writer(cfg.out_dir);
    EncodeResult encoded;
    try {
        const RawTable raw = load_csv(cfg.input, cfg.header);
        encoded = encode(raw, cfg.encode_opts);
    } catch (const std::exception& ex) {
        const StageError err("ingest", ex.what());
        write_file(cfg.out_dir / "FAILED", std::string(err.what()) + "\n");
        throw err;
    }
    return detail::run_pipeline_on_table(cfg, std::move(encoded), writer);
}

/// Re-runs the analysis stages on the induced subgraph of an existing bundle
/// (edge weights are reused, not recomputed). Outputs nest under
/// <bundle>/refine/<tag>/.
inline PipelineResult refine(const std::filesystem::path& bundle_dir, const std::vector<int>& vertices,
                             const PipelineConfig& overrides, const std::string& tag) {
    const Digraph full = import_graph(read_file(bundle_dir / "graph.json"), GraphFormat::Json);
    const Digraph sub = induced_subgraph(full, vertices);

    PipelineConfig cfg = overrides;
    cfg.out_dir = bundle_dir / "refine" / tag;
    detail::ArtifactWriter writer(cfg.out_dir);
    PipelineResult result;
    result.out_dir = cfg.out_dir;
    result.graph = sub;
    try {
        try {
            result.hits_scores = hits(sub);
            writer.write("hits.csv", hits_csv(sub, result.hits_scores));
        } catch (const std::exception& ex) {
            throw StageError("hits", ex.what());
        }
        detail::run_analysis_stages(cfg, sub, writer, result);
        detail::write_run_manifest(cfg, writer, result, "ok");
        return result;
    } catch (const StageError& ex) {
        write_file(cfg.out_dir / "FAILED", std::string(ex.what()) + "\n");
        detail::write_run_manifest(cfg, writer, result, std::string("failed: ") + ex.what());
        throw;
    }
}

/// Refinement with retraining: edge weights are recomputed from scratch on
/// the restricted column set; the full pipeline runs on the sub-table.
inline PipelineResult refine_retrain(const std::filesystem::path& bundle_dir,
                                     const std::vector<int>& vertices, const PipelineConfig& overrides,
                                     const std::string& tag) {
    if (overrides.input.empty()) throw ConfigError("refine --retrain requires the original input");
    const Digraph full = import_graph(read_file(bundle_dir / "graph.json"), GraphFormat::Json);

    const RawTable raw = load_csv(overrides.input, overrides.header);
    EncodeResult encoded = encode(raw, overrides.encode_opts);

    // Restrict to the columns named by the selected vertices.
    std::vector<std::size_t> keep;
    for (const int u : vertices) {
        if (u < 0 || std::size_t(u) >= full.n())
            throw std::out_of_range("refine: vertex index " + std::to_string(u));
        const std::string& name = full.name(u);
        bool found = false;
        for (std::size_t c = 0; c < encoded.table.n_cols(); ++c) {
            if (encoded.table.specs[c].name == name) {
                keep.push_back(c);
                found = true;
                break;
            }
        }
        if (!found) throw std::runtime_error("refine: column '" + name + "' not present in input");
    }
    EncodeResult sub;
    sub.warnings = encoded.warnings;
    sub.table.n_rows = encoded.table.n_rows;
    for (std::size_t i = 0; i < keep.size(); ++i) {
        ColumnSpec spec = encoded.table.specs[keep[i]];
        spec.index = int(i);
        sub.table.specs.push_back(std::move(spec));
    }
    sub.table.values.resize(sub.table.n_rows * keep.size());
    for (std::size_t r = 0; r < sub.table.n_rows; ++r)
        for (std::size_t i = 0; i < keep.size(); ++i)
            sub.table.values[r * keep.size() + i] = encoded.table.at(r, keep[i]);

    PipelineConfig cfg = overrides;
    cfg.out_dir = bundle_dir / "refine" / tag;
    detail::ArtifactWriter writer(cfg.out_dir);
    return detail::run_pipeline_on_table(cfg, std::move(sub), writer);
}

/// Vertex subset of a level-0 block from a bundle's partition.json.
inline std::vector<int> block_members(const std::filesystem::path& bundle_dir, int block_id) {
    const HierPartition part =
        HierPartition::from_json(nlohmann::json::parse(read_file(bundle_dir / "partition.json")));
    std::vector<int> members;
    for (std::size_t u = 0; u < part.levels.at(0).size(); ++u)
        if (part.levels[0][u] == block_id) members.push_back(int(u));
    if (members.empty())
        throw std::invalid_argument("block " + std::to_string(block_id) + " has no members");
    return members;
}

}  // namespace tabgraph
