// tabgraph: map a tabular dataset to a weighted directed interpretability
// graph and analyze it (disparity backbone, HITS, magnetic spectral
// embedding, nested-SBM hierarchy, node2vec similarity queries).

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "tabgraph/pipeline.hpp"

#include <CLI11.hpp>

namespace fs = std::filesystem;
using namespace tabgraph;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

GraphFormat format_of(const fs::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".json") return GraphFormat::Json;
    if (ext == ".graphml" || ext == ".xml") return GraphFormat::GraphML;
    if (ext == ".dot" || ext == ".gv") return GraphFormat::Dot;
    throw ConfigError("cannot infer graph format from extension: " + path.string());
}

Digraph load_graph(const fs::path& path) { return import_graph(read_file(path), format_of(path)); }

std::vector<int> parse_vertex_list(const Digraph& g, const std::string& spec) {
    std::vector<int> out;
    std::size_t start = 0;
    while (start <= spec.size()) {
        std::size_t end = spec.find(',', start);
        if (end == std::string::npos) end = spec.size();
        std::string token = spec.substr(start, end - start);
        start = end + 1;
        const auto a = token.find_first_not_of(" \t");
        if (a == std::string::npos) {
            if (end == spec.size()) break;
            continue;
        }
        const auto b = token.find_last_not_of(" \t");
        token = token.substr(a, b - a + 1);
        int idx = g.index_of(token);
        if (idx < 0) {
            try {
                idx = std::stoi(token);
            } catch (...) {
                throw ConfigError("unknown vertex '" + token + "'");
            }
        }
        out.push_back(idx);
        if (end == spec.size()) break;
    }
    return out;
}

void print_warnings(const std::vector<Warning>& warnings) {
    for (const auto& w : warnings) std::cerr << w.to_json().dump() << "\n";
}

struct CommonFlags {
    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> alpha;
    std::optional<double> charge;
    std::optional<std::string> input;
    std::optional<std::string> out;
    std::optional<int> threads;
    std::optional<int> gbm_trees;
    std::optional<int> gbm_depth;
    std::optional<bool> no_header;

    PipelineConfig resolve() const {
        PipelineConfig cfg;
        if (config_path) cfg = load_config(*config_path);
        if (seed) cfg.master_seed = *seed;
        if (alpha) cfg.alpha = *alpha;
        if (charge) cfg.charge = *charge;
        if (input) cfg.input = *input;
        if (out) cfg.out_dir = *out;
        if (threads) cfg.threads = *threads;
        if (gbm_trees) cfg.gbm.n_trees = *gbm_trees;
        if (gbm_depth) cfg.gbm.max_depth = *gbm_depth;
        if (no_header && *no_header) cfg.header = false;
        validate_config(cfg);
        return cfg;
    }
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "key = value config file");
    cmd->add_option("--seed", flags.seed, "master seed");
    cmd->add_option("--alpha", flags.alpha, "disparity filter threshold in (0,1]");
    cmd->add_option("--charge", flags.charge, "magnetic Laplacian charge q in [0,1]");
    cmd->add_option("--input", flags.input, "input CSV");
    cmd->add_option("--out", flags.out, "output directory");
    cmd->add_option("--threads", flags.threads, "worker threads (outputs are unaffected)");
    cmd->add_option("--gbm-trees", flags.gbm_trees, "boosting rounds per column model");
    cmd->add_option("--gbm-depth", flags.gbm_depth, "maximum tree depth");
    cmd->add_flag("--no-header", [&flags](std::int64_t) { flags.no_header = true; },
                  "input CSV has no header row");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tabular dataset -> interpretability graph toolkit"};
    app.require_subcommand(1);

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "generate a synthetic table with planted groups");
    int synth_groups = 4, synth_cols = 6, synth_rows = 4000;
    double synth_within = 0.9, synth_noise = 0.3;
    std::uint64_t synth_seed = 7;
    std::string synth_out = "table.csv";
    std::string synth_groups_out;
    synth->add_option("--groups", synth_groups, "number of dependency groups");
    synth->add_option("--cols-per-group", synth_cols, "columns per group");
    synth->add_option("--rows", synth_rows, "rows");
    synth->add_option("--within", synth_within, "within-group signal strength in (0,1]");
    synth->add_option("--noise", synth_noise, "independent noise sd");
    synth->add_option("--seed", synth_seed, "seed");
    synth->add_option("--out", synth_out, "output CSV path");
    synth->add_option("--groups-json", synth_groups_out, "where to write the ground-truth groups");

    // ---- ingest ----
    auto* ingest = app.add_subcommand("ingest", "parse + encode a CSV, emit the table manifest");
    CommonFlags ingest_flags;
    add_common_flags(ingest, ingest_flags);
    int ingest_max_card = 32;
    std::string ingest_missing = "drop_row";
    std::string ingest_manifest = "table_manifest.json";
    ingest->add_option("--max-cardinality", ingest_max_card, "categorical cardinality bound");
    ingest->add_option("--missing", ingest_missing, "missing policy: drop_row|error");
    ingest->add_option("--manifest", ingest_manifest, "manifest output path");

    // ---- build-graph ----
    auto* build = app.add_subcommand("build-graph", "fit per-column models and emit the global graph");
    CommonFlags build_flags;
    add_common_flags(build, build_flags);
    std::string dump_models;
    build->add_option("--dump-models", dump_models, "directory for per-column model JSON fixtures");

    // ---- hits ----
    auto* hits_cmd = app.add_subcommand("hits", "hub/authority scores of a graph file");
    std::string hits_graph, hits_out = "hits.csv";
    std::optional<double> hits_alpha;
    hits_cmd->add_option("--graph", hits_graph, "graph file (.json/.graphml/.dot)")->required();
    hits_cmd->add_option("--out", hits_out, "output CSV");
    hits_cmd->add_option("--alpha", hits_alpha, "filter first with this alpha (comparison mode)");

    // ---- filter ----
    auto* filter_cmd = app.add_subcommand("filter", "disparity-filter backbone of a graph file");
    std::string filter_graph, filter_out = "backbone.json", filter_scores;
    double filter_alpha = 0.1;
    filter_cmd->add_option("--graph", filter_graph, "graph file")->required();
    filter_cmd->add_option("--alpha", filter_alpha, "threshold in (0,1]");
    filter_cmd->add_option("--out", filter_out, "backbone output (.json/.graphml/.dot)");
    filter_cmd->add_option("--scores", filter_scores, "optional disparity score CSV");

    // ---- spectral ----
    auto* spectral_cmd = app.add_subcommand("spectral", "magnetic Laplacian torus embedding");
    std::string spectral_graph, spectral_hub_csv, spectral_dir = ".";
    double spectral_charge = 0.1;
    spectral_cmd->add_option("--graph", spectral_graph, "graph file")->required();
    spectral_cmd->add_option("--charge", spectral_charge, "charge q in [0,1]");
    spectral_cmd->add_option("--hub-csv", spectral_hub_csv, "hits CSV for the radial coordinate");
    spectral_cmd->add_option("--out", spectral_dir, "output directory");

    // ---- communities ----
    auto* comm_cmd = app.add_subcommand("communities", "nested-SBM hierarchy of a graph file");
    std::string comm_graph, comm_out = "partition.json", comm_svg;
    std::uint64_t comm_seed = 1;
    int comm_sweeps = 1000, comm_restarts = 3;
    comm_cmd->add_option("--graph", comm_graph, "graph file")->required();
    comm_cmd->add_option("--seed", comm_seed, "seed");
    comm_cmd->add_option("--sweeps", comm_sweeps, "Metropolis sweeps per plateau");
    comm_cmd->add_option("--restarts", comm_restarts, "independent runs, best DL wins");
    comm_cmd->add_option("--out", comm_out, "partition JSON output");
    comm_cmd->add_option("--svg", comm_svg, "optional radial hierarchy SVG");

    // ---- embed ----
    auto* embed_cmd = app.add_subcommand("embed", "node2vec-style embeddings and similarity queries");
    std::string embed_graph, embed_out = "embeddings.csv", embed_query;
    std::uint64_t embed_seed = 1;
    int embed_top = 5;
    bool embed_sym = false;
    WalkParams embed_walk;
    SgnsParams embed_sgns;
    embed_cmd->add_option("--graph", embed_graph, "graph file")->required();
    embed_cmd->add_option("--seed", embed_seed, "seed");
    embed_cmd->add_option("--out", embed_out, "embedding CSV output");
    embed_cmd->add_option("--query", embed_query, "vertex name: print most similar as JSON");
    embed_cmd->add_option("--top", embed_top, "results per query");
    embed_cmd->add_flag("--symmetrize", embed_sym, "walk the symmetrized graph");
    embed_cmd->add_option("--walk-length", embed_walk.walk_length);
    embed_cmd->add_option("--walks-per-vertex", embed_walk.walks_per_vertex);
    embed_cmd->add_option("--dims", embed_sgns.dims);
    embed_cmd->add_option("--epochs", embed_sgns.epochs);

    // ---- pipeline ----
    auto* pipeline_cmd = app.add_subcommand("pipeline", "run every stage end to end");
    CommonFlags pipeline_flags;
    add_common_flags(pipeline_cmd, pipeline_flags);

    // ---- refine ----
    auto* refine_cmd = app.add_subcommand("refine", "re-run analysis on an induced subgraph");
    CommonFlags refine_flags;
    add_common_flags(refine_cmd, refine_flags);
    std::string refine_bundle, refine_vertices, refine_tag = "subset";
    int refine_group = -1;
    bool refine_do_retrain = false;
    refine_cmd->add_option("--bundle", refine_bundle, "existing pipeline output directory")->required();
    refine_cmd->add_option("--vertices", refine_vertices, "comma-separated vertex names (or indices)");
    refine_cmd->add_option("--group", refine_group, "level-0 block id from the bundle's partition");
    refine_cmd->add_option("--tag", refine_tag, "refinement directory name");
    refine_cmd->add_flag("--retrain", refine_do_retrain,
                         "recompute edge weights from the restricted column set (needs --input)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*synth) {
            const SyntheticTable synthetic = generate_synthetic_table(
                synth_groups, synth_cols, synth_rows, synth_within, synth_noise, synth_seed);
            write_file(synth_out, table_to_csv(synthetic.table));
            if (!synth_groups_out.empty()) {
                nlohmann::json g{{"group_of_column", synthetic.group_of_column}};
                write_file(synth_groups_out, g.dump(2) + "\n");
            }
            std::cout << "wrote " << synth_out << " (" << synth_rows << " rows, "
                      << synth_groups * synth_cols << " columns)\n";
            return kExitOk;
        }

        if (*ingest) {
            PipelineConfig cfg = ingest_flags.resolve();
            cfg.encode_opts.categorical_max_cardinality = ingest_max_card;
            if (ingest_missing == "error") cfg.encode_opts.missing = MissingPolicy::Error;
            else if (ingest_missing != "drop_row")
                throw ConfigError("--missing must be drop_row or error");
            if (cfg.input.empty()) throw ConfigError("ingest: --input is required");
            const RawTable raw = load_csv(cfg.input, cfg.header);
            const EncodeResult encoded = encode(raw, cfg.encode_opts);
            print_warnings(encoded.warnings);
            write_file(ingest_manifest, table_manifest(encoded, cfg.encode_opts).dump(2) + "\n");
            std::cout << "encoded " << encoded.table.n_rows << " rows x " << encoded.table.n_cols()
                      << " columns -> " << ingest_manifest << "\n";
            return kExitOk;
        }

        if (*build) {
            PipelineConfig cfg = build_flags.resolve();
            if (cfg.input.empty()) throw ConfigError("build-graph: --input is required");
            if (cfg.out_dir.empty()) throw ConfigError("build-graph: --out is required");
            const RawTable raw = load_csv(cfg.input, cfg.header);
            const EncodeResult encoded = encode(raw, cfg.encode_opts);
            print_warnings(encoded.warnings);
            const InterpBuild ib = build_global_graph(encoded.table, cfg.gbm, cfg.master_seed, cfg.threads);
            fs::create_directories(cfg.out_dir);
            write_file(cfg.out_dir / "graph.graphml", export_graph(ib.graph, GraphFormat::GraphML));
            write_file(cfg.out_dir / "graph.json", export_graph(ib.graph, GraphFormat::Json));
            write_file(cfg.out_dir / "build_manifest.json", build_manifest(ib).dump(2) + "\n");
            if (!dump_models.empty()) {
                fs::create_directories(dump_models);
                for (std::size_t c = 0; c < ib.models.size(); ++c) {
                    if (!ib.models[c]) continue;
                    write_file(fs::path(dump_models) / (ib.table.specs[c].name + ".json"),
                               model_to_json(*ib.models[c]).dump(2) + "\n");
                }
            }
            std::cout << "graph: " << ib.graph.n() << " vertices, " << ib.graph.edge_count()
                      << " edges -> " << cfg.out_dir.string() << "\n";
            return kExitOk;
        }

        if (*hits_cmd) {
            Digraph g = load_graph(hits_graph);
            if (hits_alpha) g = backbone(g, *hits_alpha);
            const HitsScores scores = hits(g);
            write_file(hits_out, hits_csv(g, scores));
            std::cout << "hits: " << (scores.converged ? "converged" : "not converged") << " in "
                      << scores.iterations << " iterations -> " << hits_out << "\n";
            return kExitOk;
        }

        if (*filter_cmd) {
            const Digraph g = load_graph(filter_graph);
            const Digraph bb = backbone(g, filter_alpha);
            write_file(filter_out, export_graph(bb, format_of(filter_out)));
            if (!filter_scores.empty()) write_file(filter_scores, disparity_csv(g));
            std::cout << "backbone: kept " << bb.edge_count() << " of " << g.edge_count()
                      << " edges -> " << filter_out << "\n";
            return kExitOk;
        }

        if (*spectral_cmd) {
            const Digraph g = load_graph(spectral_graph);
            std::vector<double> hub(g.n(), 0.0);
            if (!spectral_hub_csv.empty()) {
                const RawTable csv = parse_csv(read_file(spectral_hub_csv), true);
                for (const auto& row : csv.rows) {
                    const int idx = g.index_of(row.at(0));
                    double value;
                    if (idx >= 0 && parse_double(row.at(1), value)) hub[std::size_t(idx)] = value;
                }
            } else if (g.edge_count() > 0) {
                hub = hits(g).hub;
            }
            const TorusEmbedding emb = torus_embedding(g, spectral_charge, hub);
            fs::create_directories(spectral_dir);
            write_file(fs::path(spectral_dir) / "spectral.csv", spectral_csv(g, emb));
            write_file(fs::path(spectral_dir) / "torus.svg", svg_torus(g, emb));
            std::cout << "spectral embedding (q = " << spectral_charge << ") -> " << spectral_dir
                      << "\n";
            return kExitOk;
        }

        if (*comm_cmd) {
            const Digraph g = load_graph(comm_graph);
            NsbmParams params;
            params.n_sweeps = comm_sweeps;
            std::optional<HierPartition> best;
            for (int i = 0; i < comm_restarts; ++i) {
                HierPartition part = infer_nsbm(g, comm_seed + std::uint64_t(i), params);
                if (!best || part.description_length < best->description_length - 1e-12)
                    best = std::move(part);
            }
            write_file(comm_out, best->to_json().dump(2) + "\n");
            if (!comm_svg.empty()) write_file(comm_svg, svg_radial_hierarchy(g, *best));
            std::cout << "nSBM: B = ";
            for (std::size_t l = 0; l < best->levels.size(); ++l)
                std::cout << (l ? " -> " : "") << best->b_per_level()[l];
            std::cout << ", DL = " << best->description_length << " -> " << comm_out << "\n";
            return kExitOk;
        }

        if (*embed_cmd) {
            Digraph g = load_graph(embed_graph);
            const Digraph source = embed_sym ? symmetrized(g) : g;
            const WalkCorpus corpus = generate_walks(source, embed_walk, embed_seed);
            const EmbeddingTable table = train_embeddings(corpus, embed_sgns, embed_seed);
            write_file(embed_out, embeddings_csv(g, table));
            if (!embed_query.empty()) {
                const int idx = g.index_of(embed_query);
                if (idx < 0) throw ConfigError("unknown vertex '" + embed_query + "'");
                const auto ranked = most_similar(table, idx, embed_top);
                std::cout << query_to_json(g, idx, ranked).dump(2) << "\n";
            } else {
                std::cout << "embeddings: " << table.n << " x " << table.dims << " -> " << embed_out
                          << "\n";
            }
            return kExitOk;
        }

        if (*pipeline_cmd) {
            const PipelineConfig cfg = pipeline_flags.resolve();
            const PipelineResult result = run_pipeline(cfg);
            print_warnings(result.encoded.warnings);
            std::cout << "pipeline complete: " << result.artifacts.size() << " artifacts in "
                      << result.out_dir.string() << "\n";
            return kExitOk;
        }

        if (*refine_cmd) {
            PipelineConfig cfg = refine_flags.resolve();
            const Digraph full =
                import_graph(read_file(fs::path(refine_bundle) / "graph.json"), GraphFormat::Json);
            std::vector<int> vertices;
            if (refine_group >= 0) vertices = block_members(refine_bundle, refine_group);
            else if (!refine_vertices.empty()) vertices = parse_vertex_list(full, refine_vertices);
            else throw ConfigError("refine: provide --vertices or --group");
            const std::string tag =
                refine_group >= 0 && refine_tag == "subset" ? "g" + std::to_string(refine_group) : refine_tag;
            const PipelineResult result =
                refine_do_retrain ? refine_retrain(refine_bundle, vertices, cfg, tag)
                                  : refine(refine_bundle, vertices, cfg, tag);
            std::cout << "refined " << vertices.size() << " vertices -> " << result.out_dir.string()
                      << "\n";
            return kExitOk;
        }
    } catch (const ConfigError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitConfig;
    } catch (const CsvError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitStage;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitStage;
    }
    return kExitOk;
}
