#include <catch2/catch_amalgamated.hpp>

#include "tabgraph/interp_graph.hpp"

#include "support.hpp"

using namespace tabgraph;

namespace {

/// Shared fitted build over a small synthetic table (3 groups keep it fast).
const SyntheticTable& shared_synth() {
    static const SyntheticTable s = generate_synthetic_table(3, 3, 600, 0.9, 0.3, 21);
    return s;
}

const InterpBuild& shared_build() {
    static const InterpBuild build = [] {
        GbmParams params;
        params.n_trees = 40;
        return build_global_graph(shared_synth().table, params, 21, 2);
    }();
    return build;
}

double in_weight(const Digraph& g, int v) {
    double acc = 0;
    for (int u = 0; u < int(g.n()); ++u)
        if (u != v) acc += g.weight(u, v);
    return acc;
}

}  // namespace

TEST_CASE("edge weights follow the accuracy-normalized split", "[interp]") {
    // two predictors with equal contribution into v, Acc(v) = 0.8
    const std::vector<std::string> names{"u1", "u2", "v"};
    const std::vector<double> acc{0.0, 0.0, 0.8};
    std::vector<std::vector<double>> eps(3, std::vector<double>(3, 0.0));
    eps[0][2] = 0.37;
    eps[1][2] = 0.37;
    const Digraph g = detail::assemble_weights(names, acc, eps);
    CHECK(g.weight(0, 2) == Catch::Approx(0.4).margin(1e-15));
    CHECK(g.weight(1, 2) == Catch::Approx(0.4).margin(1e-15));
    CHECK(g.edge_count() == 2);  // zero-weight edges omitted
}

TEST_CASE("zero total contribution leaves a target without in-edges", "[interp]") {
    const std::vector<std::string> names{"a", "b", "c"};
    const std::vector<double> acc{0.9, 0.9, 0.9};
    std::vector<std::vector<double>> eps(3, std::vector<double>(3, 0.0));
    eps[0][1] = 1.0;  // only b receives anything
    const Digraph g = detail::assemble_weights(names, acc, eps);
    CHECK(in_weight(g, 0) == 0.0);
    CHECK(in_weight(g, 2) == 0.0);
    CHECK(in_weight(g, 1) == Catch::Approx(0.9));
}

TEST_CASE("build needs at least 3 columns", "[interp]") {
    const SyntheticTable tiny = generate_synthetic_table(1, 2, 50, 0.9, 0.3, 1);
    CHECK_THROWS_AS(build_global_graph(tiny.table, {}, 1), std::invalid_argument);
}

TEST_CASE("global build satisfies the in-degree identity", "[interp]") {
    const InterpBuild& build = shared_build();
    for (std::size_t v = 0; v < build.table.n_cols(); ++v)
        CHECK(std::abs(in_weight(build.graph, int(v)) - build.acc[v]) <= 1e-9);
}

TEST_CASE("within-group edges dominate across-group edges", "[interp]") {
    const InterpBuild& build = shared_build();
    const auto& groups = shared_synth().group_of_column;
    double win = 0, wout = 0;
    int nin = 0, nout = 0;
    for (const auto& e : build.graph.edges()) {
        if (groups[std::size_t(e.u)] == groups[std::size_t(e.v)]) {
            win += e.w;
            ++nin;
        } else {
            wout += e.w;
            ++nout;
        }
    }
    REQUIRE(nin > 0);
    REQUIRE(nout > 0);
    CHECK((win / nin) / (wout / nout) >= 3.0);
}

TEST_CASE("build is deterministic", "[interp]") {
    GbmParams params;
    params.n_trees = 15;
    const SyntheticTable s = generate_synthetic_table(3, 2, 200, 0.8, 0.3, 5);
    const InterpBuild a = build_global_graph(s.table, params, 9, 1);
    const InterpBuild b = build_global_graph(s.table, params, 9, 3);  // thread count is irrelevant
    CHECK(a.graph == b.graph);
    CHECK(a.acc == b.acc);
    CHECK(a.epsilon == b.epsilon);
}

TEST_CASE("local graphs obey the identity and average to the global epsilon", "[interp]") {
    const InterpBuild& build = shared_build();
    const std::size_t n = build.table.n_cols();

    // per-instance in-degree identity on a handful of rows
    for (const std::size_t row : {std::size_t(0), std::size_t(7), std::size_t(123)}) {
        const Digraph local = build_local_graph(build, row);
        for (std::size_t v = 0; v < n; ++v) {
            if (in_weight(local, int(v)) == 0.0) continue;  // degenerate all-zero shap row
            CHECK(std::abs(in_weight(local, int(v)) - build.acc[v]) <= 1e-9);
        }
    }

    // mean over rows of the local epsilon equals the global epsilon
    std::vector<std::vector<double>> mean(n, std::vector<double>(n, 0.0));
    for (std::size_t r = 0; r < build.table.n_rows; ++r) {
        const auto eps = local_epsilon(build, r);
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = 0; v < n; ++v) mean[u][v] += eps[u][v];
    }
    double max_diff = 0;
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v)
            max_diff = std::max(max_diff, std::abs(mean[u][v] / double(build.table.n_rows) -
                                                   build.epsilon[u][v]));
    CHECK(max_diff <= 1e-12);
}

TEST_CASE("constant-prediction row yields no in-edges for that target", "[interp]") {
    // Hand-built InterpBuild whose only model is a single leaf: every row's
    // shap values vanish, so the target keeps zero in-edges locally.
    InterpBuild build;
    build.table = generate_synthetic_table(1, 3, 30, 0.9, 0.3, 2).table;
    build.acc = {0.5, 0.5, 0.5};
    build.models.resize(3);
    GbmModel flat;
    flat.task = TaskSpec::regression();
    flat.base_score = {1.0};
    flat.learning_rate = 1.0;
    flat.n_features = 2;
    Tree leaf;
    leaf.nodes.push_back({-1, 0.0, -1, -1, 0.25, 30.0});
    flat.trees = {{leaf}};
    build.models[1] = flat;

    const Digraph local = build_local_graph(build, 0);
    for (int u = 0; u < 3; ++u) CHECK(local.weight(u, 1) == 0.0);
}

TEST_CASE("permuting a target column destroys its in-weights", "[interp]") {
    const SyntheticTable s = generate_synthetic_table(3, 3, 600, 0.9, 0.3, 33);
    EncodedTable shuffled = s.table;
    // permute column 4 across rows, breaking its dependence on the others
    Rng rng(77);
    const std::size_t col = 4;
    for (std::size_t r = shuffled.n_rows - 1; r > 0; --r) {
        const std::size_t j = std::size_t(rng.uniform_int(0, std::int64_t(r)));
        std::swap(shuffled.values[r * shuffled.n_cols() + col],
                  shuffled.values[j * shuffled.n_cols() + col]);
    }
    GbmParams params;
    params.n_trees = 40;
    const InterpBuild build = build_global_graph(shuffled, params, 21, 2);
    CHECK(build.acc[col] <= 0.05);
    CHECK(in_weight(build.graph, int(col)) <= 0.05);
}

TEST_CASE("build manifest records accuracy and seeds", "[interp]") {
    const InterpBuild& build = shared_build();
    const nlohmann::json manifest = build_manifest(build);
    REQUIRE(manifest.at("columns").size() == build.table.n_cols());
    CHECK(manifest.at("columns")[0].at("seed").get<std::uint64_t>() == (21ULL ^ 0ULL));
    CHECK(manifest.at("columns")[3].at("seed").get<std::uint64_t>() == (21ULL ^ 3ULL));
    CHECK(manifest.at("columns")[0].at("acc").get<double>() == build.acc[0]);
}
