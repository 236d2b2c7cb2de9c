#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tabgraph/digraph.hpp"
#include "tabgraph/gbm.hpp"
#include "tabgraph/table.hpp"
#include "tabgraph/treeshap.hpp"
#include "tabgraph/util.hpp"

#include <nlohmann/json.hpp>

namespace tabgraph {

/// The fitted per-column models plus the SHAP expectation matrix and the
/// resulting interpretability graph. epsilon[u][v] is the mean over rows of
/// |SHAP| of column u in column v's model; edge weights normalize each
/// target's in-weights to its model accuracy.
struct InterpBuild {
    EncodedTable table;
    std::vector<std::optional<GbmModel>> models;  // per column; empty if fit failed
    std::vector<double> acc;                      // per column (0 where skipped)
    std::vector<std::vector<double>> epsilon;     // [u][v], diagonal unused (0)
    Digraph graph;
    GbmParams gbm_params;
    std::uint64_t master_seed = 0;
    std::vector<Warning> diagnostics;
};

namespace detail {

/// Feature j of target c's model is table column (j < c ? j : j + 1).
inline std::size_t feature_to_column(std::size_t c, std::size_t j) { return j < c ? j : j + 1; }

inline FeatureMatrix features_for_target(const EncodedTable& t, std::size_t c) {
    FeatureMatrix x(t.n_rows, t.n_cols() - 1);
    for (std::size_t r = 0; r < t.n_rows; ++r)
        for (std::size_t j = 0; j + 1 < t.n_cols(); ++j)
            x.at(r, j) = t.at(r, feature_to_column(c, j));
    return x;
}

inline TaskSpec task_for_column(const ColumnSpec& spec) {
    if (spec.kind == ColumnKind::Numeric) return TaskSpec::regression();
    return spec.cardinality == 2 ? TaskSpec::binary() : TaskSpec::multiclass(spec.cardinality);
}

/// w(u, v) = acc(v) * eps(u -> v) / sum_z eps(z -> v), so each target's
/// in-weights total its model accuracy. A target with zero total
/// contribution gets no in-edges; zero-weight edges are omitted.
inline Digraph assemble_weights(const std::vector<std::string>& names,
                                const std::vector<double>& acc,
                                const std::vector<std::vector<double>>& epsilon) {
    Digraph g(names);
    const std::size_t n = names.size();
    for (std::size_t v = 0; v < n; ++v) {
        double total = 0;
        for (std::size_t u = 0; u < n; ++u)
            if (u != v) total += epsilon[u][v];
        if (total <= 0.0) continue;
        for (std::size_t u = 0; u < n; ++u) {
            if (u == v) continue;
            const double w = acc[v] * epsilon[u][v] / total;
            if (w > 0.0) g.add_edge(int(u), int(v), w);
        }
    }
    return g;
}

}  // namespace detail

/// Fits one GBM per column (per-column seed = master_seed XOR column index),
/// averages |SHAP| over all rows, and assembles the global graph.
inline InterpBuild build_global_graph(const EncodedTable& table, GbmParams params,
                                      std::uint64_t master_seed, int n_threads = 1) {
    const std::size_t n = table.n_cols();
    if (n < 3) throw std::invalid_argument("build_global_graph: need at least 3 columns");

    InterpBuild build;
    build.table = table;
    build.gbm_params = params;
    build.master_seed = master_seed;
    build.models.resize(n);
    build.acc.assign(n, 0.0);
    build.epsilon.assign(n, std::vector<double>(n, 0.0));

    std::vector<std::vector<double>> eps_in(n);  // eps_in[c][j]: feature j's mean |shap| into c
    std::vector<std::string> errors(n);

    parallel_for(n, n_threads, [&](std::size_t c) {
        const FeatureMatrix x = detail::features_for_target(table, c);
        const std::vector<double> y = table.column(c);
        try {
            GbmModel model = fit(x, y, detail::task_for_column(table.specs[c]), params,
                                 master_seed ^ std::uint64_t(c));
            model.target = table.specs[c];

            std::vector<double> mean_abs(x.cols, 0.0);
            for (std::size_t r = 0; r < table.n_rows; ++r) {
                const ShapRow shap = tree_shap(model, x.row(r));
                const std::vector<double> row_abs = shap.mean_abs_phi();
                for (std::size_t j = 0; j < x.cols; ++j) mean_abs[j] += row_abs[j];
            }
            for (double& v : mean_abs) v /= double(table.n_rows);
            eps_in[c] = std::move(mean_abs);
            build.models[c] = std::move(model);
        } catch (const std::exception& ex) {
            errors[c] = ex.what();
        }
    });

    std::vector<std::string> names;
    names.reserve(n);
    for (const auto& spec : table.specs) names.push_back(spec.name);
    for (std::size_t c = 0; c < n; ++c) {
        if (!build.models[c]) {
            build.diagnostics.push_back(
                {"column_skipped", {{"column", names[c]}, {"error", errors[c]}}});
            continue;
        }
        build.acc[c] = build.models[c]->acc;
        for (std::size_t j = 0; j + 1 < n; ++j)
            build.epsilon[detail::feature_to_column(c, j)][c] = eps_in[c][j];
    }
    build.graph = detail::assemble_weights(names, build.acc, build.epsilon);
    return build;
}

/// |SHAP| matrix of a single row: entry [u][v] is the contribution of column
/// u in column v's model on that row.
inline std::vector<std::vector<double>> local_epsilon(const InterpBuild& build, std::size_t row_index) {
    const std::size_t n = build.table.n_cols();
    if (row_index >= build.table.n_rows)
        throw std::out_of_range("local_epsilon: row index " + std::to_string(row_index));
    std::vector<std::vector<double>> eps(n, std::vector<double>(n, 0.0));
    std::vector<double> feat;
    for (std::size_t c = 0; c < n; ++c) {
        if (!build.models[c]) continue;
        feat.clear();
        for (std::size_t j = 0; j + 1 < n; ++j)
            feat.push_back(build.table.at(row_index, detail::feature_to_column(c, j)));
        const ShapRow shap = tree_shap(*build.models[c], feat);
        const std::vector<double> row_abs = shap.mean_abs_phi();
        for (std::size_t j = 0; j + 1 < n; ++j)
            eps[detail::feature_to_column(c, j)][c] = row_abs[j];
    }
    return eps;
}

/// Per-instance graph: the same accuracy-normalized weighting applied to a
/// single row's |SHAP| values, with the globally fitted models and accuracy.
inline Digraph build_local_graph(const InterpBuild& build, std::size_t row_index) {
    std::vector<std::string> names;
    for (const auto& spec : build.table.specs) names.push_back(spec.name);
    return detail::assemble_weights(names, build.acc, local_epsilon(build, row_index));
}

inline nlohmann::json build_manifest(const InterpBuild& build) {
    nlohmann::json cols = nlohmann::json::array();
    for (std::size_t c = 0; c < build.table.n_cols(); ++c) {
        cols.push_back({{"name", build.table.specs[c].name},
                        {"acc", build.acc[c]},
                        {"seed", build.master_seed ^ std::uint64_t(c)},
                        {"fitted", bool(build.models[c])}});
    }
    nlohmann::json diag = nlohmann::json::array();
    for (const auto& w : build.diagnostics) diag.push_back(w.to_json());
    return nlohmann::json{{"master_seed", build.master_seed},
                          {"params",
                           {{"n_trees", build.gbm_params.n_trees},
                            {"max_depth", build.gbm_params.max_depth},
                            {"learning_rate", build.gbm_params.learning_rate},
                            {"min_child_cover", build.gbm_params.min_child_cover},
                            {"holdout_fraction", build.gbm_params.holdout_fraction}}},
                          {"columns", cols},
                          {"diagnostics", diag}};
}

}  // namespace tabgraph
