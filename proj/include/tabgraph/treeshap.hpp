#pragma once

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "tabgraph/gbm.hpp"

#include <nlohmann/json.hpp>

namespace tabgraph {

/// Per-instance additive attribution: base + sum(phi) equals the raw
/// prediction (per class). base is the expected raw output under the
/// training distribution carried by the node covers.
struct ShapRow {
    int target = -1;
    std::vector<std::vector<double>> phi;  // [class][feature]
    std::vector<double> base;              // [class]

    /// Mean over classes of |phi|, per feature.
    std::vector<double> mean_abs_phi() const {
        std::vector<double> out(phi.empty() ? 0 : phi[0].size(), 0.0);
        for (const auto& cls : phi)
            for (std::size_t f = 0; f < cls.size(); ++f) out[f] += std::abs(cls[f]);
        for (double& v : out) v /= double(phi.size());
        return out;
    }
};

/// One JSON line per row, for dumping local attributions.
inline nlohmann::json shap_row_to_json(const ShapRow& row) {
    return nlohmann::json{{"target", row.target}, {"base", row.base}, {"phi", row.phi}};
}

namespace detail {

constexpr int kMaxPath = 64;

struct PathElement {
    int feature;
    double zero_fraction;
    double one_fraction;
    double pweight;
};

struct Path {
    std::array<PathElement, kMaxPath> elems;
    int len = 0;
};

inline void path_extend(Path& m, double pz, double po, int pi) {
    if (m.len >= kMaxPath)
        throw std::runtime_error("tree_shap: tree depth exceeds the supported maximum");
    const int l = m.len;
    m.elems[std::size_t(l)] = {pi, pz, po, l == 0 ? 1.0 : 0.0};
    ++m.len;
    for (int i = l - 1; i >= 0; --i) {
        m.elems[std::size_t(i + 1)].pweight += po * m.elems[std::size_t(i)].pweight * (i + 1) / double(l + 1);
        m.elems[std::size_t(i)].pweight = pz * m.elems[std::size_t(i)].pweight * (l - i) / double(l + 1);
    }
}

inline void path_unwind(Path& m, int i) {
    const int l = m.len - 1;
    const double o = m.elems[std::size_t(i)].one_fraction;
    const double z = m.elems[std::size_t(i)].zero_fraction;
    double n = m.elems[std::size_t(l)].pweight;
    for (int j = l - 1; j >= 0; --j) {
        if (o != 0.0) {
            const double t = m.elems[std::size_t(j)].pweight;
            m.elems[std::size_t(j)].pweight = n * (l + 1) / ((j + 1) * o);
            n = t - m.elems[std::size_t(j)].pweight * z * (l - j) / double(l + 1);
        } else {
            m.elems[std::size_t(j)].pweight = m.elems[std::size_t(j)].pweight * (l + 1) / (z * (l - j));
        }
    }
    for (int j = i; j < l; ++j) {
        m.elems[std::size_t(j)].feature = m.elems[std::size_t(j + 1)].feature;
        m.elems[std::size_t(j)].zero_fraction = m.elems[std::size_t(j + 1)].zero_fraction;
        m.elems[std::size_t(j)].one_fraction = m.elems[std::size_t(j + 1)].one_fraction;
    }
    --m.len;
}

inline double path_unwound_sum(const Path& m, int i) {
    const int l = m.len - 1;
    const double o = m.elems[std::size_t(i)].one_fraction;
    const double z = m.elems[std::size_t(i)].zero_fraction;
    double total = 0;
    if (o != 0.0) {
        double next = m.elems[std::size_t(l)].pweight;
        for (int j = l - 1; j >= 0; --j) {
            const double tmp = next / ((j + 1) * o);
            total += tmp;
            next = m.elems[std::size_t(j)].pweight - tmp * z * (l - j);
        }
    } else {
        for (int j = l - 1; j >= 0; --j)
            total += m.elems[std::size_t(j)].pweight / (z * (l - j));
    }
    return total * (l + 1);
}

/// Lundberg's path-dependent recursion: covers act as the background
/// distribution, so a split on a "missing" feature descends both children
/// weighted by cover fractions.
inline void tree_shap_recurse(const Tree& tree, std::span<const double> row, int node_index, Path m,
                              double pz, double po, int pi, std::span<double> phi) {
    path_extend(m, pz, po, pi);
    const TreeNode& node = tree.nodes[std::size_t(node_index)];
    if (node.is_leaf()) {
        for (int i = 1; i < m.len; ++i) {
            const double w = path_unwound_sum(m, i);
            const auto& el = m.elems[std::size_t(i)];
            phi[std::size_t(el.feature)] += w * (el.one_fraction - el.zero_fraction) * node.value;
        }
        return;
    }
    const bool go_left = row[std::size_t(node.feature)] < node.threshold;
    const int hot = go_left ? node.left : node.right;
    const int cold = go_left ? node.right : node.left;
    const double hot_frac = tree.nodes[std::size_t(hot)].cover / node.cover;
    const double cold_frac = tree.nodes[std::size_t(cold)].cover / node.cover;

    double iz = 1.0, io = 1.0;
    for (int k = 1; k < m.len; ++k) {
        if (m.elems[std::size_t(k)].feature == node.feature) {
            iz = m.elems[std::size_t(k)].zero_fraction;
            io = m.elems[std::size_t(k)].one_fraction;
            path_unwind(m, k);
            break;
        }
    }
    tree_shap_recurse(tree, row, hot, m, iz * hot_frac, io, node.feature, phi);
    tree_shap_recurse(tree, row, cold, m, iz * cold_frac, 0.0, node.feature, phi);
}

}  // namespace detail

/// Exact path-dependent TreeSHAP over all trees of the model.
inline ShapRow tree_shap(const GbmModel& model, std::span<const double> row) {
    if (row.size() != model.n_features) throw std::invalid_argument("tree_shap: row width mismatch");
    ShapRow out;
    const std::size_t n_classes = model.trees.size();
    out.phi.assign(n_classes, std::vector<double>(model.n_features, 0.0));
    out.base.assign(n_classes, 0.0);
    for (std::size_t k = 0; k < n_classes; ++k) {
        out.base[k] = model.base_score[k];
        std::vector<double> phi_tree(model.n_features, 0.0);
        for (const Tree& tree : model.trees[k]) {
            std::fill(phi_tree.begin(), phi_tree.end(), 0.0);
            detail::tree_shap_recurse(tree, row, 0, detail::Path{}, 1.0, 1.0, -1, phi_tree);
            for (std::size_t f = 0; f < model.n_features; ++f)
                out.phi[k][f] += model.learning_rate * phi_tree[f];
            out.base[k] += model.learning_rate * tree.mean_value();
        }
    }
    return out;
}

namespace detail {

/// Path-dependent value function: splits on features outside S descend both
/// children weighted by cover fractions.
inline double tree_value_given(const Tree& tree, std::span<const double> row, std::uint64_t coalition,
                               int node_index) {
    const TreeNode& node = tree.nodes[std::size_t(node_index)];
    if (node.is_leaf()) return node.value;
    if (coalition & (1ULL << unsigned(node.feature))) {
        const int next = row[std::size_t(node.feature)] < node.threshold ? node.left : node.right;
        return tree_value_given(tree, row, coalition, next);
    }
    const double wl = tree.nodes[std::size_t(node.left)].cover / node.cover;
    const double wr = tree.nodes[std::size_t(node.right)].cover / node.cover;
    return wl * tree_value_given(tree, row, coalition, node.left) +
           wr * tree_value_given(tree, row, coalition, node.right);
}

}  // namespace detail

/// Raw model output when only the coalition's features are known; the
/// brute-force Shapley oracle is built on this.
inline std::vector<double> coalition_value(const GbmModel& model, std::span<const double> row,
                                           std::uint64_t coalition) {
    std::vector<double> out(model.base_score);
    for (std::size_t k = 0; k < model.trees.size(); ++k)
        for (const Tree& tree : model.trees[k])
            out[k] += model.learning_rate * detail::tree_value_given(tree, row, coalition, 0);
    return out;
}

/// Exponential-time Shapley attribution with the path-dependent value
/// function. Verification oracle; refuses more than 12 features.
inline ShapRow shap_brute_force(const GbmModel& model, std::span<const double> row) {
    const std::size_t m_features = model.n_features;
    if (m_features > 12)
        throw std::invalid_argument("shap_brute_force: refusing more than 12 features");
    if (row.size() != m_features) throw std::invalid_argument("shap_brute_force: row width mismatch");

    std::vector<double> factorial(m_features + 1, 1.0);
    for (std::size_t i = 1; i <= m_features; ++i) factorial[i] = factorial[i - 1] * double(i);
    const double m_fact = factorial[m_features];

    const std::uint64_t n_subsets = 1ULL << m_features;
    const std::size_t n_classes = model.trees.size();
    std::vector<std::vector<double>> value(n_subsets);
    for (std::uint64_t s = 0; s < n_subsets; ++s) value[s] = coalition_value(model, row, s);

    ShapRow out;
    out.phi.assign(n_classes, std::vector<double>(m_features, 0.0));
    out.base = value[0];
    for (std::size_t u = 0; u < m_features; ++u) {
        const std::uint64_t bit = 1ULL << u;
        for (std::uint64_t s = 0; s < n_subsets; ++s) {
            if (s & bit) continue;
            const int size = __builtin_popcountll(s);
            const double weight =
                factorial[std::size_t(size)] * factorial[m_features - std::size_t(size) - 1] / m_fact;
            for (std::size_t k = 0; k < n_classes; ++k)
                out.phi[k][u] += weight * (value[s | bit][k] - value[s][k]);
        }
    }
    return out;
}

}  // namespace tabgraph
