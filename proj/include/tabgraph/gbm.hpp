#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tabgraph/rng.hpp"
#include "tabgraph/table.hpp"

#include <nlohmann/json.hpp>

namespace tabgraph {

/// Row-major feature matrix handed to fit/predict.
struct FeatureMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;

    FeatureMatrix() = default;
    FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

enum class Task { Regression, Binary, Multiclass };

struct TaskSpec {
    Task kind = Task::Regression;
    int n_classes = 1;  // K for multiclass; 1 otherwise

    static TaskSpec regression() { return {Task::Regression, 1}; }
    static TaskSpec binary() { return {Task::Binary, 1}; }
    static TaskSpec multiclass(int k) { return {Task::Multiclass, k}; }
};

struct GbmParams {
    int n_trees = 100;
    int max_depth = 4;
    double learning_rate = 0.1;
    double min_child_cover = 5;
    double holdout_fraction = 0.25;
};

/// Flat regression-tree node. feature == -1 marks a leaf. cover is the
/// training-row weight that reached the node; children covers sum to it.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1, right = -1;
    double value = 0.0;
    double cover = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double eval(std::span<const double> row) const {
        int i = 0;
        while (!nodes[std::size_t(i)].is_leaf())
            i = row[std::size_t(nodes[std::size_t(i)].feature)] < nodes[std::size_t(i)].threshold
                    ? nodes[std::size_t(i)].left
                    : nodes[std::size_t(i)].right;
        return nodes[std::size_t(i)].value;
    }

    /// Cover-weighted mean of the leaves: the tree's expected output under
    /// the training distribution.
    double mean_value() const {
        double acc = 0;
        for (const auto& n : nodes)
            if (n.is_leaf()) acc += n.value * n.cover;
        return acc / nodes[0].cover;
    }
};

struct GbmModel {
    TaskSpec task;
    std::vector<std::vector<Tree>> trees;  // [class][round]
    std::vector<double> base_score;        // [class]
    double learning_rate = 0.1;
    ColumnSpec target;
    double acc = 0.0;
    std::vector<double> train_loss;  // per boosting round
    std::vector<std::string> warnings;

    std::size_t n_features = 0;

    std::vector<double> predict_raw(std::span<const double> row) const {
        std::vector<double> out(base_score);
        for (std::size_t k = 0; k < trees.size(); ++k)
            for (const auto& t : trees[k]) out[k] += learning_rate * t.eval(row);
        return out;
    }
    double predict_raw1(std::span<const double> row) const { return predict_raw(row)[0]; }
};

namespace detail {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct TreeBuilder {
    const FeatureMatrix& x;
    std::span<const std::size_t> rows;                    // training-fold row ids
    std::span<const std::vector<std::size_t>> presorted;  // per feature: rows sorted by value
    const std::vector<char>& in_fold;                     // row id -> participates
    std::span<const double> grad, hess;                   // indexed by raw row id
    const GbmParams& params;

    struct NodeState {
        double sum_g = 0, sum_h = 0;
        double cover = 0;
        int depth = 0;
        int index = -1;      // position in tree.nodes
        bool open = false;   // still eligible for splitting
        int best_feature = -1;
        double best_threshold = 0, best_gain = 0;
    };

    static double leaf_weight(double sum_g, double sum_h) {
        return sum_h > 0 ? -sum_g / sum_h : 0.0;
    }
    static double score(double sum_g, double sum_h) {
        return sum_h > 0 ? sum_g * sum_g / sum_h : 0.0;
    }

    Tree build(std::vector<int>& node_of_row) {
        Tree tree;
        tree.nodes.emplace_back();
        std::vector<NodeState> states(1);
        std::vector<int> state_of_node{0};  // tree node index -> state id
        states[0].index = 0;
        states[0].depth = 0;
        states[0].open = true;
        for (const std::size_t r : rows) {
            node_of_row[r] = 0;
            states[0].sum_g += grad[r];
            states[0].sum_h += hess[r];
            states[0].cover += 1.0;
        }
        tree.nodes[0].cover = states[0].cover;

        std::vector<int> frontier{0};
        for (int depth = 0; depth < params.max_depth && !frontier.empty(); ++depth) {
            find_splits(states, frontier, node_of_row);

            bool any_split = false;
            for (const int sid : frontier) {
                if (states[std::size_t(sid)].best_feature < 0) {
                    states[std::size_t(sid)].open = false;
                    continue;
                }
                any_split = true;
                const int left = int(tree.nodes.size());
                {
                    // scope the references: growing the vectors below
                    // relocates both nodes and states
                    TreeNode& node = tree.nodes[std::size_t(states[std::size_t(sid)].index)];
                    node.feature = states[std::size_t(sid)].best_feature;
                    node.threshold = states[std::size_t(sid)].best_threshold;
                    node.left = left;
                    node.right = left + 1;
                }
                for (int side = 0; side < 2; ++side) {
                    tree.nodes.emplace_back();
                    states.emplace_back();
                    NodeState& child = states.back();
                    child.index = left + side;
                    child.depth = depth + 1;
                    child.open = depth + 1 < params.max_depth;
                    state_of_node.push_back(int(states.size()) - 1);
                }
            }
            if (!any_split) break;

            // Route rows of split nodes to children and accumulate child stats.
            for (const std::size_t r : rows) {
                const int sid = node_of_row[r];
                const NodeState& st = states[std::size_t(sid)];
                const TreeNode& node = tree.nodes[std::size_t(st.index)];
                if (node.is_leaf()) continue;
                const bool go_left = x.at(r, std::size_t(node.feature)) < node.threshold;
                const int child_sid = state_of_node[std::size_t(go_left ? node.left : node.right)];
                node_of_row[r] = child_sid;
                NodeState& cst = states[std::size_t(child_sid)];
                cst.sum_g += grad[r];
                cst.sum_h += hess[r];
                cst.cover += 1.0;
            }
            std::vector<int> next;
            for (std::size_t s = 0; s < states.size(); ++s) {
                if (states[s].depth == depth + 1) {
                    tree.nodes[std::size_t(states[s].index)].cover = states[s].cover;
                    if (states[s].open && states[s].cover >= 2 * params.min_child_cover)
                        next.push_back(int(s));
                    else
                        states[s].open = false;
                }
            }
            frontier = std::move(next);
        }

        for (const auto& st : states) {
            TreeNode& node = tree.nodes[std::size_t(st.index)];
            if (node.is_leaf()) node.value = leaf_weight(st.sum_g, st.sum_h);
        }
        return tree;
    }

private:
    /// Exact greedy split search: one pass over each feature's presorted
    /// order, all frontier nodes at once. Ties break toward the lower
    /// feature index, then the lower threshold (scan order guarantees both).
    void find_splits(std::vector<NodeState>& states, const std::vector<int>& frontier,
                     const std::vector<int>& node_of_row) {
        if (frontier.empty()) return;
        std::vector<int> slot(states.size(), -1);
        for (std::size_t i = 0; i < frontier.size(); ++i) slot[std::size_t(frontier[i])] = int(i);
        const std::size_t f_count = frontier.size();
        std::vector<double> cum_g(f_count), cum_h(f_count), cum_n(f_count), last_val(f_count);
        std::vector<char> seen(f_count);

        for (std::size_t feature = 0; feature < x.cols; ++feature) {
            std::fill(cum_g.begin(), cum_g.end(), 0.0);
            std::fill(cum_h.begin(), cum_h.end(), 0.0);
            std::fill(cum_n.begin(), cum_n.end(), 0.0);
            std::fill(seen.begin(), seen.end(), 0);
            for (const std::size_t r : presorted[feature]) {
                if (!in_fold[r]) continue;
                const int sid = node_of_row[r];
                if (sid < 0 || slot[std::size_t(sid)] < 0) continue;
                const int s = slot[std::size_t(sid)];
                NodeState& st = states[std::size_t(sid)];
                const double v = x.at(r, feature);
                if (seen[std::size_t(s)] && v > last_val[std::size_t(s)]) {
                    const double nl = cum_n[std::size_t(s)];
                    const double nr = st.cover - nl;
                    if (nl >= params.min_child_cover && nr >= params.min_child_cover) {
                        const double gl = cum_g[std::size_t(s)], hl = cum_h[std::size_t(s)];
                        const double gain =
                            score(gl, hl) + score(st.sum_g - gl, st.sum_h - hl) - score(st.sum_g, st.sum_h);
                        if (gain > st.best_gain + 1e-12) {
                            st.best_gain = gain;
                            st.best_feature = int(feature);
                            st.best_threshold = 0.5 * (last_val[std::size_t(s)] + v);
                        }
                    }
                }
                cum_g[std::size_t(s)] += grad[r];
                cum_h[std::size_t(s)] += hess[r];
                cum_n[std::size_t(s)] += 1.0;
                last_val[std::size_t(s)] = v;
                seen[std::size_t(s)] = 1;
            }
        }
    }
};

}  // namespace detail

/// Held-out quality in [0, 1]: classification accuracy, or clamped R^2 for
/// regression. A zero-variance regression holdout scores 0.
inline double accuracy(const GbmModel& model, const FeatureMatrix& x_holdout,
                       std::span<const double> y_holdout, std::vector<std::string>* warnings = nullptr) {
    if (x_holdout.rows == 0) throw std::invalid_argument("accuracy: empty holdout");
    const std::size_t n = x_holdout.rows;
    if (model.task.kind == Task::Regression) {
        double mean = 0;
        for (double v : y_holdout) mean += v;
        mean /= double(n);
        double var = 0;
        for (double v : y_holdout) var += (v - mean) * (v - mean);
        if (var == 0.0) {
            if (warnings) warnings->push_back("holdout target variance is zero; accuracy set to 0");
            return 0.0;
        }
        double sse = 0;
        for (std::size_t r = 0; r < n; ++r) {
            const double err = model.predict_raw1(x_holdout.row(r)) - y_holdout[r];
            sse += err * err;
        }
        return std::max(0.0, 1.0 - sse / var);
    }
    std::size_t correct = 0;
    for (std::size_t r = 0; r < n; ++r) {
        const auto raw = model.predict_raw(x_holdout.row(r));
        int pred;
        if (model.task.kind == Task::Binary) {
            pred = raw[0] > 0.0 ? 1 : 0;
        } else {
            pred = int(std::max_element(raw.begin(), raw.end()) - raw.begin());
        }
        if (pred == int(y_holdout[r])) ++correct;
    }
    return double(correct) / double(n);
}

/// Gradient-boosted trees with exact greedy splits. The holdout split is the
/// only randomness; everything else is a fixed-order computation, so equal
/// (X, y, params, seed) produce bit-identical models.
inline GbmModel fit(const FeatureMatrix& x, std::span<const double> y, TaskSpec task, GbmParams params,
                    std::uint64_t seed) {
    const std::size_t n = x.rows;
    if (n != y.size()) throw std::invalid_argument("fit: X rows != y length");
    if (n < 20) throw std::invalid_argument("fit: need at least 20 rows, got " + std::to_string(n));
    {
        const double first = y[0];
        bool all_same = true;
        for (double v : y)
            if (v != first) {
                all_same = false;
                break;
            }
        if (all_same) throw std::invalid_argument("fit: target has a single distinct value");
    }
    if (task.kind == Task::Multiclass && task.n_classes < 2)
        throw std::invalid_argument("fit: multiclass needs n_classes >= 2");
    if (task.kind != Task::Regression) {
        const int k = task.kind == Task::Binary ? 2 : task.n_classes;
        for (const double v : y) {
            if (v != std::floor(v) || v < 0 || v >= k)
                throw std::invalid_argument("fit: class labels must be integers in [0, " +
                                            std::to_string(k) + ")");
        }
    }

    const int n_classes_trees = task.kind == Task::Multiclass ? task.n_classes : 1;

    // Holdout split.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = std::size_t(rng.uniform_int(0, std::int64_t(i)));
        std::swap(order[i], order[j]);
    }
    std::size_t n_holdout = std::size_t(double(n) * params.holdout_fraction);
    n_holdout = std::min(std::max<std::size_t>(n_holdout, 1), n - 2);
    std::vector<std::size_t> holdout(order.begin(), order.begin() + std::ptrdiff_t(n_holdout));
    std::vector<std::size_t> train(order.begin() + std::ptrdiff_t(n_holdout), order.end());
    std::sort(holdout.begin(), holdout.end());
    std::sort(train.begin(), train.end());
    std::vector<char> in_fold(n, 0);
    for (const std::size_t r : train) in_fold[r] = 1;

    // Presort features over all rows once; the fold filter is applied on scan.
    std::vector<std::vector<std::size_t>> presorted(x.cols);
    for (std::size_t f = 0; f < x.cols; ++f) {
        auto& idx = presorted[f];
        idx.resize(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return x.at(a, f) < x.at(b, f); });
    }

    GbmModel model;
    model.task = task;
    model.learning_rate = params.learning_rate;
    model.n_features = x.cols;
    model.trees.resize(std::size_t(n_classes_trees));
    model.base_score.resize(std::size_t(n_classes_trees), 0.0);

    const std::size_t nt = train.size();
    const double laplace = 1.0;

    // Base scores from the training fold.
    if (task.kind == Task::Regression) {
        double mean = 0;
        for (const std::size_t r : train) mean += y[r];
        model.base_score[0] = mean / double(nt);
    } else if (task.kind == Task::Binary) {
        double pos = 0;
        for (const std::size_t r : train) pos += y[r];
        const double p = (pos + laplace) / (double(nt) + 2 * laplace);
        model.base_score[0] = std::log(p / (1 - p));
    } else {
        std::vector<double> counts(std::size_t(task.n_classes), 0.0);
        for (const std::size_t r : train) counts[std::size_t(y[r])] += 1;
        for (int k = 0; k < task.n_classes; ++k)
            model.base_score[std::size_t(k)] =
                std::log((counts[std::size_t(k)] + laplace) / (double(nt) + task.n_classes * laplace));
    }

    // Raw scores F[class][row] over training rows only.
    std::vector<std::vector<double>> f_raw(std::size_t(n_classes_trees), std::vector<double>(n, 0.0));
    for (int k = 0; k < n_classes_trees; ++k)
        for (const std::size_t r : train) f_raw[std::size_t(k)][r] = model.base_score[std::size_t(k)];

    std::vector<double> grad(n, 0.0), hess(n, 0.0);
    std::vector<int> node_of_row(n, -1);

    auto train_loss_now = [&]() -> double {
        double loss = 0;
        if (task.kind == Task::Regression) {
            for (const std::size_t r : train) {
                const double e = f_raw[0][r] - y[r];
                loss += 0.5 * e * e;
            }
        } else if (task.kind == Task::Binary) {
            for (const std::size_t r : train) {
                const double p = detail::sigmoid(f_raw[0][r]);
                const double pc = std::clamp(y[r] > 0.5 ? p : 1 - p, 1e-15, 1.0);
                loss -= std::log(pc);
            }
        } else {
            for (const std::size_t r : train) {
                double mx = f_raw[0][r];
                for (int k = 1; k < n_classes_trees; ++k) mx = std::max(mx, f_raw[std::size_t(k)][r]);
                double denom = 0;
                for (int k = 0; k < n_classes_trees; ++k)
                    denom += std::exp(f_raw[std::size_t(k)][r] - mx);
                loss -= f_raw[std::size_t(y[r])][r] - mx - std::log(denom);
            }
        }
        return loss / double(nt);
    };

    for (int round = 0; round < params.n_trees; ++round) {
        for (int k = 0; k < n_classes_trees; ++k) {
            if (task.kind == Task::Regression) {
                for (const std::size_t r : train) {
                    grad[r] = f_raw[0][r] - y[r];
                    hess[r] = 1.0;
                }
            } else if (task.kind == Task::Binary) {
                for (const std::size_t r : train) {
                    const double p = detail::sigmoid(f_raw[0][r]);
                    grad[r] = p - y[r];
                    hess[r] = std::max(p * (1 - p), 1e-6);
                }
            } else {
                for (const std::size_t r : train) {
                    double mx = f_raw[0][r];
                    for (int kk = 1; kk < n_classes_trees; ++kk)
                        mx = std::max(mx, f_raw[std::size_t(kk)][r]);
                    double denom = 0;
                    for (int kk = 0; kk < n_classes_trees; ++kk)
                        denom += std::exp(f_raw[std::size_t(kk)][r] - mx);
                    const double p = std::exp(f_raw[std::size_t(k)][r] - mx) / denom;
                    grad[r] = p - (int(y[r]) == k ? 1.0 : 0.0);
                    hess[r] = std::max(p * (1 - p), 1e-6);
                }
            }
            detail::TreeBuilder builder{x, train, presorted, in_fold, grad, hess, params};
            Tree tree = builder.build(node_of_row);
            for (const std::size_t r : train)
                f_raw[std::size_t(k)][r] += params.learning_rate * tree.eval(x.row(r));
            model.trees[std::size_t(k)].push_back(std::move(tree));
        }
        model.train_loss.push_back(train_loss_now());
    }

    // Held-out accuracy.
    FeatureMatrix xh(holdout.size(), x.cols);
    std::vector<double> yh(holdout.size());
    for (std::size_t i = 0; i < holdout.size(); ++i) {
        const std::size_t r = holdout[i];
        for (std::size_t c = 0; c < x.cols; ++c) xh.at(i, c) = x.at(r, c);
        yh[i] = y[r];
    }
    model.acc = accuracy(model, xh, yh, &model.warnings);
    return model;
}

// ---- JSON serialization ------------------------------------------------------

inline nlohmann::json tree_to_json(const Tree& tree) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree.nodes) {
        if (n.is_leaf())
            nodes.push_back({{"value", n.value}, {"cover", n.cover}});
        else
            nodes.push_back({{"feature", n.feature},
                             {"threshold", n.threshold},
                             {"left", n.left},
                             {"right", n.right},
                             {"cover", n.cover}});
    }
    return nodes;
}

inline Tree tree_from_json(const nlohmann::json& j) {
    Tree tree;
    for (const auto& jn : j) {
        TreeNode n;
        n.cover = jn.at("cover").get<double>();
        if (jn.contains("feature")) {
            n.feature = jn.at("feature").get<int>();
            n.threshold = jn.at("threshold").get<double>();
            n.left = jn.at("left").get<int>();
            n.right = jn.at("right").get<int>();
        } else {
            n.value = jn.at("value").get<double>();
        }
        tree.nodes.push_back(n);
    }
    if (tree.nodes.empty()) throw std::runtime_error("tree JSON: empty node list");
    return tree;
}

inline nlohmann::json model_to_json(const GbmModel& m) {
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& cls : m.trees) {
        nlohmann::json rounds = nlohmann::json::array();
        for (const auto& t : cls) rounds.push_back(tree_to_json(t));
        classes.push_back(rounds);
    }
    const char* task = m.task.kind == Task::Regression ? "regression"
                       : m.task.kind == Task::Binary   ? "binary"
                                                       : "multiclass";
    return nlohmann::json{{"task", task},          {"n_classes", m.task.n_classes},
                          {"learning_rate", m.learning_rate}, {"base_score", m.base_score},
                          {"acc", m.acc},          {"n_features", m.n_features},
                          {"target", m.target.to_json()},     {"trees", classes}};
}

inline GbmModel model_from_json(const nlohmann::json& j) {
    GbmModel m;
    const std::string task = j.at("task").get<std::string>();
    const int k = j.at("n_classes").get<int>();
    m.task = task == "regression" ? TaskSpec::regression()
             : task == "binary"   ? TaskSpec::binary()
                                  : TaskSpec::multiclass(k);
    m.learning_rate = j.at("learning_rate").get<double>();
    m.base_score = j.at("base_score").get<std::vector<double>>();
    m.acc = j.at("acc").get<double>();
    m.n_features = j.at("n_features").get<std::size_t>();
    m.target.name = j.at("target").at("name").get<std::string>();
    m.target.index = j.at("target").at("index").get<int>();
    if (j.at("target").at("kind").get<std::string>() == "categorical") {
        m.target.kind = ColumnKind::Categorical;
        m.target.cardinality = j.at("target").at("cardinality").get<int>();
        m.target.labels = j.at("target").at("labels").get<std::vector<std::string>>();
    }
    for (const auto& cls : j.at("trees")) {
        std::vector<Tree> rounds;
        for (const auto& jt : cls) rounds.push_back(tree_from_json(jt));
        m.trees.push_back(std::move(rounds));
    }
    return m;
}

}  // namespace tabgraph
