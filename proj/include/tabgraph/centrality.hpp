#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "tabgraph/csv.hpp"
#include "tabgraph/digraph.hpp"
#include "tabgraph/util.hpp"

namespace tabgraph {

struct HitsScores {
    std::vector<double> hub, authority;  // L2-normalized, entries >= 0
    int iterations = 0;
    bool converged = false;
};

/// Kleinberg's mutually reinforcing scores by power iteration:
/// h <- W a, a <- W^T h, L2-normalizing each step from a uniform start.
inline HitsScores hits(const Digraph& g, double tol = 1e-10, int max_iter = 1000) {
    const std::size_t n = g.n();
    if (g.edge_count() == 0) throw std::invalid_argument("hits: graph has no edges");

    double total_weight = 0;
    for (const auto& e : g.edges()) total_weight += e.w;
    if (total_weight <= 0.0) throw std::invalid_argument("hits: graph has no positive-weight edges");

    HitsScores scores;
    const double uniform = 1.0 / std::sqrt(double(n));
    scores.hub.assign(n, uniform);
    scores.authority.assign(n, uniform);

    std::vector<double> new_hub(n), new_auth(n);
    auto normalize = [](std::vector<double>& v) {
        double norm = 0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm > 0)
            for (double& x : v) x /= norm;
        return norm;
    };

    for (int it = 0; it < max_iter; ++it) {
        std::fill(new_hub.begin(), new_hub.end(), 0.0);
        for (int u = 0; u < int(n); ++u)
            for (const auto& [v, w] : g.out(u)) new_hub[std::size_t(u)] += w * scores.authority[std::size_t(v)];
        normalize(new_hub);

        std::fill(new_auth.begin(), new_auth.end(), 0.0);
        for (int u = 0; u < int(n); ++u)
            for (const auto& [v, w] : g.out(u)) new_auth[std::size_t(v)] += w * new_hub[std::size_t(u)];
        normalize(new_auth);

        double delta = 0;
        for (std::size_t i = 0; i < n; ++i) {
            delta = std::max(delta, std::abs(new_hub[i] - scores.hub[i]));
            delta = std::max(delta, std::abs(new_auth[i] - scores.authority[i]));
        }
        scores.hub = new_hub;
        scores.authority = new_auth;
        scores.iterations = it + 1;
        if (delta < tol) {
            scores.converged = true;
            break;
        }
    }
    return scores;
}

inline std::string hits_csv(const Digraph& g, const HitsScores& scores) {
    std::string out = "vertex,hub,authority\n";
    for (std::size_t u = 0; u < g.n(); ++u)
        out += csv_escape(g.name(int(u))) + ',' + fmt_double(scores.hub[u]) + ',' +
               fmt_double(scores.authority[u]) + '\n';
    return out;
}

}  // namespace tabgraph
