#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tabgraph/csv.hpp"
#include "tabgraph/digraph.hpp"
#include "tabgraph/util.hpp"

namespace tabgraph {

/// Disparity-filter statistics of one edge. p = w / s(u); the significance
/// w_alpha is the closed form (1 - p)^(k_out - 1) of the filter's integral,
/// with k_out counting positive-weight out-edges of the source.
struct DisparityScore {
    int u, v;
    double w;
    double p;
    double w_alpha;
    int k_out;
};

inline std::vector<DisparityScore> disparity_scores(const Digraph& g) {
    std::vector<DisparityScore> scores;
    scores.reserve(g.edge_count());
    for (int u = 0; u < int(g.n()); ++u) {
        double s = 0;
        int k = 0;
        for (const auto& [v, w] : g.out(u)) {
            s += w;
            if (w > 0) ++k;
        }
        for (const auto& [v, w] : g.out(u)) {
            DisparityScore sc{u, v, w, 0.0, 1.0, k};
            if (s > 0) {
                sc.p = w / s;
                sc.w_alpha = k >= 2 ? std::pow(1.0 - sc.p, k - 1) : 1.0;
            }
            scores.push_back(sc);
        }
    }
    return scores;
}

/// Keeps edges whose w_alpha is at most alpha. Sole positive out-edges
/// (k_out = 1) are always kept; the vertex set is unchanged.
inline Digraph backbone(const Digraph& g, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("backbone: alpha must be in (0, 1]");
    Digraph filtered(g.names());
    for (const auto& sc : disparity_scores(g)) {
        const bool keep = (sc.k_out == 1 && sc.w > 0) || sc.w_alpha <= alpha;
        if (keep) filtered.add_edge(sc.u, sc.v, sc.w);
    }
    return filtered;
}

inline std::string disparity_csv(const Digraph& g) {
    std::string out = "u,v,w,p,w_alpha\n";
    for (const auto& sc : disparity_scores(g)) {
        out += csv_escape(g.name(sc.u)) + ',' + csv_escape(g.name(sc.v)) + ',' + fmt_double(sc.w) +
               ',' + fmt_double(sc.p) + ',' + fmt_double(sc.w_alpha) + '\n';
    }
    return out;
}

}  // namespace tabgraph
