#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "tabgraph/digraph.hpp"
#include "tabgraph/rng.hpp"

namespace tabgraph {

/// Fruchterman-Reingold layout on the symmetrized weighted graph, normalized
/// to the unit square. Deterministic under seed.
inline std::vector<std::array<double, 2>> fr_layout(const Digraph& g, int iterations = 500,
                                                    std::uint64_t seed = 0) {
    const std::size_t n = g.n();
    std::vector<std::array<double, 2>> pos(n);
    if (n == 0) return pos;
    if (n == 1) {
        pos[0] = {0.5, 0.5};
        return pos;
    }

    Rng rng(derive_seed(seed, 0xF8));
    for (auto& p : pos) p = {rng.next_double(), rng.next_double()};

    const SymDecomposition dec(g);
    double max_ws = 0;
    for (int u = 0; u < int(n); ++u)
        for (const auto& [v, w] : dec.neighbors(u)) max_ws = std::max(max_ws, w);

    const double k = std::sqrt(1.0 / double(n));
    std::vector<std::array<double, 2>> disp(n);
    for (int it = 0; it < iterations; ++it) {
        const double temp = 0.1 * (1.0 - double(it) / double(iterations));
        for (auto& d : disp) d = {0, 0};

        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                double dx = pos[i][0] - pos[j][0];
                double dy = pos[i][1] - pos[j][1];
                double dist = std::sqrt(dx * dx + dy * dy);
                if (dist < 1e-9) {  // deterministic nudge for coincident points
                    dx = 1e-6 * double(i + 1);
                    dy = 1e-6 * double(j + 1);
                    dist = std::sqrt(dx * dx + dy * dy);
                }
                const double repulse = k * k / dist;
                disp[i][0] += dx / dist * repulse;
                disp[i][1] += dy / dist * repulse;
                disp[j][0] -= dx / dist * repulse;
                disp[j][1] -= dy / dist * repulse;
            }
        }
        for (int u = 0; u < int(n); ++u) {
            for (const auto& [v, w] : dec.neighbors(u)) {
                if (v <= u || w <= 0) continue;
                double dx = pos[std::size_t(u)][0] - pos[std::size_t(v)][0];
                double dy = pos[std::size_t(u)][1] - pos[std::size_t(v)][1];
                double dist = std::sqrt(dx * dx + dy * dy);
                if (dist < 1e-9) continue;
                const double attract = dist * dist / k * (max_ws > 0 ? w / max_ws : 1.0);
                disp[std::size_t(u)][0] -= dx / dist * attract;
                disp[std::size_t(u)][1] -= dy / dist * attract;
                disp[std::size_t(v)][0] += dx / dist * attract;
                disp[std::size_t(v)][1] += dy / dist * attract;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double len = std::sqrt(disp[i][0] * disp[i][0] + disp[i][1] * disp[i][1]);
            if (len <= 0) continue;
            const double capped = std::min(len, temp);
            pos[i][0] += disp[i][0] / len * capped;
            pos[i][1] += disp[i][1] / len * capped;
        }
    }

    // Normalize the bounding box into [0,1]^2; degenerate extents map to 0.5.
    for (int axis = 0; axis < 2; ++axis) {
        double lo = pos[0][std::size_t(axis)], hi = lo;
        for (const auto& p : pos) {
            lo = std::min(lo, p[std::size_t(axis)]);
            hi = std::max(hi, p[std::size_t(axis)]);
        }
        const double span = hi - lo;
        for (auto& p : pos)
            p[std::size_t(axis)] = span > 1e-12 ? (p[std::size_t(axis)] - lo) / span : 0.5;
    }
    return pos;
}

}  // namespace tabgraph
