#pragma once

// Shared test helpers: graph generators, partition metrics, quadrature, and
// an Eigen-backed dense eigensolver used as the independent oracle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "tabgraph/digraph.hpp"
#include "tabgraph/rng.hpp"
#include "tabgraph/spectral.hpp"

namespace test_support {

using tabgraph::Digraph;
using tabgraph::Rng;

inline Digraph random_digraph(std::size_t n, double edge_prob, std::uint64_t seed,
                              double w_lo = 0.1, double w_hi = 2.0) {
    Digraph g(n);
    Rng rng(seed);
    for (int u = 0; u < int(n); ++u)
        for (int v = 0; v < int(n); ++v) {
            if (u == v) continue;
            if (rng.next_double() < edge_prob) g.add_edge(u, v, rng.uniform(w_lo, w_hi));
        }
    return g;
}

/// Random digraph whose symmetrized version is connected (a directed
/// Hamiltonian cycle is planted first).
inline Digraph random_connected_digraph(std::size_t n, double extra_edge_prob, std::uint64_t seed) {
    Digraph g(n);
    Rng rng(seed);
    for (int u = 0; u < int(n); ++u) g.add_edge(u, int((u + 1) % int(n)), rng.uniform(0.2, 1.5));
    for (int u = 0; u < int(n); ++u)
        for (int v = 0; v < int(n); ++v) {
            if (u == v || g.has_edge(u, v)) continue;
            if (rng.next_double() < extra_edge_prob) g.add_edge(u, v, rng.uniform(0.1, 2.0));
        }
    return g;
}

inline Digraph planted_partition(int blocks, int per_block, double p_in, double p_out,
                                 std::uint64_t seed) {
    Digraph g(std::size_t(blocks * per_block));
    Rng rng(seed);
    const int n = blocks * per_block;
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) {
            if (u == v) continue;
            const bool same = (u / per_block) == (v / per_block);
            if (rng.next_double() < (same ? p_in : p_out)) g.add_edge(u, v, 1.0);
        }
    return g;
}

/// Directed clique (both directions) on the given vertex ids.
inline void add_clique(Digraph& g, const std::vector<int>& members, double w = 1.0) {
    for (std::size_t i = 0; i < members.size(); ++i)
        for (std::size_t j = 0; j < members.size(); ++j)
            if (i != j) g.add_edge(members[i], members[j], w);
}

inline double adjusted_rand(const std::vector<int>& a, const std::vector<int>& b) {
    const std::size_t n = a.size();
    std::map<int, std::map<int, long long>> cont;
    std::map<int, long long> ra, rb;
    for (std::size_t i = 0; i < n; ++i) {
        cont[a[i]][b[i]]++;
        ra[a[i]]++;
        rb[b[i]]++;
    }
    auto choose2 = [](long long m) { return double(m) * double(m - 1) / 2.0; };
    double sum_ij = 0, sum_a = 0, sum_b = 0;
    for (const auto& [ka, row] : cont)
        for (const auto& [kb, m] : row) sum_ij += choose2(m);
    for (const auto& [k, m] : ra) sum_a += choose2(m);
    for (const auto& [k, m] : rb) sum_b += choose2(m);
    const double expected = sum_a * sum_b / choose2(static_cast<long long>(n));
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0;
    return (sum_ij - expected) / (max_index - expected);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double eps = 1e-13, int depth = 40) {
    const double c = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fc = f(c);
    std::function<double(double, double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fhi, double fmid, double whole,
            int d) -> double {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        const double flm = f(lm), frm = f(rm);
        const double left = (mid - lo) / 6.0 * (flo + 4 * flm + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4 * frm + fhi);
        if (d <= 0 || std::abs(left + right - whole) < 15 * eps)
            return left + right + (left + right - whole) / 15.0;
        return rec(lo, mid, flo, fmid, flm, left, d - 1) +
               rec(mid, hi, fmid, fhi, frm, right, d - 1);
    };
    const double whole = (b - a) / 6.0 * (fa + 4 * fc + fb);
    return rec(a, b, fa, fb, fc, whole, depth);
}

/// Geodesic distance on the (theta1, theta2) torus.
inline double torus_distance(double t1a, double t2a, double t1b, double t2b) {
    auto wrap = [](double d) {
        d = std::abs(d);
        return std::min(d, tabgraph::kTwoPi - d);
    };
    const double d1 = wrap(t1a - t1b);
    const double d2 = wrap(t2a - t2b);
    return std::sqrt(d1 * d1 + d2 * d2);
}

/// Mean silhouette of the angular embedding against reference clusters,
/// skipping undefined vertices.
inline double angular_silhouette(const tabgraph::TorusEmbedding& emb,
                                 const std::vector<int>& clusters) {
    double total = 0;
    int counted = 0;
    const std::size_t n = clusters.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!emb.defined[i]) continue;
        double own = 0;
        int own_n = 0;
        std::map<int, std::pair<double, int>> others;
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || !emb.defined[j]) continue;
            const double d = torus_distance(emb.theta1[i], emb.theta2[i], emb.theta1[j], emb.theta2[j]);
            if (clusters[j] == clusters[i]) {
                own += d;
                ++own_n;
            } else {
                others[clusters[j]].first += d;
                others[clusters[j]].second++;
            }
        }
        if (own_n == 0 || others.empty()) continue;
        const double a = own / own_n;
        double b = std::numeric_limits<double>::max();
        for (const auto& [c, acc] : others) b = std::min(b, acc.first / acc.second);
        total += (b - a) / std::max(a, b);
        ++counted;
    }
    return counted ? total / counted : 0.0;
}

}  // namespace test_support
