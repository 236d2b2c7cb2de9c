#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tabgraph/csv.hpp"
#include "tabgraph/digraph.hpp"
#include "tabgraph/eig.hpp"
#include "tabgraph/util.hpp"

namespace tabgraph {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// gamma_q(u, v) = exp(2 pi i q a(v, u)), the phase carried by edge (u, v).
inline Complex magnetic_phase(const SymDecomposition& dec, double q, int u, int v) {
    const double angle = kTwoPi * q * dec.flow(u, v);
    return Complex(std::cos(angle), std::sin(angle));
}

/// Magnetic Laplacian L_q (or its symmetric-normalized form H_q). q = 0
/// reduces entrywise to the combinatorial Laplacian of the symmetrized graph.
inline HermitianMatrix magnetic_laplacian(const Digraph& g, double q, bool normalized) {
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("magnetic_laplacian: q must be in [0, 1]");
    const SymDecomposition dec(g);
    const std::size_t n = g.n();
    HermitianMatrix h(n);
    if (normalized) {
        for (std::size_t u = 0; u < n; ++u) {
            if (dec.degree(int(u)) <= 0.0)
                throw std::invalid_argument("magnetic_laplacian: isolated vertex '" + g.name(int(u)) +
                                            "' has zero degree in the normalized form");
        }
    }
    for (std::size_t u = 0; u < n; ++u) {
        h.set_diagonal(u, normalized ? 1.0 : dec.degree(int(u)));
        for (const auto& [v, ws] : dec.neighbors(int(u))) {
            if (std::size_t(v) <= u) continue;
            Complex coupling = -ws * magnetic_phase(dec, q, int(u), v);
            if (normalized) coupling /= std::sqrt(dec.degree(int(u)) * dec.degree(v));
            h.set_pair(u, std::size_t(v), coupling);
        }
    }
    return h;
}

inline HermitianMatrix combinatorial_laplacian(const Digraph& g, bool normalized = false) {
    return magnetic_laplacian(g, 0.0, normalized);
}

inline SpectralResult spectral_eigs(const Digraph& g, double q, bool normalized, int k) {
    SpectralResult result = hermitian_eigs(magnetic_laplacian(g, q, normalized), k);
    result.q = q;
    result.normalized = normalized;
    return result;
}

/// Toroidal coordinates: phases of the two lowest eigenvectors of the
/// normalized magnetic Laplacian, radius shrinking with the hub score.
/// Disconnected symmetrized graphs are embedded per component; vertices
/// where an eigenvector component vanishes get flagged as undefined.
struct TorusEmbedding {
    std::vector<double> theta1, theta2;      // in [0, 2 pi)
    std::vector<double> r;                   // r_minor * (1 - hub_norm) + r_floor
    std::vector<bool> defined;
    std::vector<std::array<double, 3>> xyz;  // major radius 3 torus surface
    double q = 0.0;

    static constexpr double kMinorRadius = 1.0;
    static constexpr double kFloorRadius = 0.1;
    static constexpr double kMajorRadius = 3.0;
};

namespace detail {

inline double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    if (a < 0) a += kTwoPi;
    return a;
}

}  // namespace detail

inline TorusEmbedding torus_embedding(const Digraph& g, double q, std::span<const double> hub) {
    const std::size_t n = g.n();
    if (hub.size() != n) throw std::invalid_argument("torus_embedding: hub score size mismatch");

    TorusEmbedding emb;
    emb.q = q;
    emb.theta1.assign(n, 0.0);
    emb.theta2.assign(n, 0.0);
    emb.defined.assign(n, false);
    emb.r.assign(n, TorusEmbedding::kFloorRadius + TorusEmbedding::kMinorRadius);
    emb.xyz.assign(n, {0, 0, 0});

    double hub_max = 0;
    for (double hv : hub) hub_max = std::max(hub_max, hv);
    for (std::size_t u = 0; u < n; ++u) {
        const double hub_norm = hub_max > 0 ? hub[u] / hub_max : 0.0;
        emb.r[u] = TorusEmbedding::kMinorRadius * (1.0 - hub_norm) + TorusEmbedding::kFloorRadius;
    }

    const std::vector<int> comp = symmetrized_components(g);
    const int n_comp = comp.empty() ? 0 : 1 + *std::max_element(comp.begin(), comp.end());
    for (int c = 0; c < n_comp; ++c) {
        std::vector<int> members;
        for (std::size_t u = 0; u < n; ++u)
            if (comp[u] == c) members.push_back(int(u));
        if (members.size() < 2) continue;  // a lone vertex has no defined phase
        const Digraph sub = induced_subgraph(g, members);
        const SpectralResult eig = spectral_eigs(sub, q, true, 2);
        const double norm_floor = 1e-12;
        for (std::size_t i = 0; i < members.size(); ++i) {
            const Complex z1 = eig.eigenvectors[0][i];
            const Complex z2 = eig.eigenvectors[1][i];
            const std::size_t u = std::size_t(members[i]);
            if (std::abs(z1) < norm_floor || std::abs(z2) < norm_floor) continue;
            emb.theta1[u] = detail::wrap_angle(std::arg(z1));
            emb.theta2[u] = detail::wrap_angle(std::arg(z2));
            emb.defined[u] = true;
        }
    }

    for (std::size_t u = 0; u < n; ++u) {
        if (!emb.defined[u]) {
            emb.xyz[u] = {std::nan(""), std::nan(""), std::nan("")};
            continue;
        }
        const double ring = TorusEmbedding::kMajorRadius + emb.r[u] * std::cos(emb.theta2[u]);
        emb.xyz[u] = {ring * std::cos(emb.theta1[u]), ring * std::sin(emb.theta1[u]),
                      emb.r[u] * std::sin(emb.theta2[u])};
    }
    return emb;
}

/// Frustration eta_c(theta): the synchronization objective over unordered
/// vertex pairs, normalized by 2 vol(G_s). Zero iff the angles synchronize
/// perfectly under the edge phases.
inline double frustration(const Digraph& g, double q, std::span<const double> theta) {
    const std::size_t n = g.n();
    if (theta.size() != n) throw std::invalid_argument("frustration: theta size mismatch");
    const SymDecomposition dec(g);
    const double vol = dec.volume();
    if (vol <= 0.0) throw std::invalid_argument("frustration: graph volume is zero");

    double acc = 0;
    for (std::size_t u = 0; u < n; ++u) {
        for (const auto& [v, ws] : dec.neighbors(int(u))) {
            if (std::size_t(v) <= u) continue;
            const Complex fu(std::cos(theta[u]), std::sin(theta[u]));
            const Complex fv(std::cos(theta[std::size_t(v)]), std::sin(theta[std::size_t(v)]));
            const Complex diff = fu - magnetic_phase(dec, q, int(u), v) * fv;
            acc += ws * std::norm(diff);
        }
    }
    return acc / (2.0 * vol);
}

inline std::string spectral_csv(const Digraph& g, const TorusEmbedding& emb) {
    std::string out = "vertex,theta1,theta2,r,x,y,z\n";
    for (std::size_t u = 0; u < g.n(); ++u) {
        if (emb.defined[u]) {
            out += csv_escape(g.name(int(u))) + ',' + fmt_double(emb.theta1[u]) + ',' +
                   fmt_double(emb.theta2[u]) + ',' + fmt_double(emb.r[u]) + ',' +
                   fmt_double(emb.xyz[u][0]) + ',' + fmt_double(emb.xyz[u][1]) + ',' +
                   fmt_double(emb.xyz[u][2]) + '\n';
        } else {
            out += csv_escape(g.name(int(u))) + ",nan,nan," + fmt_double(emb.r[u]) + ",nan,nan,nan\n";
        }
    }
    return out;
}

}  // namespace tabgraph
