#pragma once

#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tabgraph {

struct Edge {
    int u, v;
    double w;
};

/// Weighted directed graph. No self-loops, at most one edge per ordered pair,
/// finite non-negative weights. Adjacency is kept ordered so that iteration —
/// and everything serialized from it — is deterministic.
class Digraph {
public:
    Digraph() = default;
    explicit Digraph(std::vector<std::string> names) : names_(std::move(names)), out_(names_.size()) {
        for (std::size_t i = 0; i < names_.size(); ++i) {
            for (std::size_t j = i + 1; j < names_.size(); ++j) {
                if (names_[i] == names_[j])
                    throw std::invalid_argument("Digraph: duplicate vertex name '" + names_[i] + "'");
            }
        }
    }
    explicit Digraph(std::size_t n) : out_(n) {
        names_.reserve(n);
        for (std::size_t i = 0; i < n; ++i) names_.push_back("v" + std::to_string(i));
    }

    std::size_t n() const { return names_.size(); }
    const std::string& name(int u) const { return names_[check(u)]; }
    const std::vector<std::string>& names() const { return names_; }

    int index_of(const std::string& name) const {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name) return int(i);
        return -1;
    }

    void add_edge(int u, int v, double w) {
        check(u);
        check(v);
        if (u == v) throw std::invalid_argument("Digraph: self-loop on vertex " + names_[std::size_t(u)]);
        if (!(w >= 0.0) || !std::isfinite(w))
            throw std::invalid_argument("Digraph: edge weight must be finite and >= 0");
        auto [it, inserted] = out_[std::size_t(u)].emplace(v, w);
        if (!inserted)
            throw std::invalid_argument("Digraph: duplicate edge " + names_[std::size_t(u)] + " -> " +
                                        names_[std::size_t(v)]);
    }

    bool has_edge(int u, int v) const {
        return out_[std::size_t(check(u))].count(check(v)) > 0;
    }

    /// Weight of (u, v); absent edges are weight 0.
    double weight(int u, int v) const {
        const auto& adj = out_[std::size_t(check(u))];
        auto it = adj.find(check(v));
        return it == adj.end() ? 0.0 : it->second;
    }

    const std::map<int, double>& out(int u) const { return out_[std::size_t(check(u))]; }

    std::size_t edge_count() const {
        std::size_t m = 0;
        for (const auto& adj : out_) m += adj.size();
        return m;
    }

    std::vector<Edge> edges() const {
        std::vector<Edge> es;
        es.reserve(edge_count());
        for (int u = 0; u < int(n()); ++u)
            for (const auto& [v, w] : out_[std::size_t(u)]) es.push_back({u, v, w});
        return es;
    }

    double out_strength(int u) const {
        double s = 0;
        for (const auto& [v, w] : out(u)) s += w;
        return s;
    }

    bool operator==(const Digraph& other) const {
        return names_ == other.names_ && out_ == other.out_;
    }

private:
    int check(int u) const {
        if (u < 0 || std::size_t(u) >= names_.size())
            throw std::out_of_range("Digraph: vertex index " + std::to_string(u));
        return u;
    }

    std::vector<std::string> names_;
    std::vector<std::map<int, double>> out_;
};

/// Symmetric/antisymmetric split of the weight function. `ws` is the
/// symmetrized weight; `flow(u,v)` = w(u,v) - w(v,u) is the net flow along
/// the ordered pair u -> v (twice the antisymmetric part).
class SymDecomposition {
public:
    explicit SymDecomposition(const Digraph& g) : n_(g.n()), ws_(g.n()), net_(g.n()), degree_(g.n(), 0.0) {
        for (int u = 0; u < int(n_); ++u) {
            for (const auto& [v, w] : g.out(u)) {
                const double wvu = g.weight(v, u);
                ws_[std::size_t(u)][v] = 0.5 * (w + wvu);
                net_[std::size_t(u)][v] = w - wvu;
                if (ws_[std::size_t(v)].count(u) == 0) {
                    ws_[std::size_t(v)][u] = 0.5 * (w + wvu);
                    net_[std::size_t(v)][u] = wvu - w;
                }
            }
        }
        for (std::size_t u = 0; u < n_; ++u)
            for (const auto& [v, w] : ws_[u]) degree_[u] += w;
    }

    std::size_t n() const { return n_; }

    double ws(int u, int v) const { return lookup(ws_, u, v); }
    double wa(int u, int v) const { return 0.5 * lookup(net_, u, v); }
    /// Net flow along u -> v: w(u,v) - w(v,u).
    double flow(int u, int v) const { return lookup(net_, u, v); }
    /// d(u) = sum_v ws(u, v).
    double degree(int u) const { return degree_[std::size_t(u)]; }
    double volume() const {
        double vol = 0;
        for (double d : degree_) vol += d;
        return vol;
    }
    /// Symmetrized neighbors of u with their ws weights.
    const std::map<int, double>& neighbors(int u) const { return ws_[std::size_t(u)]; }

private:
    double lookup(const std::vector<std::map<int, double>>& m, int u, int v) const {
        const auto& adj = m[std::size_t(u)];
        auto it = adj.find(v);
        return it == adj.end() ? 0.0 : it->second;
    }

    std::size_t n_;
    std::vector<std::map<int, double>> ws_, net_;
    std::vector<double> degree_;
};

inline SymDecomposition decompose(const Digraph& g) { return SymDecomposition(g); }

inline Digraph induced_subgraph(const Digraph& g, std::span<const int> vertices) {
    if (vertices.empty()) throw std::invalid_argument("induced_subgraph: empty vertex subset");
    std::vector<int> remap(g.n(), -1);
    std::vector<std::string> names;
    names.reserve(vertices.size());
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        const int u = vertices[i];
        if (u < 0 || std::size_t(u) >= g.n())
            throw std::out_of_range("induced_subgraph: vertex index " + std::to_string(u));
        if (remap[std::size_t(u)] != -1)
            throw std::invalid_argument("induced_subgraph: duplicate vertex in subset");
        remap[std::size_t(u)] = int(i);
        names.push_back(g.name(u));
    }
    Digraph sub(std::move(names));
    for (const int u : vertices) {
        for (const auto& [v, w] : g.out(u)) {
            if (remap[std::size_t(v)] != -1) sub.add_edge(remap[std::size_t(u)], remap[std::size_t(v)], w);
        }
    }
    return sub;
}

/// Connected components of the symmetrized graph (edges in either direction).
inline std::vector<int> symmetrized_components(const Digraph& g) {
    std::vector<std::vector<int>> adj(g.n());
    for (const auto& e : g.edges()) {
        adj[std::size_t(e.u)].push_back(e.v);
        adj[std::size_t(e.v)].push_back(e.u);
    }
    std::vector<int> comp(g.n(), -1);
    int next = 0;
    std::vector<int> stack;
    for (int s = 0; s < int(g.n()); ++s) {
        if (comp[std::size_t(s)] != -1) continue;
        comp[std::size_t(s)] = next;
        stack.push_back(s);
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v : adj[std::size_t(u)]) {
                if (comp[std::size_t(v)] == -1) {
                    comp[std::size_t(v)] = next;
                    stack.push_back(v);
                }
            }
        }
        ++next;
    }
    return comp;
}

}  // namespace tabgraph
