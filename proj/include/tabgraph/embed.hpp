#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tabgraph/csv.hpp"
#include "tabgraph/digraph.hpp"
#include "tabgraph/rng.hpp"
#include "tabgraph/util.hpp"

#include <nlohmann/json.hpp>

namespace tabgraph {

struct WalkParams {
    int walk_length = 80;
    int walks_per_vertex = 10;
    double p = 1.0;       // return bias
    double q_walk = 1.0;  // in-out bias
};

struct WalkCorpus {
    std::vector<std::vector<int>> walks;
    WalkParams params;
    std::uint64_t seed = 0;
    std::size_t n_vertices = 0;
};

/// Second-order biased random walks over out-edges, transition probability
/// proportional to weight times the node2vec bias (1/p back to the previous
/// vertex, 1 to its out-neighbors, 1/q_walk otherwise). Walks truncate at
/// vertices without positive out-edges.
inline WalkCorpus generate_walks(const Digraph& g, WalkParams params, std::uint64_t seed) {
    if (g.edge_count() == 0) throw std::invalid_argument("generate_walks: graph has no edges");
    if (params.walk_length < 1 || params.walks_per_vertex < 1)
        throw std::invalid_argument("generate_walks: walk_length and walks_per_vertex must be >= 1");
    if (params.p <= 0 || params.q_walk <= 0)
        throw std::invalid_argument("generate_walks: p and q_walk must be > 0");

    WalkCorpus corpus;
    corpus.params = params;
    corpus.seed = seed;
    corpus.n_vertices = g.n();
    corpus.walks.reserve(g.n() * std::size_t(params.walks_per_vertex));

    std::vector<double> probs;
    for (int start = 0; start < int(g.n()); ++start) {
        for (int j = 0; j < params.walks_per_vertex; ++j) {
            Rng rng(derive_seed(seed, std::uint64_t(start) * 0x10001ULL + std::uint64_t(j)));
            std::vector<int> walk{start};
            int prev = -1;
            while (int(walk.size()) < params.walk_length) {
                const int cur = walk.back();
                const auto& out = g.out(cur);
                probs.clear();
                double total = 0;
                for (const auto& [next, w] : out) {
                    double bias = 1.0;
                    if (prev >= 0) {
                        if (next == prev) bias = 1.0 / params.p;
                        else if (g.has_edge(prev, next)) bias = 1.0;
                        else bias = 1.0 / params.q_walk;
                    }
                    const double mass = w * bias;
                    total += mass;
                    probs.push_back(total);
                }
                if (total <= 0.0) break;  // dead end
                const double pick = rng.next_double() * total;
                std::size_t idx = std::size_t(std::lower_bound(probs.begin(), probs.end(), pick) -
                                              probs.begin());
                if (idx >= probs.size()) idx = probs.size() - 1;
                auto it = out.begin();
                std::advance(it, std::ptrdiff_t(idx));
                prev = cur;
                walk.push_back(it->first);
            }
            corpus.walks.push_back(std::move(walk));
        }
    }
    return corpus;
}

struct SgnsParams {
    int dims = 64;
    int window = 5;
    int negative = 5;
    int epochs = 5;
    double lr = 0.025;  // linearly decayed to lr / 1e4
};

struct EmbeddingTable {
    std::size_t n = 0;
    int dims = 0;
    std::vector<double> vecs;  // row-major n x dims
    SgnsParams params;

    std::span<const double> vec(int u) const {
        return {vecs.data() + std::size_t(u) * std::size_t(dims), std::size_t(dims)};
    }
};

inline double cosine(std::span<const double> a, std::span<const double> b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na <= 0 || nb <= 0) return 0.0;
    return dot / std::sqrt(na * nb);
}

inline double cosine(const EmbeddingTable& table, int u, int v) {
    return cosine(table.vec(u), table.vec(v));
}

/// Skip-gram with negative sampling over the walk corpus. Center vectors are
/// the embedding; context vectors start at zero. Update order is fixed, so
/// training is deterministic under seed.
inline EmbeddingTable train_embeddings(const WalkCorpus& corpus, SgnsParams params,
                                       std::uint64_t seed) {
    if (corpus.walks.empty()) throw std::invalid_argument("train_embeddings: empty corpus");
    const std::size_t n = corpus.n_vertices;
    const std::size_t d = std::size_t(params.dims);

    EmbeddingTable table;
    table.n = n;
    table.dims = params.dims;
    table.params = params;
    table.vecs.assign(n * d, 0.0);
    std::vector<double> context(n * d, 0.0);

    Rng rng(derive_seed(seed, 0x516e5));
    for (double& v : table.vecs) v = (rng.next_double() - 0.5) / double(params.dims);

    // Unigram^(3/4) negative-sampling table.
    std::vector<double> counts(n, 0.0);
    std::size_t total_positions = 0;
    for (const auto& walk : corpus.walks) {
        for (const int v : walk) counts[std::size_t(v)] += 1;
        total_positions += walk.size();
    }
    std::vector<double> neg_cdf(n, 0.0);
    double acc = 0;
    for (std::size_t v = 0; v < n; ++v) {
        acc += std::pow(counts[v], 0.75);
        neg_cdf[v] = acc;
    }
    if (acc <= 0) throw std::invalid_argument("train_embeddings: corpus visits no vertices");
    auto sample_negative = [&]() -> int {
        const double pick = rng.next_double() * acc;
        return int(std::lower_bound(neg_cdf.begin(), neg_cdf.end(), pick) - neg_cdf.begin());
    };

    const double lr_floor = params.lr * 1e-4;
    const std::size_t total_steps = std::max<std::size_t>(1, total_positions * std::size_t(params.epochs));
    std::size_t step = 0;

    std::vector<double> grad_center(d);
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        for (const auto& walk : corpus.walks) {
            for (std::size_t pos = 0; pos < walk.size(); ++pos, ++step) {
                const double progress = double(step) / double(total_steps);
                const double lr = std::max(lr_floor, params.lr * (1.0 - progress));
                const int center = walk[pos];
                const int reduced = int(rng.uniform_int(1, params.window));
                const std::size_t lo = pos >= std::size_t(reduced) ? pos - std::size_t(reduced) : 0;
                const std::size_t hi = std::min(walk.size() - 1, pos + std::size_t(reduced));
                for (std::size_t cpos = lo; cpos <= hi; ++cpos) {
                    if (cpos == pos) continue;
                    const int ctx = walk[cpos];
                    std::fill(grad_center.begin(), grad_center.end(), 0.0);
                    double* wc = table.vecs.data() + std::size_t(center) * d;
                    // positive sample + params.negative negatives
                    for (int s = 0; s <= params.negative; ++s) {
                        int target;
                        double label;
                        if (s == 0) {
                            target = ctx;
                            label = 1.0;
                        } else {
                            target = sample_negative();
                            if (target == ctx) continue;
                            label = 0.0;
                        }
                        double* wt = context.data() + std::size_t(target) * d;
                        double dot = 0;
                        for (std::size_t k = 0; k < d; ++k) dot += wc[k] * wt[k];
                        const double sigma = 1.0 / (1.0 + std::exp(-dot));
                        const double gradient = (label - sigma) * lr;
                        for (std::size_t k = 0; k < d; ++k) {
                            grad_center[k] += gradient * wt[k];
                            wt[k] += gradient * wc[k];
                        }
                    }
                    for (std::size_t k = 0; k < d; ++k) wc[k] += grad_center[k];
                }
            }
        }
    }
    return table;
}

/// Vertices ranked by cosine similarity to the query, most similar first,
/// ties broken by vertex id. The query itself is excluded.
inline std::vector<std::pair<int, double>> most_similar(const EmbeddingTable& table, int vertex,
                                                        int k) {
    if (vertex < 0 || std::size_t(vertex) >= table.n)
        throw std::invalid_argument("most_similar: unknown vertex " + std::to_string(vertex));
    if (k < 0 || std::size_t(k) >= table.n)
        throw std::invalid_argument("most_similar: k must be < number of vertices");
    std::vector<std::pair<int, double>> scored;
    scored.reserve(table.n - 1);
    for (std::size_t v = 0; v < table.n; ++v) {
        if (int(v) == vertex) continue;
        scored.push_back({int(v), cosine(table, vertex, int(v))});
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    scored.resize(std::size_t(k));
    return scored;
}

inline std::string embeddings_csv(const Digraph& g, const EmbeddingTable& table) {
    std::string out = "vertex";
    for (int k = 0; k < table.dims; ++k) out += ",v" + std::to_string(k);
    out += '\n';
    for (std::size_t u = 0; u < table.n; ++u) {
        out += csv_escape(g.name(int(u)));
        const auto v = table.vec(int(u));
        for (int k = 0; k < table.dims; ++k) out += ',' + fmt_double(v[std::size_t(k)]);
        out += '\n';
    }
    return out;
}

inline nlohmann::json query_to_json(const Digraph& g, int vertex,
                                    const std::vector<std::pair<int, double>>& ranked) {
    nlohmann::json results = nlohmann::json::array();
    for (const auto& [v, sim] : ranked)
        results.push_back({{"vertex", g.name(v)}, {"cosine", sim}});
    return nlohmann::json{{"query", g.name(vertex)}, {"results", results}};
}

/// Both directions of every edge, for the CLI's symmetrized walk option.
/// Opposing weights are summed.
inline Digraph symmetrized(const Digraph& g) {
    Digraph s(g.names());
    for (const auto& e : g.edges()) {
        if (s.has_edge(e.u, e.v)) continue;
        const double w = e.w + g.weight(e.v, e.u);
        s.add_edge(e.u, e.v, w);
        s.add_edge(e.v, e.u, w);
    }
    return s;
}

}  // namespace tabgraph
