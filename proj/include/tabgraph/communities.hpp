#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tabgraph/digraph.hpp"
#include "tabgraph/rng.hpp"

#include <nlohmann/json.hpp>

namespace tabgraph {

/// Nested block assignments: level 0 maps vertices to blocks, level l >= 1
/// maps level-(l-1) blocks to coarser blocks; the top level has one block.
struct HierPartition {
    std::vector<std::vector<int>> levels;
    double description_length = 0.0;

    std::vector<int> b_per_level() const {
        std::vector<int> out;
        for (const auto& lvl : levels)
            out.push_back(lvl.empty() ? 0 : 1 + *std::max_element(lvl.begin(), lvl.end()));
        return out;
    }

    /// Level-l blocks projected down to vertex granularity.
    std::vector<int> project_to_vertices(std::size_t level) const {
        std::vector<int> out = levels.at(0);
        for (std::size_t l = 1; l <= level; ++l)
            for (int& b : out) b = levels[l][std::size_t(b)];
        return out;
    }

    nlohmann::json to_json() const {
        return nlohmann::json{{"levels", levels},
                              {"description_length", description_length},
                              {"b_per_level", b_per_level()}};
    }
    static HierPartition from_json(const nlohmann::json& j) {
        HierPartition p;
        p.levels = j.at("levels").get<std::vector<std::vector<int>>>();
        p.description_length = j.at("description_length").get<double>();
        return p;
    }
};

struct SbmScoreParts {
    std::vector<double> level_likelihood;  // nats
    std::vector<double> level_prior;
    double total() const {
        double t = 0;
        for (double v : level_likelihood) t += v;
        for (double v : level_prior) t += v;
        return t;
    }
};

/// Integer-count directed multigraph (self-loops appear at levels >= 1).
struct Multigraph {
    int n = 0;
    std::vector<std::map<int, long long>> out;  // out[u][v] = multiplicity
    long long total_edges = 0;

    explicit Multigraph(int n_ = 0) : n(n_), out(std::size_t(n_)) {}

    void add(int u, int v, long long m) {
        if (m <= 0) return;
        out[std::size_t(u)][v] += m;
        total_edges += m;
    }

    Multigraph contract(const std::vector<int>& assignment, int n_blocks) const {
        Multigraph coarse(n_blocks);
        for (int u = 0; u < n; ++u)
            for (const auto& [v, m] : out[std::size_t(u)])
                coarse.add(assignment[std::size_t(u)], assignment[std::size_t(v)], m);
        return coarse;
    }
};

/// Weighted graph -> multigraph. Integer weight sets are used as-is;
/// otherwise weights are scaled so the maximum maps to multiplicity 20.
inline Multigraph quantize(const Digraph& g, double target_max = 20.0) {
    Multigraph m(int(g.n()));
    double max_w = 0;
    bool all_integer = true;
    for (const auto& e : g.edges()) {
        max_w = std::max(max_w, e.w);
        if (std::abs(e.w - double(std::llround(e.w))) > 1e-9) all_integer = false;
    }
    if (max_w <= 0.0) return m;
    const double scale = all_integer ? 1.0 : target_max / max_w;
    for (const auto& e : g.edges()) m.add(e.u, e.v, std::llround(e.w * scale));
    return m;
}

namespace detail {

/// ln k! over non-negative integers, memoized; every DL term needs it.
class LgammaCache {
public:
    double ln_factorial(long long k) {
        if (std::size_t(k) >= table_.size()) grow(std::size_t(k) + 1);
        return table_[std::size_t(k)];
    }
    /// ln of the multiset coefficient ((n, m)) = C(n + m - 1, m).
    double ln_multiset(long long n, long long m) {
        if (m == 0) return 0.0;
        return ln_factorial(n + m - 1) - ln_factorial(m) - ln_factorial(n - 1);
    }
    double ln_binom(long long n, long long k) {
        return ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k);
    }

private:
    void grow(std::size_t upto) {
        std::size_t want = std::max<std::size_t>(upto, table_.empty() ? 1024 : table_.size() * 2);
        std::size_t start = table_.size();
        if (start == 0) {
            table_.push_back(0.0);
            start = 1;
        }
        table_.resize(want);
        for (std::size_t k = start; k < want; ++k) table_[k] = table_[k - 1] + std::log(double(k));
    }
    std::vector<double> table_;
};

/// One hierarchy level of the SBM objective over a fixed multigraph.
/// Level 0 scores the microcanonical placement likelihood of the graph;
/// upper levels score the finer block matrix with uniform multiset counts.
/// The objective closes the hierarchy with an implicit all-in-one top level.
class SbmState {
public:
    SbmState(const Multigraph& g, bool multiset_likelihood, LgammaCache& lg,
             const std::vector<int>* assignment = nullptr)
        : g_(&g), multiset_(multiset_likelihood), lg_(&lg), n_(g.n) {
        if (assignment) {
            block_ = *assignment;
            if (int(block_.size()) != n_) throw std::invalid_argument("SbmState: assignment size");
        } else {
            block_.resize(std::size_t(n_));
            std::iota(block_.begin(), block_.end(), 0);
        }
        block_size_.assign(std::size_t(n_), 0);
        for (int v = 0; v < n_; ++v) {
            const int b = block_[std::size_t(v)];
            if (b < 0 || b >= n_) throw std::invalid_argument("SbmState: block id out of range");
            ++block_size_[std::size_t(b)];
        }
        live_ = 0;
        for (const long long s : block_size_)
            if (s > 0) ++live_;
        e_.assign(std::size_t(n_) * std::size_t(n_), 0);
        in_.resize(std::size_t(n_));
        for (int u = 0; u < n_; ++u) {
            for (const auto& [v, m] : g.out[std::size_t(u)]) {
                e_ref(block_[std::size_t(u)], block_[std::size_t(v)]) += m;
                in_[std::size_t(v)].emplace_back(u, m);
            }
        }
        const_term_ = 0.0;
        if (!multiset_) {
            for (int u = 0; u < n_; ++u)
                for (const auto& [v, m] : g.out[std::size_t(u)]) const_term_ += lg_->ln_factorial(m);
        }
    }

    int n_blocks() const { return live_; }
    int n_vertices() const { return n_; }
    long long block_of(int v) const { return block_[std::size_t(v)]; }

    double likelihood() const {
        double acc = multiset_ ? 0.0 : const_term_;
        for (int r = 0; r < n_; ++r) {
            if (bs(r) == 0) continue;
            for (int s = 0; s < n_; ++s) {
                if (bs(s) == 0) continue;
                acc += cell_term(e_at(r, s), bs(r), bs(s));
            }
        }
        return acc;
    }

    double partition_prior() const {
        double acc = std::log(double(n_));
        acc += lg_->ln_binom(n_ - 1, live_ - 1);
        acc += lg_->ln_factorial(n_);
        for (int r = 0; r < n_; ++r)
            if (bs(r) > 0) acc -= lg_->ln_factorial(bs(r));
        return acc;
    }

    double objective() const { return likelihood() + partition_prior() + closure(live_); }

    /// Objective change if vertex v moves to block `to`. Moves that would
    /// empty a block are rejected (that path belongs to merges).
    double move_delta(int v, int to) const {
        const int from = block_[std::size_t(v)];
        if (to == from || bs(to) == 0) return std::numeric_limits<double>::infinity();
        if (bs(from) == 1) return std::numeric_limits<double>::infinity();

        const auto edge_moves = edge_deltas(v, from, to);
        double delta = 0;
        // All cells in rows/columns {from, to} are touched (their block sizes
        // change); cells hit by v's edges are a subset of those.
        for (int x = 0; x < n_; ++x) {
            if (bs(x) == 0) continue;
            const bool corner = x == from || x == to;
            for (const int r : {from, to}) {
                delta += cell_delta(r, x, edge_moves, from, to);
                if (!corner) delta += cell_delta(x, r, edge_moves, from, to);
            }
            if (corner) continue;
        }
        // prior: sizes change, B stays.
        delta += lg_->ln_factorial(bs(from)) - lg_->ln_factorial(bs(from) - 1);
        delta += lg_->ln_factorial(bs(to)) - lg_->ln_factorial(bs(to) + 1);
        return delta;
    }

    void apply_move(int v, int to) {
        const int from = block_[std::size_t(v)];
        if (to == from) return;
        for (const auto& [cell, dm] : edge_deltas(v, from, to)) e_ref(cell.first, cell.second) += dm;
        --block_size_[std::size_t(from)];
        ++block_size_[std::size_t(to)];
        block_[std::size_t(v)] = to;
    }

    /// Objective change if block r merges into block s.
    double merge_delta(int r, int s) const {
        if (r == s || bs(r) == 0 || bs(s) == 0) return std::numeric_limits<double>::infinity();
        double delta = 0;
        for (int x = 0; x < n_; ++x) {
            if (bs(x) == 0 || x == r || x == s) continue;
            delta -= cell_term(e_at(r, x), bs(r), bs(x)) + cell_term(e_at(x, r), bs(x), bs(r));
            delta -= cell_term(e_at(s, x), bs(s), bs(x)) + cell_term(e_at(x, s), bs(x), bs(s));
            delta += cell_term(e_at(r, x) + e_at(s, x), bs(r) + bs(s), bs(x));
            delta += cell_term(e_at(x, r) + e_at(x, s), bs(x), bs(r) + bs(s));
        }
        const long long corner = e_at(r, r) + e_at(r, s) + e_at(s, r) + e_at(s, s);
        delta -= cell_term(e_at(r, r), bs(r), bs(r)) + cell_term(e_at(r, s), bs(r), bs(s)) +
                 cell_term(e_at(s, r), bs(s), bs(r)) + cell_term(e_at(s, s), bs(s), bs(s));
        delta += cell_term(corner, bs(r) + bs(s), bs(r) + bs(s));

        delta += lg_->ln_binom(n_ - 1, live_ - 2) - lg_->ln_binom(n_ - 1, live_ - 1);
        delta += lg_->ln_factorial(bs(r)) + lg_->ln_factorial(bs(s)) -
                 lg_->ln_factorial(bs(r) + bs(s));
        delta += closure(live_ - 1) - closure(live_);
        return delta;
    }

    void apply_merge(int r, int s) {
        for (int x = 0; x < n_; ++x) {
            if (x == r) continue;
            e_ref(s, x) += e_at(r, x);
            e_ref(r, x) = 0;
            e_ref(x, s) += e_at(x, r);
            e_ref(x, r) = 0;
        }
        e_ref(s, s) += e_at(r, r);
        e_ref(r, r) = 0;
        block_size_[std::size_t(s)] += block_size_[std::size_t(r)];
        block_size_[std::size_t(r)] = 0;
        for (int v = 0; v < n_; ++v)
            if (block_[std::size_t(v)] == r) block_[std::size_t(v)] = s;
        --live_;
    }

    /// Labels compacted to 0..B-1 in label order.
    std::vector<int> compact_assignment() const {
        std::vector<int> remap(std::size_t(n_), -1);
        int next = 0;
        for (int r = 0; r < n_; ++r)
            if (bs(r) > 0) remap[std::size_t(r)] = next++;
        std::vector<int> out(static_cast<std::size_t>(n_), 0);
        for (int v = 0; v < n_; ++v) out[std::size_t(v)] = remap[std::size_t(block_[std::size_t(v)])];
        return out;
    }

    std::vector<int> live_blocks() const {
        std::vector<int> out;
        for (int r = 0; r < n_; ++r)
            if (bs(r) > 0) out.push_back(r);
        return out;
    }

private:
    using CellDelta = std::vector<std::pair<std::pair<int, int>, long long>>;

    long long bs(int r) const { return block_size_[std::size_t(r)]; }
    long long e_at(int r, int s) const { return e_[std::size_t(r) * std::size_t(n_) + std::size_t(s)]; }
    long long& e_ref(int r, int s) { return e_[std::size_t(r) * std::size_t(n_) + std::size_t(s)]; }

    double cell_term(long long e, long long nr, long long ns) const {
        if (nr == 0 || ns == 0) return 0.0;
        if (multiset_) return lg_->ln_multiset(nr * ns, e);
        if (e == 0) return 0.0;
        return double(e) * std::log(double(nr) * double(ns)) - lg_->ln_factorial(e);
    }

    double closure(int b) const {
        if (b <= 1) return 0.0;
        return lg_->ln_multiset(static_cast<long long>(b) * b, g_->total_edges) + std::log(double(b));
    }

    /// e-matrix increments caused by moving v from `from` to `to`.
    CellDelta edge_deltas(int v, int from, int to) const {
        CellDelta d;
        for (const auto& [w, m] : g_->out[std::size_t(v)]) {
            if (w == v) {
                push(d, from, from, -m);
                push(d, to, to, m);
            } else {
                const int bw = block_[std::size_t(w)];
                push(d, from, bw, -m);
                push(d, to, bw, m);
            }
        }
        for (const auto& [u, m] : in_[std::size_t(v)]) {
            if (u == v) continue;  // handled as a self-loop above
            const int bu = block_[std::size_t(u)];
            push(d, bu, from, -m);
            push(d, bu, to, m);
        }
        return d;
    }

    static void push(CellDelta& d, int r, int s, long long m) {
        for (auto& [cell, dm] : d) {
            if (cell.first == r && cell.second == s) {
                dm += m;
                return;
            }
        }
        d.push_back({{r, s}, m});
    }

    static long long lookup(const CellDelta& d, int r, int s) {
        for (const auto& [cell, dm] : d)
            if (cell.first == r && cell.second == s) return dm;
        return 0;
    }

    /// New-minus-old term of one cell under the move's size and count changes.
    double cell_delta(int r, int s, const CellDelta& edge_moves, int from, int to) const {
        const long long nr = bs(r) + (r == from ? -1 : 0) + (r == to ? 1 : 0);
        const long long ns = bs(s) + (s == from ? -1 : 0) + (s == to ? 1 : 0);
        const long long e_new = e_at(r, s) + lookup(edge_moves, r, s);
        return cell_term(e_new, nr, ns) - cell_term(e_at(r, s), bs(r), bs(s));
    }

    const Multigraph* g_;
    bool multiset_;
    LgammaCache* lg_;
    int n_;
    int live_ = 0;
    double const_term_ = 0.0;
    std::vector<int> block_;
    std::vector<long long> block_size_;
    std::vector<long long> e_;
    std::vector<std::vector<std::pair<int, long long>>> in_;
};

}  // namespace detail

namespace detail {

inline void validate_partition(const Multigraph& g, const std::vector<std::vector<int>>& levels) {
    if (levels.empty()) throw std::invalid_argument("partition: no levels");
    std::size_t expected = std::size_t(g.n);
    for (std::size_t l = 0; l < levels.size(); ++l) {
        if (levels[l].size() != expected)
            throw std::invalid_argument("partition: level " + std::to_string(l) + " has " +
                                        std::to_string(levels[l].size()) + " entries, expected " +
                                        std::to_string(expected));
        const int b = levels[l].empty() ? 0 : 1 + *std::max_element(levels[l].begin(), levels[l].end());
        std::vector<bool> seen(std::size_t(b), false);
        for (const int x : levels[l]) {
            if (x < 0 || x >= b) throw std::invalid_argument("partition: negative block id");
            seen[std::size_t(x)] = true;
        }
        for (const bool s : seen)
            if (!s) throw std::invalid_argument("partition: block ids are not contiguous");
        if (b > int(expected)) throw std::invalid_argument("partition: more blocks than items");
        expected = std::size_t(b);
    }
    if (expected != 1) throw std::invalid_argument("partition: top level must have one block");
}

inline SbmScoreParts score_parts_multigraph(const Multigraph& g0,
                                            const std::vector<std::vector<int>>& levels,
                                            LgammaCache& lg) {
    validate_partition(g0, levels);
    SbmScoreParts parts;
    Multigraph current = g0;
    for (std::size_t l = 0; l < levels.size(); ++l) {
        SbmState state(current, l > 0, lg, &levels[l]);
        parts.level_likelihood.push_back(state.likelihood());
        parts.level_prior.push_back(state.partition_prior());
        const int b = 1 + *std::max_element(levels[l].begin(), levels[l].end());
        if (l + 1 < levels.size()) current = current.contract(levels[l], b);
    }
    return parts;
}

}  // namespace detail

/// Per-level DL terms; their sum is the description length.
inline SbmScoreParts score_parts(const Digraph& g, const HierPartition& part) {
    detail::LgammaCache lg;
    return detail::score_parts_multigraph(quantize(g), part.levels, lg);
}

/// Description length of (graph, nested partition): the microcanonical
/// directed SBM likelihood at level 0, multiset block-matrix encodings at the
/// upper levels, and a partition prior per level. Lower is better; equals
/// -ln P(G, b) up to partition-independent constants.
inline double description_length(const Digraph& g, const HierPartition& part) {
    return score_parts(g, part).total();
}

struct NsbmParams {
    int n_sweeps = 1000;           // cap on Metropolis sweeps per plateau
    int agglomeration_factor = 2;  // halving factor per agglomeration round
    int patience = 15;             // sweeps without improvement before moving on
};

/// Instrumentation for the inference loop: every accepted move's claimed
/// delta, and the gap between incrementally tracked and recomputed
/// objectives (one entry per plateau).
struct InferTrace {
    struct Move {
        char kind;  // 'g' greedy accept, 's' stochastic accept, 'm' agglomerative merge
        double delta;
    };
    std::vector<Move> moves;
    double max_incremental_error = 0.0;
};

namespace detail {

struct LevelResult {
    std::vector<int> assignment;  // compacted
    int n_blocks = 0;
};

inline LevelResult infer_level(const Multigraph& g, bool multiset, std::uint64_t seed,
                               const NsbmParams& params, LgammaCache& lg, InferTrace* trace) {
    LevelResult result;
    if (g.n == 1) {
        result.assignment = {0};
        result.n_blocks = 1;
        return result;
    }

    Rng rng(seed);
    SbmState state(g, multiset, lg);
    double current = state.objective();

    std::vector<int> best_assignment = state.compact_assignment();
    double best_obj = current;
    int best_blocks = state.n_blocks();

    auto note_best = [&] {
        if (current < best_obj - 1e-12) {
            best_obj = current;
            best_assignment = state.compact_assignment();
            best_blocks = state.n_blocks();
        }
    };

    std::vector<int> order(std::size_t(g.n));
    std::iota(order.begin(), order.end(), 0);

    while (state.n_blocks() > 1) {
        // Agglomeration round: halve the live block count while it is large,
        // then step one block at a time so every small B gets evaluated.
        const int b_now = state.n_blocks();
        const int target = b_now > 16 ? std::max(16, b_now / std::max(2, params.agglomeration_factor))
                                      : b_now - 1;
        struct Candidate {
            double delta;
            int r, s;
        };
        std::vector<Candidate> candidates;
        {
            const std::vector<int> live = state.live_blocks();
            for (std::size_t i = 0; i < live.size(); ++i)
                for (std::size_t j = i + 1; j < live.size(); ++j)
                    candidates.push_back({state.merge_delta(live[i], live[j]), live[i], live[j]});
            std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
                if (a.delta != b.delta) return a.delta < b.delta;
                return a.r != b.r ? a.r < b.r : a.s < b.s;
            });
        }
        std::vector<bool> stale(std::size_t(g.n), false);
        for (const auto& cand : candidates) {
            if (state.n_blocks() <= target) break;
            if (stale[std::size_t(cand.r)] || stale[std::size_t(cand.s)]) continue;
            const double delta = state.merge_delta(cand.r, cand.s);  // fresh value
            state.apply_merge(cand.r, cand.s);
            current += delta;
            stale[std::size_t(cand.r)] = stale[std::size_t(cand.s)] = true;
            if (trace) trace->moves.push_back({'m', delta});
        }
        note_best();

        // Metropolis refinement at this plateau.
        if (state.n_blocks() > 1) {
            const std::vector<int> live = state.live_blocks();
            double plateau_best = current;
            int since_improvement = 0;
            for (int sweep = 0; sweep < params.n_sweeps && since_improvement < params.patience; ++sweep) {
                for (std::size_t i = order.size(); i > 1; --i)
                    std::swap(order[i - 1], order[std::size_t(rng.uniform_int(0, std::int64_t(i) - 1))]);
                for (const int v : order) {
                    int to;
                    const auto& out_v = g.out[std::size_t(v)];
                    if (!out_v.empty() && rng.next_double() < 0.5) {
                        auto it = out_v.begin();
                        std::advance(it, rng.uniform_int(0, std::int64_t(out_v.size()) - 1));
                        to = int(state.block_of(it->first));
                    } else {
                        to = live[std::size_t(rng.uniform_int(0, std::int64_t(live.size()) - 1))];
                    }
                    if (to == state.block_of(v)) continue;
                    const double delta = state.move_delta(v, to);
                    if (!std::isfinite(delta)) continue;
                    if (delta <= 0) {
                        state.apply_move(v, to);
                        current += delta;
                        if (trace) trace->moves.push_back({'g', delta});
                    } else if (rng.next_double() < std::exp(-delta)) {
                        state.apply_move(v, to);
                        current += delta;
                        if (trace) trace->moves.push_back({'s', delta});
                    }
                }
                if (current < plateau_best - 1e-9) {
                    plateau_best = current;
                    since_improvement = 0;
                } else {
                    ++since_improvement;
                }
                note_best();
            }
        }

        if (trace) {
            const double recomputed = state.objective();
            trace->max_incremental_error =
                std::max(trace->max_incremental_error, std::abs(recomputed - current));
        }
        current = state.objective();  // resynchronize before the next round
    }
    note_best();

    result.assignment = std::move(best_assignment);
    result.n_blocks = best_blocks;
    return result;
}

}  // namespace detail

/// Greedy agglomerative nSBM with single-vertex Metropolis refinement,
/// recursing on block multigraphs until a single block remains. Deterministic
/// under seed. Returns the best-DL hierarchy found.
inline HierPartition infer_nsbm(const Digraph& g, std::uint64_t seed, NsbmParams params = {},
                                InferTrace* trace = nullptr) {
    if (g.n() == 0) throw std::invalid_argument("infer_nsbm: empty graph");
    detail::LgammaCache lg;
    const Multigraph m0 = quantize(g);

    HierPartition part;
    Multigraph current = m0;
    bool multiset = false;
    int level = 0;
    for (;;) {
        const detail::LevelResult res =
            detail::infer_level(current, multiset, derive_seed(seed, std::uint64_t(level)), params,
                                lg, trace);
        part.levels.push_back(res.assignment);
        if (res.n_blocks == 1) break;
        if (res.n_blocks == current.n) {
            // No reduction found; close the hierarchy explicitly.
            part.levels.push_back(std::vector<int>(std::size_t(res.n_blocks), 0));
            break;
        }
        current = current.contract(res.assignment, res.n_blocks);
        multiset = true;
        ++level;
    }
    part.description_length = detail::score_parts_multigraph(m0, part.levels, lg).total();
    return part;
}

/// Normalized mutual information with arithmetic-mean normalization; 0 by
/// convention when both partitions carry no information.
inline double nmi(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("nmi: partitions cover different sets");
    if (a.empty()) throw std::invalid_argument("nmi: empty partitions");
    const double n = double(a.size());
    std::map<int, double> ca, cb;
    std::map<std::pair<int, int>, double> joint;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ca[a[i]] += 1;
        cb[b[i]] += 1;
        joint[{a[i], b[i]}] += 1;
    }
    auto entropy = [&](const std::map<int, double>& counts) {
        double h = 0;
        for (const auto& [_, c] : counts) {
            const double p = c / n;
            h -= p * std::log(p);
        }
        return h;
    };
    const double ha = entropy(ca), hb = entropy(cb);
    if (ha + hb == 0.0) return 0.0;
    double mi = 0;
    for (const auto& [cell, c] : joint) {
        const double pxy = c / n;
        const double px = ca[cell.first] / n;
        const double py = cb[cell.second] / n;
        mi += pxy * std::log(pxy / (px * py));
    }
    const double value = mi / (0.5 * (ha + hb));
    return std::clamp(value, 0.0, 1.0);
}

}  // namespace tabgraph
