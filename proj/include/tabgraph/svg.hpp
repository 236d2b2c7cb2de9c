#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "tabgraph/communities.hpp"
#include "tabgraph/digraph.hpp"
#include "tabgraph/spectral.hpp"

namespace tabgraph {

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

inline const char* palette(int i) {
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return colors[std::size_t(i % 10)];
}

inline std::string svg_escape_text(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out += c;
    }
    return out;
}

}  // namespace detail

/// Force-directed graph drawing: edges shaded by weight, vertices colored by
/// an optional group id.
inline std::string svg_graph_layout(const Digraph& g,
                                    const std::vector<std::array<double, 2>>& pos,
                                    const std::vector<int>* groups = nullptr, int size = 640) {
    const double pad = 40;
    const double span = size - 2 * pad;
    auto sx = [&](double x) { return pad + x * span; };
    auto sy = [&](double y) { return pad + (1.0 - y) * span; };

    double max_w = 0;
    for (const auto& e : g.edges()) max_w = std::max(max_w, e.w);

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(size) +
                      "\" height=\"" + std::to_string(size) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (const auto& e : g.edges()) {
        const double opacity = max_w > 0 ? 0.15 + 0.75 * (e.w / max_w) : 0.5;
        svg += "<line x1=\"" + detail::svg_num(sx(pos[std::size_t(e.u)][0])) + "\" y1=\"" +
               detail::svg_num(sy(pos[std::size_t(e.u)][1])) + "\" x2=\"" +
               detail::svg_num(sx(pos[std::size_t(e.v)][0])) + "\" y2=\"" +
               detail::svg_num(sy(pos[std::size_t(e.v)][1])) + "\" stroke=\"#555\" stroke-opacity=\"" +
               detail::svg_num(opacity) + "\" stroke-width=\"1\"/>\n";
    }
    for (std::size_t u = 0; u < g.n(); ++u) {
        const char* fill = groups ? detail::palette((*groups)[u]) : "#1f77b4";
        svg += "<circle cx=\"" + detail::svg_num(sx(pos[u][0])) + "\" cy=\"" +
               detail::svg_num(sy(pos[u][1])) + "\" r=\"5\" fill=\"" + fill + "\"/>\n";
        svg += "<text x=\"" + detail::svg_num(sx(pos[u][0]) + 7) + "\" y=\"" +
               detail::svg_num(sy(pos[u][1]) + 3) + "\" font-size=\"9\" fill=\"#333\">" +
               detail::svg_escape_text(g.name(int(u))) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

/// Scatter of the toroidal embedding: a tilted orthographic projection of the
/// 3-D torus coordinates. Vertices with undefined phases are omitted.
inline std::string svg_torus(const Digraph& g, const TorusEmbedding& emb,
                             const std::vector<int>* groups = nullptr, int size = 640) {
    const double half = size / 2.0;
    const double scale = (half - 40) / (TorusEmbedding::kMajorRadius + TorusEmbedding::kMinorRadius +
                                        TorusEmbedding::kFloorRadius);
    const double tilt = 0.55;
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(size) +
                      "\" height=\"" + std::to_string(size) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t u = 0; u < g.n(); ++u) {
        if (!emb.defined[u]) continue;
        const auto& p = emb.xyz[u];
        const double px = half + scale * p[0];
        const double py = half - scale * (tilt * p[1] + 0.83 * p[2]);
        const char* fill = groups ? detail::palette((*groups)[u]) : "#1f77b4";
        svg += "<circle cx=\"" + detail::svg_num(px) + "\" cy=\"" + detail::svg_num(py) +
               "\" r=\"5\" fill=\"" + fill + "\" fill-opacity=\"0.9\"/>\n";
        svg += "<text x=\"" + detail::svg_num(px + 7) + "\" y=\"" + detail::svg_num(py + 3) +
               "\" font-size=\"9\" fill=\"#333\">" + detail::svg_escape_text(g.name(int(u))) +
               "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

/// Radial hierarchy view: vertices on the outer circle ordered by their block
/// path, chords for edges, and the block tree drawn toward the center.
inline std::string svg_radial_hierarchy(const Digraph& g, const HierPartition& part,
                                        int size = 720) {
    const std::size_t n = g.n();
    const double cx = size / 2.0, cy = size / 2.0;
    const double r_outer = size / 2.0 - 60;
    const std::size_t n_levels = part.levels.size();

    // Order vertices by their top-down block path.
    std::vector<std::vector<int>> paths(n);
    for (std::size_t u = 0; u < n; ++u) {
        std::vector<int> path;
        int b = part.levels[0][u];
        path.push_back(b);
        for (std::size_t l = 1; l < n_levels; ++l) {
            b = part.levels[l][std::size_t(b)];
            path.push_back(b);
        }
        std::reverse(path.begin(), path.end());
        paths[u] = std::move(path);
    }
    std::vector<int> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = int(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (paths[std::size_t(a)] != paths[std::size_t(b)]) return paths[std::size_t(a)] < paths[std::size_t(b)];
        return a < b;
    });

    std::vector<double> angle(n);
    for (std::size_t i = 0; i < n; ++i)
        angle[std::size_t(order[i])] = kTwoPi * double(i) / double(n);

    auto px = [&](double r, double a) { return cx + r * std::cos(a); };
    auto py = [&](double r, double a) { return cy + r * std::sin(a); };

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(size) +
                      "\" height=\"" + std::to_string(size) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    double max_w = 0;
    for (const auto& e : g.edges()) max_w = std::max(max_w, e.w);
    for (const auto& e : g.edges()) {
        const double opacity = max_w > 0 ? 0.08 + 0.5 * (e.w / max_w) : 0.3;
        svg += "<line x1=\"" + detail::svg_num(px(r_outer, angle[std::size_t(e.u)])) + "\" y1=\"" +
               detail::svg_num(py(r_outer, angle[std::size_t(e.u)])) + "\" x2=\"" +
               detail::svg_num(px(r_outer, angle[std::size_t(e.v)])) + "\" y2=\"" +
               detail::svg_num(py(r_outer, angle[std::size_t(e.v)])) + "\" stroke=\"#777\" stroke-opacity=\"" +
               detail::svg_num(opacity) + "\" stroke-width=\"0.8\"/>\n";
    }

    // Block centroids per level, connected child -> parent.
    std::vector<std::vector<double>> block_angle(n_levels);
    for (std::size_t l = 0; l < n_levels; ++l) {
        const std::vector<int> proj = part.project_to_vertices(l);
        const int b_count = 1 + *std::max_element(proj.begin(), proj.end());
        std::vector<double> sin_acc(std::size_t(b_count), 0.0), cos_acc(std::size_t(b_count), 0.0);
        for (std::size_t u = 0; u < n; ++u) {
            sin_acc[std::size_t(proj[u])] += std::sin(angle[u]);
            cos_acc[std::size_t(proj[u])] += std::cos(angle[u]);
        }
        block_angle[l].resize(std::size_t(b_count));
        for (int b = 0; b < b_count; ++b)
            block_angle[l][std::size_t(b)] = std::atan2(sin_acc[std::size_t(b)], cos_acc[std::size_t(b)]);
    }
    auto level_radius = [&](std::size_t l) {
        return r_outer * (1.0 - double(l + 1) / double(n_levels + 1));
    };
    for (std::size_t u = 0; u < n; ++u) {
        svg += "<line x1=\"" + detail::svg_num(px(r_outer, angle[u])) + "\" y1=\"" +
               detail::svg_num(py(r_outer, angle[u])) + "\" x2=\"" +
               detail::svg_num(px(level_radius(0), block_angle[0][std::size_t(part.levels[0][u])])) +
               "\" y2=\"" +
               detail::svg_num(py(level_radius(0), block_angle[0][std::size_t(part.levels[0][u])])) +
               "\" stroke=\"#bbb\" stroke-width=\"0.6\"/>\n";
    }
    for (std::size_t l = 0; l + 1 < n_levels; ++l) {
        for (std::size_t b = 0; b < block_angle[l].size(); ++b) {
            const int parent = part.levels[l + 1][b];
            svg += "<line x1=\"" + detail::svg_num(px(level_radius(l), block_angle[l][b])) + "\" y1=\"" +
                   detail::svg_num(py(level_radius(l), block_angle[l][b])) + "\" x2=\"" +
                   detail::svg_num(px(level_radius(l + 1), block_angle[l + 1][std::size_t(parent)])) +
                   "\" y2=\"" +
                   detail::svg_num(py(level_radius(l + 1), block_angle[l + 1][std::size_t(parent)])) +
                   "\" stroke=\"#888\" stroke-width=\"1\"/>\n";
        }
    }
    for (std::size_t l = 0; l < n_levels; ++l)
        for (std::size_t b = 0; b < block_angle[l].size(); ++b)
            svg += "<circle cx=\"" + detail::svg_num(px(level_radius(l), block_angle[l][b])) +
                   "\" cy=\"" + detail::svg_num(py(level_radius(l), block_angle[l][b])) +
                   "\" r=\"3\" fill=\"#444\"/>\n";

    for (std::size_t u = 0; u < n; ++u) {
        svg += "<circle cx=\"" + detail::svg_num(px(r_outer, angle[u])) + "\" cy=\"" +
               detail::svg_num(py(r_outer, angle[u])) + "\" r=\"5\" fill=\"" +
               detail::palette(part.levels[0][u]) + "\"/>\n";
        const double a = angle[u];
        svg += "<text x=\"" + detail::svg_num(px(r_outer + 9, a)) + "\" y=\"" +
               detail::svg_num(py(r_outer + 9, a) + 3) + "\" font-size=\"9\" fill=\"#333\">" +
               detail::svg_escape_text(g.name(int(u))) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace tabgraph
