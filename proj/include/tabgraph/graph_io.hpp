#pragma once

#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tabgraph/digraph.hpp"
#include "tabgraph/util.hpp"

#include <nlohmann/json.hpp>

namespace tabgraph {

struct GraphParseError : std::runtime_error {
    GraphParseError(const std::string& msg, std::size_t line_)
        : std::runtime_error(msg + " (line " + std::to_string(line_) + ")"), line(line_) {}
    std::size_t line;
};

enum class GraphFormat { Json, GraphML, Dot };

inline GraphFormat graph_format_from_string(std::string_view s) {
    if (s == "json") return GraphFormat::Json;
    if (s == "graphml") return GraphFormat::GraphML;
    if (s == "dot") return GraphFormat::Dot;
    throw std::invalid_argument("unknown graph format: " + std::string(s));
}

// ---- JSON ----------------------------------------------------------------
// Schema: {"vertices": [names...], "edges": [[u, v, w], ...]}

inline nlohmann::json graph_to_json(const Digraph& g) {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : g.edges()) edges.push_back(nlohmann::json::array({e.u, e.v, e.w}));
    return nlohmann::json{{"vertices", g.names()}, {"edges", edges}};
}

inline Digraph graph_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("vertices") || !j.contains("edges"))
        throw std::runtime_error("graph JSON: expected object with 'vertices' and 'edges'");
    Digraph g(j.at("vertices").get<std::vector<std::string>>());
    for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 3)
            throw std::runtime_error("graph JSON: each edge must be [u, v, w]");
        g.add_edge(e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>());
    }
    return g;
}

// ---- GraphML --------------------------------------------------------------

namespace detail {

inline std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string xml_unescape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '&') {
            out += s[i];
            continue;
        }
        auto starts = [&](std::string_view entity) {
            return s.compare(i, entity.size(), entity) == 0;
        };
        if (starts("&amp;")) { out += '&'; i += 4; }
        else if (starts("&lt;")) { out += '<'; i += 3; }
        else if (starts("&gt;")) { out += '>'; i += 3; }
        else if (starts("&quot;")) { out += '"'; i += 5; }
        else out += s[i];
    }
    return out;
}

/// Minimal XML pull-tokenizer for the GraphML subset this library writes.
struct XmlCursor {
    std::string_view text;
    std::size_t pos = 0;
    std::size_t line = 1;

    struct Tag {
        std::string name;
        std::map<std::string, std::string> attrs;
        bool closing = false;
        bool self_closing = false;
    };

    void advance_to(std::size_t target) {
        for (; pos < target; ++pos)
            if (text[pos] == '\n') ++line;
    }

    [[noreturn]] void fail(const std::string& msg) const { throw GraphParseError("GraphML: " + msg, line); }

    bool next_tag(Tag& tag, std::string* text_before = nullptr) {
        const std::size_t lt = text.find('<', pos);
        if (lt == std::string_view::npos) {
            advance_to(text.size());
            return false;
        }
        if (text_before) *text_before = std::string(text.substr(pos, lt - pos));
        advance_to(lt);
        const std::size_t gt = text.find('>', lt);
        if (gt == std::string_view::npos) fail("unterminated tag");
        std::string_view body = text.substr(lt + 1, gt - lt - 1);
        advance_to(gt + 1);
        pos = gt + 1;
        if (!body.empty() && (body.front() == '?' || body.front() == '!')) return next_tag(tag, text_before);
        tag = Tag{};
        if (!body.empty() && body.front() == '/') {
            tag.closing = true;
            body.remove_prefix(1);
        }
        if (!body.empty() && body.back() == '/') {
            tag.self_closing = true;
            body.remove_suffix(1);
        }
        std::size_t i = 0;
        while (i < body.size() && !isspace(static_cast<unsigned char>(body[i]))) ++i;
        tag.name = std::string(body.substr(0, i));
        while (i < body.size()) {
            while (i < body.size() && isspace(static_cast<unsigned char>(body[i]))) ++i;
            if (i >= body.size()) break;
            const std::size_t eq = body.find('=', i);
            if (eq == std::string_view::npos) fail("malformed attribute in <" + tag.name + ">");
            std::string key(body.substr(i, eq - i));
            std::size_t q1 = body.find('"', eq);
            if (q1 == std::string_view::npos) fail("attribute value must be quoted");
            std::size_t q2 = body.find('"', q1 + 1);
            if (q2 == std::string_view::npos) fail("unterminated attribute value");
            tag.attrs[key] = xml_unescape(std::string(body.substr(q1 + 1, q2 - q1 - 1)));
            i = q2 + 1;
        }
        if (tag.name.empty()) fail("empty tag name");
        return true;
    }
};

}  // namespace detail

inline std::string graph_to_graphml(const Digraph& g) {
    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n";
    out += "  <key id=\"name\" for=\"node\" attr.name=\"name\" attr.type=\"string\"/>\n";
    out += "  <key id=\"w\" for=\"edge\" attr.name=\"w\" attr.type=\"double\"/>\n";
    out += "  <graph id=\"G\" edgedefault=\"directed\">\n";
    for (std::size_t u = 0; u < g.n(); ++u) {
        out += "    <node id=\"n" + std::to_string(u) + "\"><data key=\"name\">" +
               detail::xml_escape(g.name(int(u))) + "</data></node>\n";
    }
    for (const auto& e : g.edges()) {
        out += "    <edge source=\"n" + std::to_string(e.u) + "\" target=\"n" + std::to_string(e.v) +
               "\"><data key=\"w\">" + fmt_double(e.w) + "</data></edge>\n";
    }
    out += "  </graph>\n</graphml>\n";
    return out;
}

inline Digraph graph_from_graphml(const std::string& text) {
    detail::XmlCursor cur{text};
    detail::XmlCursor::Tag tag;

    std::vector<std::string> ids;
    std::vector<std::string> names;
    std::map<std::string, int> index_of;
    struct PendingEdge {
        int u, v;
        double w;
        std::size_t line;
    };
    std::vector<PendingEdge> edges;

    bool saw_graph = false;
    while (cur.next_tag(tag)) {
        if (tag.closing) continue;
        if (tag.name == "graph") {
            saw_graph = true;
            auto it = tag.attrs.find("edgedefault");
            if (it != tag.attrs.end() && it->second != "directed")
                cur.fail("only directed graphs are supported");
        } else if (tag.name == "node") {
            auto it = tag.attrs.find("id");
            if (it == tag.attrs.end()) cur.fail("node without id");
            const std::string id = it->second;
            if (index_of.count(id)) cur.fail("duplicate node id '" + id + "'");
            std::string display = id;
            if (!tag.self_closing) {
                // Optional <data key="name">...</data> payload.
                detail::XmlCursor::Tag inner;
                std::string txt;
                while (cur.next_tag(inner, &txt)) {
                    if (inner.closing && inner.name == "node") break;
                    if (!inner.closing && inner.name == "data" && inner.attrs["key"] == "name") {
                        std::string value;
                        detail::XmlCursor::Tag closer;
                        if (!cur.next_tag(closer, &value) || !closer.closing || closer.name != "data")
                            cur.fail("unterminated <data> in node");
                        display = detail::xml_unescape(value);
                    }
                }
            }
            index_of[id] = int(ids.size());
            ids.push_back(id);
            names.push_back(display);
        } else if (tag.name == "edge") {
            const std::size_t tag_line = cur.line;
            auto src = tag.attrs.find("source");
            auto dst = tag.attrs.find("target");
            if (src == tag.attrs.end() || dst == tag.attrs.end()) cur.fail("edge without source/target");
            auto su = index_of.find(src->second);
            auto sv = index_of.find(dst->second);
            if (su == index_of.end() || sv == index_of.end()) cur.fail("edge references unknown node");
            double w = 1.0;
            if (!tag.self_closing) {
                detail::XmlCursor::Tag inner;
                while (cur.next_tag(inner)) {
                    if (inner.closing && inner.name == "edge") break;
                    if (!inner.closing && inner.name == "data" && inner.attrs["key"] == "w") {
                        std::string value;
                        detail::XmlCursor::Tag closer;
                        if (!cur.next_tag(closer, &value) || !closer.closing || closer.name != "data")
                            cur.fail("unterminated <data> in edge");
                        if (!parse_double(value, w)) cur.fail("bad edge weight '" + value + "'");
                    }
                }
            }
            edges.push_back({su->second, sv->second, w, tag_line});
        }
    }
    if (!saw_graph) throw GraphParseError("GraphML: no <graph> element", 1);

    Digraph g(std::move(names));
    for (const auto& e : edges) {
        try {
            g.add_edge(e.u, e.v, e.w);
        } catch (const std::exception& ex) {
            throw GraphParseError(std::string("GraphML: ") + ex.what(), e.line);
        }
    }
    return g;
}

// ---- DOT ------------------------------------------------------------------

namespace detail {
inline std::string dot_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}
}  // namespace detail

inline std::string graph_to_dot(const Digraph& g) {
    std::string out = "digraph G {\n";
    for (std::size_t u = 0; u < g.n(); ++u)
        out += "  " + std::to_string(u) + " [label=" + detail::dot_quote(g.name(int(u))) + "];\n";
    for (const auto& e : g.edges())
        out += "  " + std::to_string(e.u) + " -> " + std::to_string(e.v) + " [w=\"" + fmt_double(e.w) +
               "\"];\n";
    out += "}\n";
    return out;
}

inline Digraph graph_from_dot(const std::string& text) {
    std::size_t line = 1;
    std::size_t pos = 0;
    auto fail = [&](const std::string& msg) -> void { throw GraphParseError("DOT: " + msg, line); };
    auto skip_ws = [&] {
        while (pos < text.size() && isspace(static_cast<unsigned char>(text[pos]))) {
            if (text[pos] == '\n') ++line;
            ++pos;
        }
    };
    auto expect = [&](std::string_view token) {
        skip_ws();
        if (text.compare(pos, token.size(), token) != 0) fail("expected '" + std::string(token) + "'");
        pos += token.size();
    };
    auto read_token = [&]() -> std::string {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() &&
               (isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_' || text[pos] == '.'))
            ++pos;
        if (pos == start) fail("expected identifier");
        return std::string(text.substr(start, pos - start));
    };
    auto read_quoted = [&]() -> std::string {
        skip_ws();
        if (pos >= text.size() || text[pos] != '"') fail("expected quoted string");
        ++pos;
        std::string out;
        while (pos < text.size() && text[pos] != '"') {
            if (text[pos] == '\\' && pos + 1 < text.size()) ++pos;
            if (text[pos] == '\n') ++line;
            out += text[pos++];
        }
        if (pos >= text.size()) fail("unterminated quoted string");
        ++pos;
        return out;
    };

    expect("digraph");
    read_token();  // graph name
    expect("{");
    std::map<int, std::string> labels;
    struct PendingEdge {
        int u, v;
        double w;
        std::size_t line;
    };
    std::vector<PendingEdge> edges;
    int max_vertex = -1;
    for (;;) {
        skip_ws();
        if (pos >= text.size()) fail("missing closing '}'");
        if (text[pos] == '}') {
            ++pos;
            break;
        }
        const std::string tok = read_token();
        int u = 0;
        try {
            u = std::stoi(tok);
        } catch (...) {
            fail("vertex id must be an integer, got '" + tok + "'");
        }
        max_vertex = std::max(max_vertex, u);
        skip_ws();
        if (text.compare(pos, 2, "->") == 0) {
            pos += 2;
            const std::string tok2 = read_token();
            int v = 0;
            try {
                v = std::stoi(tok2);
            } catch (...) {
                fail("vertex id must be an integer, got '" + tok2 + "'");
            }
            max_vertex = std::max(max_vertex, v);
            double w = 1.0;
            skip_ws();
            if (pos < text.size() && text[pos] == '[') {
                ++pos;
                expect("w");
                expect("=");
                const std::string value = read_quoted();
                if (!parse_double(value, w)) fail("bad edge weight '" + value + "'");
                expect("]");
            }
            expect(";");
            edges.push_back({u, v, w, line});
        } else if (pos < text.size() && text[pos] == '[') {
            ++pos;
            expect("label");
            expect("=");
            labels[u] = read_quoted();
            expect("]");
            expect(";");
        } else {
            expect(";");
        }
    }

    std::vector<std::string> names;
    names.reserve(std::size_t(max_vertex + 1));
    for (int u = 0; u <= max_vertex; ++u) {
        auto it = labels.find(u);
        names.push_back(it != labels.end() ? it->second : std::to_string(u));
    }
    Digraph g(std::move(names));
    for (const auto& e : edges) {
        try {
            g.add_edge(e.u, e.v, e.w);
        } catch (const std::exception& ex) {
            throw GraphParseError(std::string("DOT: ") + ex.what(), e.line);
        }
    }
    return g;
}

// ---- Unified entry points ---------------------------------------------------

inline std::string export_graph(const Digraph& g, GraphFormat format) {
    switch (format) {
        case GraphFormat::Json: return graph_to_json(g).dump(2) + "\n";
        case GraphFormat::GraphML: return graph_to_graphml(g);
        case GraphFormat::Dot: return graph_to_dot(g);
    }
    throw std::logic_error("unreachable");
}

inline Digraph import_graph(const std::string& bytes, GraphFormat format) {
    switch (format) {
        case GraphFormat::Json: {
            nlohmann::json j = nlohmann::json::parse(bytes);  // throws with byte position
            return graph_from_json(j);
        }
        case GraphFormat::GraphML: return graph_from_graphml(bytes);
        case GraphFormat::Dot: return graph_from_dot(bytes);
    }
    throw std::logic_error("unreachable");
}

}  // namespace tabgraph
