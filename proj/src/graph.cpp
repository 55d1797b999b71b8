#include "moyal4/graph.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace moyal4 {

const Vertex& RibbonGraph::vertex(const std::string& vid) const {
    for (const auto& v : vertices)
        if (v.id == vid) return v;
    throw graph_error("unknown vertex id: " + vid);
}

int RibbonGraph::vertex_index_of_dart(const std::string& d) const {
    for (int i = 0; i < n(); ++i)
        for (const auto& h : vertices[i].rotation)
            if (h == d) return i;
    return -1;
}

bool RibbonGraph::is_internal_dart(const std::string& d) const {
    for (const auto& [eid, pr] : edges)
        if (pr.first == d || pr.second == d) return true;
    return false;
}

std::string RibbonGraph::mate(const std::string& d) const {
    for (const auto& [eid, pr] : edges) {
        if (pr.first == d) return pr.second;
        if (pr.second == d) return pr.first;
    }
    throw graph_error("half-edge not on any internal edge: " + d);
}

std::string RibbonGraph::rotation_next(const std::string& d) const {
    for (const auto& v : vertices) {
        for (size_t i = 0; i < v.rotation.size(); ++i)
            if (v.rotation[i] == d) return v.rotation[(i + 1) % v.rotation.size()];
    }
    throw graph_error("half-edge not in any rotation: " + d);
}

namespace {

bool valid_identifier(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
}

[[noreturn]] void parse_fail(int line, const std::string& msg) {
    throw graph_error("parse error at line " + std::to_string(line) + ": " + msg);
}

} // namespace

RibbonGraph parse_graph(const std::string& text) {
    RibbonGraph g;
    std::string explicit_root;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        std::istringstream ls(raw);
        std::string kind;
        if (!(ls >> kind)) continue;

        // every declaration is "<kind> <name>: <tokens...>"; accept "name:" glued or split
        std::string name;
        if (!(ls >> name)) parse_fail(lineno, "missing name after '" + kind + "'");
        if (kind == "root:") {
            kind = "root";
        } else {
            if (name.back() == ':')
                name.pop_back();
            else {
                std::string colon;
                if (!(ls >> colon) || colon != ":")
                    parse_fail(lineno, "expected ':' after name");
            }
        }
        std::vector<std::string> toks;
        std::string t;
        while (ls >> t) toks.push_back(t);

        if (kind == "vertex") {
            if (!valid_identifier(name)) parse_fail(lineno, "bad vertex id '" + name + "'");
            if (toks.size() != 4)
                parse_fail(lineno, "vertex " + name + " has " + std::to_string(toks.size()) +
                                       " half-edges, need exactly 4");
            for (const auto& h : toks)
                if (!valid_identifier(h)) parse_fail(lineno, "bad half-edge id '" + h + "'");
            g.vertices.push_back({name, toks});
        } else if (kind == "edge") {
            if (toks.size() != 2) parse_fail(lineno, "edge " + name + " needs exactly 2 half-edges");
            if (g.edges.count(name)) parse_fail(lineno, "duplicate edge id '" + name + "'");
            g.edges[name] = {toks[0], toks[1]};
        } else if (kind == "external") {
            if (toks.size() != 1) parse_fail(lineno, "external " + name + " needs exactly 1 half-edge");
            g.externals.emplace_back(name, toks[0]);
        } else if (kind == "root") {
            // line was "root: <vid>"; the vid landed in `name`... handled below
            explicit_root = name;
            if (!toks.empty()) parse_fail(lineno, "trailing tokens after root");
        } else {
            parse_fail(lineno, "unknown declaration '" + kind + "'");
        }
    }
    if (g.vertices.empty()) throw graph_error("parse error: no vertices declared");

    if (!explicit_root.empty()) {
        g.root_vertex = explicit_root;
    } else if (!g.externals.empty()) {
        int vi = g.vertex_index_of_dart(g.externals.front().second);
        if (vi < 0) throw graph_error("first external leg not attached to any vertex");
        g.root_vertex = g.vertices[vi].id;
    } else {
        g.root_vertex = g.vertices.front().id;
    }

    require_valid(g);
    return g;
}

std::string serialize_graph(const RibbonGraph& g) {
    std::ostringstream out;
    for (const auto& v : g.vertices) {
        out << "vertex " << v.id << ":";
        for (const auto& h : v.rotation) out << " " << h;
        out << "\n";
    }
    for (const auto& [eid, pr] : g.edges) out << "edge " << eid << ": " << pr.first << " " << pr.second << "\n";
    for (const auto& [lab, h] : g.externals) out << "external " << lab << ": " << h << "\n";
    out << "root: " << g.root_vertex << "\n";
    return out.str();
}

std::vector<std::string> validate(const RibbonGraph& g) {
    std::vector<std::string> bad;
    if (g.vertices.empty()) {
        bad.push_back("graph has no vertices");
        return bad;
    }

    std::set<std::string> vids;
    for (const auto& v : g.vertices) {
        if (!vids.insert(v.id).second) bad.push_back("duplicate vertex id " + v.id);
        if (v.rotation.size() != 4)
            bad.push_back("vertex " + v.id + " has valence " + std::to_string(v.rotation.size()) +
                          ", need 4");
    }

    // each half-edge in exactly one rotation
    std::map<std::string, int> seen;
    for (const auto& v : g.vertices)
        for (const auto& h : v.rotation) seen[h]++;
    for (const auto& [h, cnt] : seen)
        if (cnt > 1) bad.push_back("half-edge " + h + " appears in " + std::to_string(cnt) + " rotations");

    // each half-edge on exactly one edge/external side
    std::map<std::string, int> used;
    for (const auto& [eid, pr] : g.edges) {
        used[pr.first]++;
        used[pr.second]++;
        if (pr.first == pr.second) bad.push_back("edge " + eid + " pairs a half-edge with itself");
    }
    std::set<std::string> xlabels;
    for (const auto& [lab, h] : g.externals) {
        used[h]++;
        if (!xlabels.insert(lab).second) bad.push_back("duplicate external label " + lab);
    }
    for (const auto& [h, cnt] : used) {
        if (!seen.count(h)) bad.push_back("half-edge " + h + " used but not in any rotation");
        if (cnt > 1) bad.push_back("half-edge " + h + " used " + std::to_string(cnt) + " times");
    }
    for (const auto& [h, cnt] : seen)
        if (!used.count(h)) bad.push_back("half-edge " + h + " dangling (no edge or external)");

    // L = (4n - N)/2 exactly
    if (2 * g.L() != 4 * g.n() - g.N())
        bad.push_back("edge count violates L = (4n-N)/2: L=" + std::to_string(g.L()) +
                      " n=" + std::to_string(g.n()) + " N=" + std::to_string(g.N()));

    if (!g.root_vertex.empty() && !vids.count(g.root_vertex))
        bad.push_back("root vertex " + g.root_vertex + " not declared");

    // connectivity over vertices through internal edges
    if (bad.empty() && g.n() > 1) {
        std::vector<std::set<int>> adj(g.n());
        for (const auto& [eid, pr] : g.edges) {
            int a = g.vertex_index_of_dart(pr.first), b = g.vertex_index_of_dart(pr.second);
            adj[a].insert(b);
            adj[b].insert(a);
        }
        std::vector<char> vis(g.n(), 0);
        std::vector<int> stack{0};
        vis[0] = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int w : adj[v])
                if (!vis[w]) {
                    vis[w] = 1;
                    stack.push_back(w);
                }
        }
        if (std::count(vis.begin(), vis.end(), 1) != g.n()) bad.push_back("graph is disconnected");
    }
    return bad;
}

void require_valid(const RibbonGraph& g) {
    auto bad = validate(g);
    if (!bad.empty()) throw graph_error("invalid graph: " + bad.front());
}

namespace {

GraphCatalogEntry entry(const std::string& name, const std::string& text, const std::string& notes) {
    return {name, parse_graph(text), notes};
}

std::vector<GraphCatalogEntry> build_catalog() {
    std::vector<GraphCatalogEntry> cat;
    cat.push_back(entry("tadpole_p",
                        "vertex v1: h1 h2 h3 h4\n"
                        "edge e1: h1 h2\n"
                        "external x1: h3\n"
                        "external x2: h4\n",
                        "one-loop two-point, self-loop on adjacent slots; one broken face"));
    cat.push_back(entry("tadpole_np",
                        "vertex v1: h1 h2 h3 h4\n"
                        "edge e1: h1 h3\n"
                        "external x1: h2\n"
                        "external x2: h4\n",
                        "one-loop two-point, self-loop on opposite slots; both faces broken"));
    cat.push_back(entry("fourpoint_regular",
                        "vertex v1: a1 a2 a3 a4\n"
                        "vertex v2: b1 b2 b3 b4\n"
                        "edge e1: a3 b2\n"
                        "edge e2: a4 b1\n"
                        "external x1: a1\n"
                        "external x2: a2\n"
                        "external x3: b3\n"
                        "external x4: b4\n",
                        "one-loop four-point bubble, parallel internal lines; one broken face"));
    cat.push_back(entry("fourpoint_irregular",
                        "vertex v1: a1 a2 a3 a4\n"
                        "vertex v2: b1 b2 b3 b4\n"
                        "edge e1: a3 b1\n"
                        "edge e2: a4 b2\n"
                        "external x1: a1\n"
                        "external x2: a2\n"
                        "external x3: b3\n"
                        "external x4: b4\n",
                        "one-loop four-point bubble, twisted pairing; genus 0 but two broken faces"));
    cat.push_back(entry("sunset_p",
                        "vertex v1: s1 p1 p2 p3\n"
                        "vertex v2: t1 q1 q2 q3\n"
                        "edge e1: p1 q3\n"
                        "edge e2: p2 q2\n"
                        "edge e3: p3 q1\n"
                        "external x1: s1\n"
                        "external x2: t1\n",
                        "two-loop two-point, nested triple lines; planar with one broken face"));
    cat.push_back(entry("sunset_np",
                        "vertex v1: s1 p1 p2 p3\n"
                        "vertex v2: t1 q1 q2 q3\n"
                        "edge e1: p1 q1\n"
                        "edge e2: p2 q2\n"
                        "edge e3: p3 q3\n"
                        "external x1: s1\n"
                        "external x2: t1\n",
                        "two-loop two-point, crossed triple lines; genus 1"));
    cat.push_back(entry("dumbbell",
                        "vertex v1: h1 h2 h3 x1d\n"
                        "vertex v2: g1 g2 g3 x2d\n"
                        "edge e1: h1 h2\n"
                        "edge e2: h3 g1\n"
                        "edge e3: g2 g3\n"
                        "external x1: x1d\n"
                        "external x2: x2d\n",
                        "two-loop two-point, two self-loops joined by a bridge; planar"));
    cat.push_back(entry("sixpoint",
                        "vertex v1: xa xb xc d1\n"
                        "vertex v2: d2 xd xe xf\n"
                        "edge e1: d1 d2\n"
                        "external x1: xa\n"
                        "external x2: xb\n"
                        "external x3: xc\n"
                        "external x4: xd\n"
                        "external x5: xe\n"
                        "external x6: xf\n",
                        "tree-level six-point, two vertices joined by one line"));
    cat.push_back(entry("fourpoint_np",
                        "vertex v1: d10 d2 d11 d7\n"
                        "vertex v2: d1 d3 d6 d0\n"
                        "vertex v3: d8 d5 d4 d9\n"
                        "edge e0: d4 d11\n"
                        "edge e1: d1 d5\n"
                        "edge e2: d10 d9\n"
                        "edge e3: d8 d2\n"
                        "external x1: d3\n"
                        "external x2: d0\n"
                        "external x3: d7\n"
                        "external x4: d6\n",
                        "two-loop four-point on three vertices; genus 1"));
    cat.push_back(entry("rosette_demo",
                        "vertex v1: d15 d7 d0 d8\n"
                        "vertex v2: d6 d1 d12 d2\n"
                        "vertex v3: d5 d10 d9 d3\n"
                        "vertex v4: d13 d14 d4 d11\n"
                        "edge e0: d0 d12\n"
                        "edge e1: d1 d10\n"
                        "edge e2: d14 d15\n"
                        "edge e3: d7 d4\n"
                        "edge e4: d5 d6\n"
                        "edge e5: d3 d2\n"
                        "edge e6: d8 d9\n"
                        "external x1: d13\n"
                        "external x2: d11\n",
                        "four-loop two-point on four vertices; genus 1, contraction exercises long words"));
    return cat;
}

} // namespace

const std::vector<GraphCatalogEntry>& graph_catalog() {
    static const std::vector<GraphCatalogEntry> cat = build_catalog();
    return cat;
}

RibbonGraph catalog_get(const std::string& name) {
    for (const auto& e : graph_catalog())
        if (e.name == name) return e.graph; // vector/map copies are deep
    throw graph_error("unknown catalog graph: " + name);
}

} // namespace moyal4
