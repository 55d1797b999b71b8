#include "moyal4/rosette.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace moyal4 {

namespace {

int find_root_index(const RibbonGraph& g) {
    for (int i = 0; i < g.n(); ++i)
        if (g.vertices[i].id == g.root_vertex) return i;
    throw graph_error("root vertex not found: " + g.root_vertex);
}

} // namespace

SpanningTree spanning_tree(const RibbonGraph& g, const std::optional<ScaleAttribution>& att) {
    // order edges by scale descending, edge id ascending
    std::vector<std::pair<int, std::string>> order;
    for (const auto& [eid, pr] : g.edges) {
        int sc = 0;
        if (att) {
            auto it = att->scale.find(eid);
            if (it == att->scale.end()) throw graph_error("attribution missing edge " + eid);
            sc = it->second;
        }
        order.emplace_back(-sc, eid);
    }
    std::sort(order.begin(), order.end());

    std::vector<int> parent(g.n());
    for (int i = 0; i < g.n(); ++i) parent[i] = i;
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };

    SpanningTree t;
    t.root = g.root_vertex;
    for (const auto& [negsc, eid] : order) {
        const auto& [d1, d2] = g.edges.at(eid);
        int a = find(g.vertex_index_of_dart(d1)), b = find(g.vertex_index_of_dart(d2));
        if (a == b) continue;
        parent[a] = b;
        t.tree_lines.push_back(eid);
    }
    if (static_cast<int>(t.tree_lines.size()) != g.n() - 1)
        throw graph_error("graph is disconnected, no spanning tree");
    std::sort(t.tree_lines.begin(), t.tree_lines.end());

    // branch(l) = vertex set cut off from the root by removing l from the tree
    std::map<int, std::vector<std::pair<std::string, int>>> adj; // vertex -> (eid, other)
    for (const auto& eid : t.tree_lines) {
        const auto& [d1, d2] = g.edges.at(eid);
        int a = g.vertex_index_of_dart(d1), b = g.vertex_index_of_dart(d2);
        adj[a].emplace_back(eid, b);
        adj[b].emplace_back(eid, a);
    }
    int root = find_root_index(g);
    for (const auto& cut : t.tree_lines) {
        std::set<int> reach{root};
        std::deque<int> q{root};
        while (!q.empty()) {
            int v = q.front();
            q.pop_front();
            for (const auto& [eid, w] : adj[v]) {
                if (eid == cut || reach.count(w)) continue;
                reach.insert(w);
                q.push_back(w);
            }
        }
        std::set<std::string>& b = t.branch[cut];
        for (int i = 0; i < g.n(); ++i)
            if (!reach.count(i)) b.insert(g.vertices[i].id);
    }
    return t;
}

Rosette contract_to_rosette(const RibbonGraph& g, const SpanningTree& t) {
    // vertex depths along the tree, to contract nearest-the-root lines first
    std::map<int, std::vector<std::pair<std::string, int>>> adj;
    for (const auto& eid : t.tree_lines) {
        const auto& [d1, d2] = g.edges.at(eid);
        int a = g.vertex_index_of_dart(d1), b = g.vertex_index_of_dart(d2);
        adj[a].emplace_back(eid, b);
        adj[b].emplace_back(eid, a);
    }
    std::map<int, int> depth;
    int root = find_root_index(g);
    depth[root] = 0;
    std::deque<int> q{root};
    std::vector<std::pair<int, std::string>> contraction_order; // (depth of far endpoint, eid)
    while (!q.empty()) {
        int v = q.front();
        q.pop_front();
        for (const auto& [eid, w] : adj[v]) {
            if (depth.count(w)) continue;
            depth[w] = depth[v] + 1;
            contraction_order.emplace_back(depth[w], eid);
            q.push_back(w);
        }
    }
    std::sort(contraction_order.begin(), contraction_order.end());

    std::vector<std::vector<std::string>> rots;
    for (const auto& v : g.vertices) rots.push_back(v.rotation);
    for (const auto& [dep, eid] : contraction_order) {
        const auto& [d1, d2] = g.edges.at(eid);
        auto has = [](const std::vector<std::string>& r, const std::string& d) {
            return std::find(r.begin(), r.end(), d) != r.end();
        };
        size_t i1 = rots.size(), i2 = rots.size();
        for (size_t i = 0; i < rots.size(); ++i) {
            if (has(rots[i], d1)) i1 = i;
            if (has(rots[i], d2)) i2 = i;
        }
        if (i1 == i2 || i1 >= rots.size() || i2 >= rots.size())
            throw graph_error("tree line " + eid + " does not join two distinct vertices");
        auto splice = [](const std::vector<std::string>& r, const std::string& d) {
            auto k = std::find(r.begin(), r.end(), d) - r.begin();
            std::vector<std::string> out(r.begin() + k + 1, r.end());
            out.insert(out.end(), r.begin(), r.begin() + k);
            return out;
        };
        std::vector<std::string> merged = splice(rots[i1], d1);
        auto tail = splice(rots[i2], d2);
        merged.insert(merged.end(), tail.begin(), tail.end());
        if (i1 < i2) std::swap(i1, i2);
        rots.erase(rots.begin() + i1);
        rots.erase(rots.begin() + i2);
        rots.push_back(std::move(merged));
    }
    if (rots.size() != 1) throw graph_error("contraction did not end in a single vertex");

    std::vector<std::string>& w = rots.front();
    Rosette r;
    if (!w.empty()) {
        auto mn = std::min_element(w.begin(), w.end()) - w.begin();
        r.word.assign(w.begin() + mn, w.end());
        r.word.insert(r.word.end(), w.begin(), w.begin() + mn);
    }

    std::map<std::string, int> pos;
    for (int i = 0; i < static_cast<int>(r.word.size()); ++i) pos[r.word[i]] = i;
    std::set<std::string> in_tree(t.tree_lines.begin(), t.tree_lines.end());
    for (const auto& [eid, pr] : g.edges) {
        if (in_tree.count(eid)) continue;
        int p1 = pos.at(pr.first), p2 = pos.at(pr.second);
        r.loop_pairs[eid] = {std::min(p1, p2), std::max(p1, p2)};
        r.head_at_first[eid] = p2 < p1;
    }
    for (const auto& [lab, d] : g.externals) r.external_positions.emplace_back(lab, pos.at(d));
    return r;
}

TopologyReport rosette_topology(const Rosette& r) {
    int W = static_cast<int>(r.word.size());
    std::vector<int> mate(W);
    for (int i = 0; i < W; ++i) mate[i] = i; // externals self-paired
    for (const auto& [eid, pr] : r.loop_pairs) {
        mate[pr.first] = pr.second;
        mate[pr.second] = pr.first;
    }
    std::vector<char> seen(W, 0);
    int F = 0, B = 0;
    std::vector<char> is_ext(W, 0);
    for (const auto& [lab, p] : r.external_positions) is_ext[p] = 1;
    for (int s = 0; s < W; ++s) {
        if (seen[s]) continue;
        ++F;
        bool broken = false;
        int d = s;
        do {
            seen[d] = 1;
            if (is_ext[d]) broken = true;
            d = (mate[d] + 1) % W;
        } while (d != s);
        if (broken) ++B;
    }
    if (W == 0) F = 1; // bare single vertex below any externals: degenerate, unused

    TopologyReport rep;
    rep.n = 1;
    rep.N = static_cast<int>(r.external_positions.size());
    rep.L = static_cast<int>(r.loop_pairs.size());
    rep.F = F;
    rep.B = B;
    int twice_genus = 2 - rep.n + rep.L - rep.F;
    if (twice_genus < 0 || twice_genus % 2 != 0)
        throw graph_error("rosette face tracing inconsistency");
    rep.g = twice_genus / 2;
    rep.klass = rep.g > 0 ? GraphClass::nonplanar
                          : (rep.B <= 1 ? GraphClass::planar_regular : GraphClass::planar_irregular);
    return rep;
}

std::string rosette_word_string(const Rosette& r) {
    std::map<int, std::string> name;
    for (const auto& [eid, pr] : r.loop_pairs) {
        name[pr.first] = eid;
        name[pr.second] = eid;
    }
    for (const auto& [lab, p] : r.external_positions) name[p] = lab;
    std::ostringstream out;
    out << "(";
    for (int i = 0; i < static_cast<int>(r.word.size()); ++i) out << " " << name.at(i);
    out << " )";
    return out.str();
}

IntersectionMatrix intersection_matrix(const Rosette& r) {
    IntersectionMatrix im;
    // loops ordered by first word occurrence, externals by label order
    std::vector<std::pair<int, std::string>> loops;
    for (const auto& [eid, pr] : r.loop_pairs) loops.emplace_back(pr.first, eid);
    std::sort(loops.begin(), loops.end());
    for (const auto& [p, eid] : loops) im.lines.push_back(eid);
    im.n_loops = static_cast<int>(loops.size());
    for (const auto& [lab, p] : r.external_positions) im.lines.push_back(lab);

    int M = static_cast<int>(im.lines.size());
    im.I.assign(M, std::vector<int>(M, 0));

    auto positions = [&](int idx) -> std::pair<int, int> {
        if (idx < im.n_loops) return r.loop_pairs.at(im.lines[idx]);
        for (const auto& [lab, p] : r.external_positions)
            if (lab == im.lines[idx]) return {p, -1};
        throw graph_error("line not found: " + im.lines[idx]);
    };
    std::map<std::string, int> lab_order;
    for (int i = 0; i < static_cast<int>(r.external_positions.size()); ++i)
        lab_order[r.external_positions[i].first] = i;

    for (int a = 0; a < M; ++a) {
        for (int b = a + 1; b < M; ++b) {
            auto [a1, a2] = positions(a);
            auto [b1, b2] = positions(b);
            int sgn = 0;
            if (a2 >= 0 && b2 >= 0) {
                // two loops cross iff their occurrences interleave in the word
                int inside = (a1 < b1 && b1 < a2 ? 1 : 0) + (a1 < b2 && b2 < a2 ? 1 : 0);
                if (inside == 1) sgn = (a1 < b1 && b1 < a2) ? -1 : +1;
            } else if (a2 >= 0) {
                // loop vs external: crossing iff the external sits under the loop's arc
                if (a1 < b1 && b1 < a2) sgn = -1;
            } else if (b2 >= 0) {
                if (b1 < a1 && a1 < b2) sgn = +1;
            } else {
                // external vs external: word order against label order; cancels
                // against the external kernel, any consistent antisymmetric choice works
                bool word_swapped = (a1 > b1) != (lab_order.at(im.lines[a]) > lab_order.at(im.lines[b]));
                if (word_swapped) sgn = (lab_order.at(im.lines[a]) < lab_order.at(im.lines[b])) ? +1 : -1;
            }
            im.I[a][b] = sgn;
            im.I[b][a] = -sgn;
        }
    }
    return im;
}

int loop_crossing_count(const IntersectionMatrix& im) {
    int c = 0;
    for (int a = 0; a < im.n_loops; ++a)
        for (int b = a + 1; b < im.n_loops; ++b)
            if (im.I[a][b] != 0) ++c;
    return c;
}

cplx moyal_phase(const Rosette& r, const std::map<std::string, Vec4>& line_momenta,
                 const ThetaMatrix& th) {
    Vec4 total{};
    double kmax = 0.0;
    for (const auto& [lab, p] : r.external_positions) {
        auto it = line_momenta.find(lab);
        if (it == line_momenta.end()) throw graph_error("missing momentum for external " + lab);
        total += it->second;
        kmax = std::max(kmax, it->second.norm());
    }
    if (total.norm() > 1e-9 * std::max(1.0, kmax))
        throw graph_error("external momenta violate conservation");

    auto im = intersection_matrix(r);
    std::vector<Vec4> q(im.lines.size());
    for (size_t i = 0; i < im.lines.size(); ++i) {
        auto it = line_momenta.find(im.lines[i]);
        if (it == line_momenta.end()) throw graph_error("missing momentum for line " + im.lines[i]);
        q[i] = it->second;
        if (static_cast<int>(i) < im.n_loops && !r.head_at_first.at(im.lines[i]))
            q[i] = -q[i]; // orient +q into the first word occurrence
    }
    double s = 0.0;
    for (size_t a = 0; a < q.size(); ++a)
        for (size_t b = a + 1; b < q.size(); ++b)
            if (im.I[a][b]) s += im.I[a][b] * th.wedge(q[a], q[b]);
    return std::exp(cplx(0.0, s));
}

std::pair<double, cplx> external_kernel(const std::vector<Vec4>& k, const ThetaMatrix& th) {
    Vec4 total{};
    double s = 0.0;
    for (size_t i = 0; i < k.size(); ++i) {
        total += k[i];
        for (size_t j = i + 1; j < k.size(); ++j) s += th.wedge(k[i], k[j]);
    }
    return {total.norm(), std::exp(cplx(0.0, -0.5 * s))};
}

} // namespace moyal4
