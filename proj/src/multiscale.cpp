#include "moyal4/multiscale.hpp"
#include "moyal4/topology.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace moyal4 {

double denom(double p2, const ModelParams& par) {
    if (p2 == 0.0) {
        if (par.a > 0.0) return std::numeric_limits<double>::infinity();
        if (par.mu2 == 0.0) throw std::domain_error("propagator undefined at p=0 with a=0, mu=0");
        return par.mu2;
    }
    return p2 + par.mu2 + par.a / (par.theta * par.theta * p2);
}

double propagator(const Vec4& p, const ModelParams& par) {
    double D = denom(p.norm2(), par);
    return std::isinf(D) ? 0.0 : 1.0 / D;
}

double slice_propagator_p2(double p2, int i, const ModelParams& par) {
    if (i < 0) throw std::domain_error("slice index must be >= 0");
    double D = denom(p2, par);
    if (std::isinf(D)) return 0.0;
    if (i == 0) return std::exp(-D) / D;
    double lo = std::pow(par.M, -2.0 * i);       // alpha window [M^{-2i}, M^{-2(i-1)}]
    double hi = std::pow(par.M, -2.0 * (i - 1));
    // stable difference of exponentials for small D
    return -std::exp(-lo * D) * std::expm1(-(hi - lo) * D) / D;
}

double slice_propagator(const Vec4& p, int i, const ModelParams& par) {
    return slice_propagator_p2(p.norm2(), i, par);
}

int scale_of_momentum(const Vec4& k, double M) {
    double kn = k.norm();
    if (kn <= 0.0) throw std::domain_error("scale_of_momentum needs k != 0");
    double v = std::abs(std::log(kn) / std::log(M));
    double f = v - std::floor(v);
    int i = static_cast<int>(std::floor(v));
    if (f > 0.5) ++i; // halves round toward zero
    return i;
}

namespace {

std::map<std::string, int> dart_vertex_map(const RibbonGraph& g) {
    std::map<std::string, int> dv;
    for (int i = 0; i < g.n(); ++i)
        for (const auto& d : g.vertices[i].rotation) dv[d] = i;
    return dv;
}

} // namespace

std::vector<HighSubgraph> high_subgraphs(const RibbonGraph& g, const ScaleAttribution& att) {
    for (const auto& [eid, pr] : g.edges)
        if (!att.scale.count(eid)) throw graph_error("attribution missing edge " + eid);

    auto dv = dart_vertex_map(g);
    int max_scale = 0;
    for (const auto& [eid, sc] : att.scale) max_scale = std::max(max_scale, sc);

    std::vector<HighSubgraph> out;
    for (int i = 0; i <= max_scale; ++i) {
        std::vector<std::string> eids;
        for (const auto& [eid, pr] : g.edges)
            if (att.scale.at(eid) >= i) eids.push_back(eid);
        if (eids.empty()) continue;

        // union-find over vertices through the retained edges
        std::vector<int> parent(g.n());
        for (int v = 0; v < g.n(); ++v) parent[v] = v;
        auto find = [&](int x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (const auto& eid : eids) {
            const auto& [d1, d2] = g.edges.at(eid);
            int a = find(dv.at(d1)), b = find(dv.at(d2));
            if (a != b) parent[a] = b;
        }
        std::map<int, std::vector<std::string>> comps; // root -> edges
        for (const auto& eid : eids) comps[find(dv.at(g.edges.at(eid).first))].push_back(eid);

        int r = 0;
        for (auto& [root, ce] : comps) {
            std::sort(ce.begin(), ce.end());
            std::set<std::string> in_comp(ce.begin(), ce.end());
            std::set<int> support;
            for (const auto& eid : ce) {
                support.insert(dv.at(g.edges.at(eid).first));
                support.insert(dv.at(g.edges.at(eid).second));
            }
            int next = 0;
            for (int v : support)
                for (const auto& d : g.vertices[v].rotation) {
                    bool internal = false;
                    for (const auto& eid : ce) {
                        const auto& pr = g.edges.at(eid);
                        if (pr.first == d || pr.second == d) {
                            internal = true;
                            break;
                        }
                    }
                    if (!internal) ++next; // true external or lower-scale line side
                }
            out.push_back({i, r++, ce, next});
        }
    }
    return out;
}

RibbonGraph subgraph_as_graph(const RibbonGraph& g, const std::vector<std::string>& edges) {
    auto dv = dart_vertex_map(g);
    std::set<int> support;
    std::set<std::string> internal_darts;
    for (const auto& eid : edges) {
        const auto& [d1, d2] = g.edges.at(eid);
        support.insert(dv.at(d1));
        support.insert(dv.at(d2));
        internal_darts.insert(d1);
        internal_darts.insert(d2);
    }
    RibbonGraph sub;
    int bcount = 0;
    for (int v : support) {
        sub.vertices.push_back(g.vertices[v]);
        for (const auto& d : g.vertices[v].rotation)
            if (!internal_darts.count(d)) sub.externals.emplace_back("b" + std::to_string(++bcount), d);
    }
    for (const auto& eid : edges) sub.edges[eid] = g.edges.at(eid);
    sub.root_vertex = sub.vertices.front().id;
    return sub;
}

MomentumRouting momentum_routing(const RibbonGraph& g, const SpanningTree& t) {
    MomentumRouting mr;
    mr.tree = t;
    std::set<std::string> in_tree(t.tree_lines.begin(), t.tree_lines.end());
    for (const auto& [eid, pr] : g.edges)
        if (!in_tree.count(eid)) mr.loop_basis.push_back(eid);

    auto dv = dart_vertex_map(g);
    auto vid = [&](const std::string& d) { return g.vertices[dv.at(d)].id; };

    // conservation of the branch cut off by l: the flow through l balances
    // everything entering the branch through externals and loop lines
    for (const auto& l : t.tree_lines) {
        const auto& b = t.branch.at(l);
        std::map<std::string, int> formula;
        for (const auto& [lab, d] : g.externals)
            if (b.count(vid(d))) formula[lab] += 1;
        for (const auto& le : mr.loop_basis) {
            const auto& [d1, d2] = g.edges.at(le);
            int c = 0;
            if (b.count(vid(d2))) c += 1; // head side: +q enters the branch
            if (b.count(vid(d1))) c -= 1;
            if (c != 0) formula[le] += c;
        }
        // l = (d1, d2) carries flow d1 -> d2: if the head vertex lies in the
        // branch, the branch inflow through l is +p_l, so p_l = -(other inflow)
        const auto& [d1, d2] = g.edges.at(l);
        int sign = b.count(vid(d2)) ? -1 : +1;
        for (auto& [sym, c] : formula) c *= sign;
        std::erase_if(formula, [](const auto& kv) { return kv.second == 0; });
        mr.tree_momentum_formula[l] = std::move(formula);
    }
    return mr;
}

std::map<std::string, Vec4> route_momenta(const RibbonGraph& g, const SpanningTree& t,
                                          const std::map<std::string, Vec4>& loop_momenta,
                                          const std::map<std::string, Vec4>& external_momenta) {
    Vec4 total{};
    double kmax = 0.0;
    for (const auto& [lab, d] : g.externals) {
        auto it = external_momenta.find(lab);
        if (it == external_momenta.end()) throw graph_error("missing external momentum " + lab);
        total += it->second;
        kmax = std::max(kmax, it->second.norm());
    }
    if (total.norm() > 1e-9 * std::max(1.0, kmax))
        throw graph_error("external momenta violate conservation");

    auto mr = momentum_routing(g, t);
    std::map<std::string, Vec4> line;
    for (const auto& le : mr.loop_basis) {
        auto it = loop_momenta.find(le);
        if (it == loop_momenta.end()) throw graph_error("missing loop momentum " + le);
        line[le] = it->second;
    }
    for (const auto& [l, formula] : mr.tree_momentum_formula) {
        Vec4 p{};
        for (const auto& [sym, c] : formula) {
            auto itl = loop_momenta.find(sym);
            const Vec4& v = itl != loop_momenta.end() ? itl->second : external_momenta.at(sym);
            p += v * static_cast<double>(c);
        }
        line[l] = p;
    }
    return line;
}

std::map<std::string, Vec4> route_momenta_darts(const RibbonGraph& g, const SpanningTree& t,
                                                const std::map<std::string, Vec4>& loop_momenta,
                                                const std::map<std::string, Vec4>& external_momenta) {
    auto line = route_momenta(g, t, loop_momenta, external_momenta);
    std::map<std::string, Vec4> qmap;
    for (const auto& [lab, d] : g.externals) qmap[d] = external_momenta.at(lab);
    for (const auto& [eid, pr] : g.edges) {
        qmap[pr.second] = line.at(eid);
        qmap[pr.first] = -line.at(eid);
    }
    return qmap;
}

int power_counting_bound(const RibbonGraph& g, const ScaleAttribution& att) {
    int omega = 0;
    for (const auto& hs : high_subgraphs(g, att)) {
        auto rep = topology_report(subgraph_as_graph(g, hs.edges));
        omega += -(hs.N_ext - 4) - (rep.g > 0 ? 8 : 0);
    }
    return omega;
}

ScaleAttribution parse_attribution(const std::string& text) {
    ScaleAttribution att;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        std::istringstream ls(raw);
        std::string kw, eid;
        int i;
        if (!(ls >> kw)) continue;
        if (kw != "scale" || !(ls >> eid))
            throw graph_error("attribution parse error at line " + std::to_string(lineno));
        if (eid.back() == ':') eid.pop_back();
        else {
            std::string colon;
            if (!(ls >> colon) || colon != ":")
                throw graph_error("attribution parse error at line " + std::to_string(lineno));
        }
        if (!(ls >> i) || i < 0)
            throw graph_error("attribution parse error at line " + std::to_string(lineno));
        att.scale[eid] = i;
    }
    return att;
}

} // namespace moyal4
