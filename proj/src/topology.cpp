#include "moyal4/topology.hpp"

#include <map>
#include <set>

namespace moyal4 {

std::string to_string(GraphClass k) {
    switch (k) {
        case GraphClass::planar_regular: return "planar_regular";
        case GraphClass::planar_irregular: return "planar_irregular";
        case GraphClass::nonplanar: return "nonplanar";
    }
    return "?";
}

std::string to_string(DivergenceClass c) {
    switch (c) {
        case DivergenceClass::renormalizable_divergent: return "renormalizable_divergent";
        case DivergenceClass::finite_renormalization: return "finite_renormalization";
        case DivergenceClass::convergent: return "convergent";
    }
    return "?";
}

std::vector<Face> trace_faces(const RibbonGraph& g) {
    // face successor: cross the edge (externals are self-paired), then step
    // counterclockwise at the far vertex
    std::map<std::string, std::string> mate;
    for (const auto& [eid, pr] : g.edges) {
        mate[pr.first] = pr.second;
        mate[pr.second] = pr.first;
    }
    std::map<std::string, std::string> xlabel; // external dart -> leg label
    for (const auto& [lab, h] : g.externals) xlabel[h] = lab;

    std::vector<std::string> darts;
    for (const auto& v : g.vertices)
        for (const auto& h : v.rotation) darts.push_back(h);

    std::set<std::string> visited;
    std::vector<Face> faces;
    for (const auto& start : darts) {
        if (visited.count(start)) continue;
        Face f;
        std::string d = start;
        do {
            visited.insert(d);
            auto it = xlabel.find(d);
            if (it != xlabel.end())
                f.external_labels.push_back(it->second);
            else
                f.cycle.push_back(d);
            auto m = mate.find(d);
            d = g.rotation_next(m != mate.end() ? m->second : d);
        } while (d != start);
        f.broken = !f.external_labels.empty();
        faces.push_back(std::move(f));
    }
    return faces;
}

TopologyReport topology_report(const RibbonGraph& g) {
    TopologyReport rep;
    rep.n = g.n();
    rep.N = g.N();
    rep.L = g.L();
    auto faces = trace_faces(g);
    rep.F = static_cast<int>(faces.size());
    rep.B = 0;
    for (const auto& f : faces)
        if (f.broken) ++rep.B;

    int twice_genus = 2 - rep.n + rep.L - rep.F;
    if (twice_genus < 0 || twice_genus % 2 != 0)
        throw graph_error("face tracing inconsistency: 2-2g = n-L+F gives 2g = " +
                          std::to_string(twice_genus));
    rep.g = twice_genus / 2;

    if (rep.g > 0)
        rep.klass = GraphClass::nonplanar;
    else
        rep.klass = (rep.B <= 1) ? GraphClass::planar_regular : GraphClass::planar_irregular;
    return rep;
}

int superficial_degree_bound(const TopologyReport& rep) {
    return rep.g == 0 ? rep.N - 4 : rep.N + 4;
}

DivergenceClass divergence_class(const TopologyReport& rep) {
    if (rep.klass == GraphClass::planar_regular && (rep.N == 2 || rep.N == 4))
        return DivergenceClass::renormalizable_divergent;
    if (rep.klass == GraphClass::planar_irregular && rep.N == 2)
        return DivergenceClass::finite_renormalization;
    return DivergenceClass::convergent;
}

} // namespace moyal4
