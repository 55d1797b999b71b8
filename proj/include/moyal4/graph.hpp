#pragma once
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace moyal4 {

struct graph_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Vertex {
    std::string id;
    std::vector<std::string> rotation; // counterclockwise cyclic order, exactly 4 half-edges
};

// phi^4 ribbon graph: every half-edge appears in exactly one rotation and on
// exactly one internal edge or one external leg.
struct RibbonGraph {
    std::vector<Vertex> vertices;
    std::map<std::string, std::pair<std::string, std::string>> edges; // eid -> (d1, d2)
    std::vector<std::pair<std::string, std::string>> externals;       // (label, half-edge), order = k1..kN
    std::string root_vertex; // vertex carrying the first external leg unless overridden

    int n() const { return static_cast<int>(vertices.size()); }
    int N() const { return static_cast<int>(externals.size()); }
    int L() const { return static_cast<int>(edges.size()); }

    const Vertex& vertex(const std::string& vid) const;
    int vertex_index_of_dart(const std::string& d) const; // -1 if unknown
    bool is_internal_dart(const std::string& d) const;
    std::string mate(const std::string& d) const; // other end of the internal edge holding d
    // successor of d in its vertex rotation (cyclic)
    std::string rotation_next(const std::string& d) const;
};

RibbonGraph parse_graph(const std::string& text);
std::string serialize_graph(const RibbonGraph& g);

// empty result means all invariants hold
std::vector<std::string> validate(const RibbonGraph& g);
// throws graph_error on the first violation
void require_valid(const RibbonGraph& g);

struct GraphCatalogEntry {
    std::string name;
    RibbonGraph graph;
    std::string notes;
};

const std::vector<GraphCatalogEntry>& graph_catalog();
RibbonGraph catalog_get(const std::string& name); // deep copy; throws graph_error on unknown name

} // namespace moyal4
