#pragma once
#include "moyal4/graph.hpp"

#include <string>
#include <vector>

namespace moyal4 {

struct Face {
    std::vector<std::string> cycle;           // internal half-edge sides in traversal order
    std::vector<std::string> external_labels; // external legs whose corner lies on this face
    bool broken = false;                      // true iff external_labels nonempty
};

enum class GraphClass { planar_regular, planar_irregular, nonplanar };

std::string to_string(GraphClass k);

struct TopologyReport {
    int n = 0, N = 0, L = 0, F = 0, g = 0, B = 0;
    GraphClass klass = GraphClass::planar_regular;
};

// Faces of the amputated closed ribbon graph.  External half-edges are kept in
// the rotations as self-paired markers while tracing, so each external corner
// tags the face it interrupts without changing the face count.
std::vector<Face> trace_faces(const RibbonGraph& g);

// throws graph_error if the Euler relation gives a non-integer or negative genus
TopologyReport topology_report(const RibbonGraph& g);

// N-4 for genus 0, N+4 for genus > 0
int superficial_degree_bound(const TopologyReport& rep);

enum class DivergenceClass { renormalizable_divergent, finite_renormalization, convergent };

std::string to_string(DivergenceClass c);

DivergenceClass divergence_class(const TopologyReport& rep);

} // namespace moyal4
