#pragma once
#include "moyal4/graph.hpp"
#include "moyal4/topology.hpp"
#include "moyal4/vec4.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace moyal4 {

// slice index per internal edge; used to pick scale-compatible trees
struct ScaleAttribution {
    std::map<std::string, int> scale;
};

struct SpanningTree {
    std::vector<std::string> tree_lines; // eids, sorted
    std::string root;                    // vertex id
    // branch(l): vertices whose tree path to the root passes through l
    std::map<std::string, std::set<std::string>> branch;
};

// greedy maximum-scale-first Kruskal; ties broken by lowest edge id, so the
// tree restricted to any top-scale subgraph spans that subgraph's components
SpanningTree spanning_tree(const RibbonGraph& g,
                           const std::optional<ScaleAttribution>& att = std::nullopt);

struct Rosette {
    std::vector<std::string> word;                        // darts around the single merged vertex
    std::map<std::string, std::pair<int, int>> loop_pairs; // loop eid -> (first, second) word position
    std::map<std::string, bool> head_at_first;             // loop eid -> edge head dart sits at first position
    std::vector<std::pair<std::string, int>> external_positions; // (label, word position), label order
};

// reduce tree lines one by one, nearest the root first, splicing the two
// rotations at the line's darts; cyclic order is preserved so faces and genus
// are unchanged
Rosette contract_to_rosette(const RibbonGraph& g, const SpanningTree& t);

// faces/genus/broken count of the rosette itself (single vertex, word rotation)
TopologyReport rosette_topology(const Rosette& r);

std::string rosette_word_string(const Rosette& r); // e.g. "( e1 x1 e2 e1 e2 x2 )"

struct IntersectionMatrix {
    std::vector<std::string> lines; // loop eids (word order), then external labels (label order)
    int n_loops = 0;
    std::vector<std::vector<int>> I; // antisymmetric, entries in {-1,0,+1}
};

IntersectionMatrix intersection_matrix(const Rosette& r);

int loop_crossing_count(const IntersectionMatrix& im);

// exp((i/2) sum_ij I_ij q_i Theta q_j).  Loop momenta are given head-positive
// (flowing toward the edge's second dart) and re-oriented internally so +q
// enters at the line's first word occurrence; externals are incoming.
// Throws if the external momenta do not conserve to 1e-9 relative.
cplx moyal_phase(const Rosette& r, const std::map<std::string, Vec4>& line_momenta,
                 const ThetaMatrix& th);

// conservation defect |sum k| and the vertex kernel phase
// exp(-(i/2) sum_{i<j} k_i Theta k_j) in label order
std::pair<double, cplx> external_kernel(const std::vector<Vec4>& k, const ThetaMatrix& th);

} // namespace moyal4
