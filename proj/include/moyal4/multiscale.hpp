#pragma once
#include "moyal4/graph.hpp"
#include "moyal4/rosette.hpp"
#include "moyal4/vec4.hpp"

#include <map>
#include <string>
#include <vector>

namespace moyal4 {

struct ModelParams {
    double a = 1.0;      // 1/p^2 coefficient, >= 0
    double mu2 = 1.0;    // mass squared
    double theta = 1.0;  // noncommutativity scale
    double lambda = 1.0; // coupling, bookkeeping only
    double M = 2.0;      // slice base, > 1
};

// p^2 + mu^2 + a/(theta^2 p^2); the denominator shared by all propagator forms
double denom(double p2, const ModelParams& par);

double propagator(const Vec4& p, const ModelParams& par);

// closed-form slice integrals: C^i = (e^{-M^{-2i} D} - e^{-M^{-2(i-1)} D})/D for
// i >= 1, C^0 = e^{-D}/D; they telescope to the full propagator
double slice_propagator(const Vec4& p, int i, const ModelParams& par);
double slice_propagator_p2(double p2, int i, const ModelParams& par);

// round(|log_M |k||), halves toward zero; the slice where C^i(k) peaks
int scale_of_momentum(const Vec4& k, double M);

struct HighSubgraph {
    int scale_i = 0;
    int component_index = 0;
    std::vector<std::string> edges; // sorted eids, scale >= scale_i, connected
    int N_ext = 0;                  // external legs + lower-scale half-edges hooked to it
};

std::vector<HighSubgraph> high_subgraphs(const RibbonGraph& g, const ScaleAttribution& att);

// the component as a ribbon graph of its own: full rotations on its vertices,
// boundary half-edges turned into external legs
RibbonGraph subgraph_as_graph(const RibbonGraph& g, const std::vector<std::string>& edges);

struct MomentumRouting {
    SpanningTree tree;
    std::vector<std::string> loop_basis; // non-tree eids, sorted
    // tree eid -> {symbol -> coefficient}; symbols are loop eids and external labels,
    // all in the head-positive / incoming convention
    std::map<std::string, std::map<std::string, int>> tree_momentum_formula;
};

MomentumRouting momentum_routing(const RibbonGraph& g, const SpanningTree& t);

// line momenta, flowing from each edge's first dart toward its second;
// loop lines carry their free momenta unchanged
std::map<std::string, Vec4> route_momenta(const RibbonGraph& g, const SpanningTree& t,
                                          const std::map<std::string, Vec4>& loop_momenta,
                                          const std::map<std::string, Vec4>& external_momenta);

// incoming momentum at every dart (externals included); vertex sums vanish
std::map<std::string, Vec4> route_momenta_darts(const RibbonGraph& g, const SpanningTree& t,
                                                const std::map<std::string, Vec4>& loop_momenta,
                                                const std::map<std::string, Vec4>& external_momenta);

// sum over slices and components of -(N_ext - 4), with the non-planar gain
// turning -(N-4) into -(N+4) for components of positive genus
int power_counting_bound(const RibbonGraph& g, const ScaleAttribution& att);

ScaleAttribution parse_attribution(const std::string& text);

} // namespace moyal4
