#pragma once
#include "moyal4/graph.hpp"
#include "moyal4/multiscale.hpp"
#include "moyal4/vec4.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace moyal4 {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Schwinger window [alpha_min, alpha_max] plus an optional hard momentum
// cutoff; alpha_max and p_uv may be infinite.  0 <= alpha_min < alpha_max.
struct CutoffSpec {
    double alpha_min = 0.0;
    double alpha_max = kInf;
    double p_uv = kInf;
};

struct AmplitudeSample {
    double k = 0.0; // |external momentum| of the sample
    Vec4 kvec{};    // full vector, kept for anisotropy-sensitive callers
    cplx value{};
    double abs_err = 0.0;
    std::string method; // "bessel1d" | "reduced3d" | "schwinger_mc"
};

// alpha-integrated propagator (e^{-alpha_min D} - e^{-alpha_max D})/D with
// D = p^2 + mu^2 + a/(theta^2 p^2); the open window gives back 1/D
double cutoff_propagator(double p2, const ModelParams& par, const CutoffSpec& cut);

// int d^4p e^{i q.p} f(|p|) = (4 pi^2/q) int_0^L p^2 J1(pq) f(p) dp.
// Panels split at the J1 zeros, the alternating tail is resummed by iterated
// averaging of partial sums; q = 0 falls back to 2 pi^2 int p^3 f dp.
cplx radial_fourier_4d(const std::function<double(double)>& f, double q,
                       double p_uv = kInf, double* abs_err = nullptr);

// int_{|p|<=L} d^4p / D(p); no phase, grows like L^2
AmplitudeSample tadpole_planar(const ModelParams& par, double p_uv);

// int d^4p e^{i k Theta p} Ccut(p); reduces to radial_fourier_4d at q = theta|k|
AmplitudeSample tadpole_nonplanar(const Vec4& k, const ModelParams& par,
                                  const CutoffSpec& cut);

// one-loop bubble without phase: int d^4p Ccut(p) Ccut(p+K); log-divergent
// without a cutoff window, evaluated by a 2d angular reduction
AmplitudeSample fourpoint_regular(const Vec4& K, const ModelParams& par,
                                  const CutoffSpec& cut);

// one-loop bubble with phase e^{i p Theta K}: reduced to a 3d integral over
// (x, y, |p_perp|) with the oscillation confined to y, e^{-i theta|K| y}
AmplitudeSample fourpoint_irregular(const Vec4& K, const ModelParams& par,
                                    const CutoffSpec& cut);

// importance-sampled Monte Carlo over the loop momenta of g (<= 2 loops):
// base density proportional to prod_loops |p|^3 Ccut(p), observable the
// remaining tree-line propagators times the rosette Moyal phase
AmplitudeSample schwinger_mc(const RibbonGraph& g, const ModelParams& par,
                             const std::map<std::string, Vec4>& external_momenta,
                             const CutoffSpec& cut, std::size_t n_samples,
                             std::uint64_t seed);

// evaluates g at every hard loop-momentum cutoff in p_uv_grid from a single
// sample stream, so estimates at neighboring cutoffs are pointwise correlated
// and their differences carry only the shell variance; cut.p_uv must be open
// (the grid supplies the cutoffs), grid strictly increasing, finite, positive
std::vector<AmplitudeSample> schwinger_mc_scan(const RibbonGraph& g, const ModelParams& par,
                                               const std::map<std::string, Vec4>& external_momenta,
                                               const CutoffSpec& cut,
                                               const std::vector<double>& p_uv_grid,
                                               std::size_t n_samples, std::uint64_t seed);

} // namespace moyal4
