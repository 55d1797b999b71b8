#pragma once
#include "moyal4/amplitude.hpp"
#include "moyal4/graph.hpp"
#include "moyal4/multiscale.hpp"
#include "moyal4/topology.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace moyal4 {

enum class ScanAxis { k_ir, lambda_uv };

struct ScanSeries {
    ScanAxis axis = ScanAxis::k_ir;
    std::vector<double> axis_values;     // strictly increasing, >= 8 points
    std::vector<AmplitudeSample> points; // one per axis value
    ModelParams params;
};

enum class FitModel { ir_structure, power_law, log_law, bounded_other };

std::string to_string(FitModel m);

struct FitCoefficient {
    std::string name;
    double value = 0.0;
    double std_error = 0.0;
};

struct FitResult {
    FitModel model = FitModel::bounded_other;
    std::vector<FitCoefficient> coefficients;
    double residual_norm = 0.0; // rms residual (weighted for IR, relative for UV)
    double r_squared = 0.0;     // clamped to [0, 1]

    const FitCoefficient* find(const std::string& name) const;
};

// value ~ c/k^2 + c' ln(k^2) + d0 on an IR window two decades below 1.
// Reported errors add a fit-window-stability systematic (refit on the lower
// half of the window) to the covariance errors.
FitResult fit_ir_structure(const ScanSeries& s);

// growth along a cutoff grid: flat data -> bounded_other, else power law
// A*L^rho vs log law A*ln(L)+B by relative residual
FitResult fit_uv_divergence(const ScanSeries& s);

// lim_{k->0} k^2 A(k) from the four smallest points of a geometric k grid,
// Richardson in k^2; returns (value, error estimate)
std::pair<double, double> finite_a_shift(const ScanSeries& s);

struct TableEntry {
    std::string graph; // catalog name of the representative
    GraphClass topo_class = GraphClass::planar_regular;
    int n_external = 0;
    std::string expected; // "ren." | "finite ren." | "convergent"
    std::string measured;
    bool match = false;
};

// six-cell classification matrix (rows: planar regular / planar irregular /
// nonplanar; columns: 2-point / 4-point), each cell measured numerically from
// cutoff scans of a representative catalog graph and compared against the
// topology-predicted class
std::vector<TableEntry> reproduce_table(const std::vector<GraphCatalogEntry>& catalog,
                                        std::uint64_t seed = 42);

} // namespace moyal4
