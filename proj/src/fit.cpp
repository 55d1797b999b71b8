#include "moyal4/fit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace moyal4 {

std::string to_string(FitModel m) {
    switch (m) {
        case FitModel::ir_structure: return "ir_structure";
        case FitModel::power_law: return "power_law";
        case FitModel::log_law: return "log_law";
        case FitModel::bounded_other: return "bounded_other";
    }
    return "?";
}

const FitCoefficient* FitResult::find(const std::string& name) const {
    for (const auto& c : coefficients)
        if (c.name == name) return &c;
    return nullptr;
}

namespace {

void check_series(const ScanSeries& s, ScanAxis want, const char* who) {
    std::string head(who);
    if (s.axis != want) throw std::invalid_argument(head + ": wrong scan axis");
    if (s.axis_values.size() < 8) throw std::invalid_argument(head + ": need at least 8 points");
    if (s.points.size() != s.axis_values.size())
        throw std::invalid_argument(head + ": one sample per axis value required");
    for (std::size_t i = 0; i < s.axis_values.size(); ++i) {
        double x = s.axis_values[i];
        if (!std::isfinite(x) || x <= 0.0)
            throw std::invalid_argument(head + ": axis values must be finite and positive");
        if (i > 0 && x <= s.axis_values[i - 1])
            throw std::invalid_argument(head + ": axis values must be strictly increasing");
    }
}

// quoted errors floored so exact quadrature points cannot dominate the fit
double sigma_floor(const AmplitudeSample& p) {
    return std::max({p.abs_err, 1e-12, 1e-10 * std::abs(p.value.real())});
}

struct Wlsq {
    Eigen::VectorXd beta, se;
    double rms = 0.0; // rms of whitened residuals
    double r2 = 0.0;
};

// weights 1/sigma; covariance inflated by the reduced chi^2 when > 1, so the
// errors stay honest whether the quoted sigmas are tight or loose
Wlsq wlsq(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& sig) {
    const Eigen::Index n = X.rows(), p = X.cols();
    if (n <= p) throw std::invalid_argument("not enough points for the fit");
    Eigen::VectorXd w = sig.cwiseInverse();
    Eigen::MatrixXd Xw = w.asDiagonal() * X;
    Eigen::VectorXd yw = y.cwiseProduct(w);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xw);
    if (qr.rank() < p) throw std::runtime_error("degenerate fit design");

    Wlsq out;
    out.beta = qr.solve(yw);
    const double chi2 = (yw - Xw * out.beta).squaredNorm();
    const double scale = std::max(1.0, chi2 / static_cast<double>(n - p));
    Eigen::MatrixXd cov =
        (Xw.transpose() * Xw).ldlt().solve(Eigen::MatrixXd::Identity(p, p)) * scale;
    out.se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    out.rms = std::sqrt(chi2 / static_cast<double>(n));

    const Eigen::VectorXd w2 = w.cwiseAbs2();
    const double ybw = y.cwiseProduct(w2).sum() / w2.sum();
    const double sstot = ((y.array() - ybw) * w.array()).square().sum();
    out.r2 = sstot > 0.0 ? std::clamp(1.0 - chi2 / sstot, 0.0, 1.0) : 0.0;
    return out;
}

struct LineFit {
    double slope = 0.0, offset = 0.0, se_slope = 0.0, se_offset = 0.0, r2 = 0.0;
};

// unweighted y = offset + slope x with ordinary least squares errors
LineFit line_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    if (!(det > 0.0)) throw std::runtime_error("degenerate line fit");
    LineFit f;
    f.slope = (n * sxy - sx * sy) / det;
    f.offset = (sy - f.slope * sx) / n;
    double rss = 0.0, sst = 0.0;
    const double ym = sy / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.offset + f.slope * x[i]);
        rss += r * r;
        sst += (y[i] - ym) * (y[i] - ym);
    }
    const double s2 = rss / std::max(1.0, n - 2.0);
    f.se_slope = std::sqrt(s2 * n / det);
    f.se_offset = std::sqrt(s2 * sxx / det);
    f.r2 = sst > 0.0 ? std::clamp(1.0 - rss / sst, 0.0, 1.0) : 0.0;
    return f;
}

} // namespace

FitResult fit_ir_structure(const ScanSeries& s) {
    check_series(s, ScanAxis::k_ir, "fit_ir_structure");
    const double kmin = s.axis_values.front(), kmax = s.axis_values.back();
    if (kmax > 1.0) throw std::invalid_argument("fit_ir_structure: window must sit below k = 1");
    if (kmax / kmin < 99.0)
        throw std::invalid_argument("fit_ir_structure: window must span at least two decades");

    const std::size_t n = s.axis_values.size();
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd y(n), sig(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double k2 = s.axis_values[i] * s.axis_values[i];
        X(i, 0) = 1.0 / k2;
        X(i, 1) = std::log(k2);
        X(i, 2) = 1.0;
        y(i) = s.points[i].value.real();
        sig(i) = sigma_floor(s.points[i]);
    }
    const Wlsq full = wlsq(X, y, sig);

    // window-stability systematic: refit on the lower half of the log window
    // and charge the coefficient drift as an extra error in quadrature
    const double kmid = std::sqrt(kmin * kmax);
    std::vector<std::size_t> lower;
    for (std::size_t i = 0; i < n; ++i)
        if (s.axis_values[i] <= kmid) lower.push_back(i);
    if (lower.size() < 4) {
        lower.clear();
        for (std::size_t i = 0; i < (n + 1) / 2; ++i) lower.push_back(i);
    }
    Eigen::MatrixXd Xl(lower.size(), 3);
    Eigen::VectorXd yl(lower.size()), sigl(lower.size());
    for (std::size_t j = 0; j < lower.size(); ++j) {
        Xl.row(j) = X.row(lower[j]);
        yl(j) = y(lower[j]);
        sigl(j) = sig(lower[j]);
    }
    const Wlsq low = wlsq(Xl, yl, sigl);

    FitResult r;
    r.model = FitModel::ir_structure;
    const char* names[3] = {"c", "c_prime", "d0"};
    for (int j = 0; j < 3; ++j) {
        const double syst = std::abs(full.beta(j) - low.beta(j));
        r.coefficients.push_back({names[j], full.beta(j), std::hypot(full.se(j), syst)});
    }
    r.residual_norm = full.rms;
    r.r_squared = full.r2;
    return r;
}

FitResult fit_uv_divergence(const ScanSeries& s) {
    check_series(s, ScanAxis::lambda_uv, "fit_uv_divergence");
    if (s.axis_values.back() / s.axis_values.front() < 99.0)
        throw std::invalid_argument("fit_uv_divergence: grid must span at least two decades");

    const std::size_t n = s.axis_values.size();
    std::vector<double> lnL(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
        lnL[i] = std::log(s.axis_values[i]);
        v[i] = s.points[i].value.real();
    }

    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(n);
    const double sem = std::sqrt(var / std::max(1.0, static_cast<double>(n) - 1.0));
    const double flat = std::sqrt(var) / std::max(std::abs(mean), 1e-300);

    auto bounded = [&]() {
        FitResult r;
        r.model = FitModel::bounded_other;
        r.coefficients.push_back({"level", mean, sem});
        r.residual_norm = flat;
        r.r_squared = 0.0;
        return r;
    };
    if (flat < 0.02) return bounded();

    auto rel_rms = [&](const std::function<double(std::size_t)>& pred) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = (v[i] - pred(i)) / std::max(std::abs(v[i]), 1e-300);
            acc += d * d;
        }
        return std::sqrt(acc / static_cast<double>(n));
    };

    // power law needs one sign across the grid; the log law competes always
    bool uniform = true;
    for (double x : v)
        if (!(v.front() > 0.0 ? x > 0.0 : x < 0.0)) uniform = false;
    const double sign = v.front() > 0.0 ? 1.0 : -1.0;
    LineFit pw;
    double pw_rel = kInf;
    if (uniform) {
        std::vector<double> lnv(n);
        for (std::size_t i = 0; i < n; ++i) lnv[i] = std::log(std::abs(v[i]));
        pw = line_fit(lnL, lnv);
        pw_rel = rel_rms([&](std::size_t i) { return sign * std::exp(pw.offset + pw.slope * lnL[i]); });
    }
    const LineFit lg = line_fit(lnL, v);
    const double lg_rel = rel_rms([&](std::size_t i) { return lg.offset + lg.slope * lnL[i]; });

    const bool power_wins = uniform && pw_rel < lg_rel;
    // a law only counts when it actually describes the data: large residuals,
    // near-zero exponents, and modest exponents that barely beat the log law
    // are all plateau noise in disguise
    if (std::min(pw_rel, lg_rel) >= 0.05) return bounded();
    if (power_wins && std::abs(pw.slope) < 0.25) return bounded();
    if (power_wins && lg_rel <= 10.0 * pw_rel && std::abs(pw.slope) < 0.5) return bounded();

    FitResult r;
    if (power_wins) {
        const double amp = sign * std::exp(pw.offset);
        r.model = FitModel::power_law;
        r.coefficients.push_back({"rho", pw.slope, pw.se_slope});
        r.coefficients.push_back({"amplitude", amp, std::abs(amp) * pw.se_offset});
        r.residual_norm = pw_rel;
        r.r_squared = pw.r2;
    } else {
        r.model = FitModel::log_law;
        r.coefficients.push_back({"slope", lg.slope, lg.se_slope});
        r.coefficients.push_back({"offset", lg.offset, lg.se_offset});
        r.residual_norm = lg_rel;
        r.r_squared = lg.r2;
    }
    return r;
}

std::pair<double, double> finite_a_shift(const ScanSeries& s) {
    check_series(s, ScanAxis::k_ir, "finite_a_shift");
    if (!(s.params.a > 0.0)) throw std::invalid_argument("finite_a_shift: requires a > 0");

    const double k0 = s.axis_values[0], k1 = s.axis_values[1];
    const double k2 = s.axis_values[2], k3 = s.axis_values[3];
    const double ratio = k1 / k0;
    if (std::abs(k2 / k1 - ratio) > 0.02 * ratio || std::abs(k3 / k2 - ratio) > 0.02 * ratio)
        throw std::invalid_argument("finite_a_shift: grid must be geometric near the origin");

    // Richardson in k^2 on f = k^2 A(k), ordered by descending k
    const double f[4] = {k3 * k3 * s.points[3].value.real(), k2 * k2 * s.points[2].value.real(),
                         k1 * k1 * s.points[1].value.real(), k0 * k0 * s.points[0].value.real()};
    const double s2 = ratio * ratio, s4 = s2 * s2;
    double r1[3], r2[2];
    for (int i = 0; i < 3; ++i) r1[i] = (s2 * f[i + 1] - f[i]) / (s2 - 1.0);
    for (int i = 0; i < 2; ++i) r2[i] = (s4 * r1[i + 1] - r1[i]) / (s4 - 1.0);
    const double value = r2[1];
    const double err = std::abs(r2[1] - r2[0]) + std::abs(r2[1] - r1[2]);
    if (err > 0.1 * std::abs(value))
        throw std::runtime_error("finite_a_shift: extrapolation did not stabilize");
    return {value, err};
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + (salt + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::vector<double> logspace(double e0, double e1, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = std::pow(10.0, e0 + (e1 - e0) * i / (n - 1));
    return v;
}

std::string divergence_label(DivergenceClass c) {
    switch (c) {
        case DivergenceClass::renormalizable_divergent: return "ren.";
        case DivergenceClass::finite_renormalization: return "finite ren.";
        case DivergenceClass::convergent: return "convergent";
    }
    return "?";
}

} // namespace

std::vector<TableEntry> reproduce_table(const std::vector<GraphCatalogEntry>& catalog,
                                        std::uint64_t seed) {
    const ModelParams par;
    std::vector<TableEntry> table;
    std::uint64_t cell = 0;

    auto find = [&](const std::string& name) -> const GraphCatalogEntry* {
        for (const auto& e : catalog)
            if (e.name == name) return &e;
        return nullptr;
    };
    auto uv_series = [&](std::vector<double> grid, std::vector<AmplitudeSample> pts) {
        ScanSeries s;
        s.axis = ScanAxis::lambda_uv;
        s.axis_values = std::move(grid);
        s.points = std::move(pts);
        s.params = par;
        return s;
    };
    // a cutoff-stable 2-point function can still force a mass-type subtraction
    // through its k->0 structure; 4-point cells pass no IR probe
    auto classify = [](const FitResult& uv, const std::function<bool()>& ir_mass_term) {
        if (uv.model == FitModel::power_law || uv.model == FitModel::log_law)
            return std::string("ren.");
        if (ir_mass_term && ir_mass_term()) return std::string("finite ren.");
        return std::string("convergent");
    };
    auto has_mass_term = [](const FitResult& ir) {
        const FitCoefficient* c = ir.find("c");
        return c != nullptr && std::abs(c->value) >= 5.0 * c->std_error;
    };
    auto run_cell = [&](const std::string& name,
                        const std::function<std::string(const RibbonGraph&)>& measure) {
        ++cell;
        TableEntry e;
        e.graph = name;
        const GraphCatalogEntry* ge = find(name);
        if (ge == nullptr) {
            e.measured = "missing from catalog";
            table.push_back(e);
            return;
        }
        try {
            TopologyReport rep = topology_report(ge->graph);
            e.topo_class = rep.klass;
            e.n_external = rep.N;
            e.expected = divergence_label(divergence_class(rep));
            e.measured = measure(ge->graph);
        } catch (const std::exception& ex) {
            e.measured = std::string("error: ") + ex.what();
        }
        e.match = !e.expected.empty() && e.measured == e.expected;
        table.push_back(e);
    };

    run_cell("tadpole_p", [&](const RibbonGraph&) {
        auto grid = logspace(1.0, 3.0, 9);
        std::vector<AmplitudeSample> pts;
        for (double L : grid) pts.push_back(tadpole_planar(par, L));
        return classify(fit_uv_divergence(uv_series(grid, std::move(pts))), nullptr);
    });

    run_cell("fourpoint_regular", [&](const RibbonGraph&) {
        auto grid = logspace(1.0, 3.0, 9);
        std::vector<AmplitudeSample> pts;
        for (double L : grid) {
            CutoffSpec cut;
            cut.p_uv = L;
            pts.push_back(fourpoint_regular(Vec4{{1.0, 0.0, 0.0, 0.0}}, par, cut));
        }
        return classify(fit_uv_divergence(uv_series(grid, std::move(pts))), nullptr);
    });

    run_cell("tadpole_np", [&](const RibbonGraph&) {
        // the cutoff grid starts past the crossover so only the plateau is fit
        auto grid = logspace(1.5, 3.5, 9);
        std::vector<AmplitudeSample> pts;
        for (double L : grid) {
            CutoffSpec cut;
            cut.p_uv = L;
            pts.push_back(tadpole_nonplanar(Vec4{{1.0, 0.0, 0.0, 0.0}}, par, cut));
        }
        FitResult uv = fit_uv_divergence(uv_series(grid, std::move(pts)));
        return classify(uv, [&] {
            ScanSeries s;
            s.axis = ScanAxis::k_ir;
            s.axis_values = logspace(-3.0, -1.0, 12);
            s.params = par;
            for (double k : s.axis_values) {
                CutoffSpec cut;
                cut.alpha_max = std::min(k * k, 1.0 / (k * k));
                s.points.push_back(tadpole_nonplanar(Vec4{{k, 0.0, 0.0, 0.0}}, par, cut));
            }
            return has_mass_term(fit_ir_structure(s));
        });
    });

    run_cell("fourpoint_irregular", [&](const RibbonGraph& g) {
        auto grid = logspace(0.5, 2.5, 9);
        std::map<std::string, Vec4> ext{{"x1", Vec4{{1.0, 0.0, 0.0, 0.0}}},
                                        {"x2", Vec4{{0.0, 1.0, 0.0, 0.0}}},
                                        {"x3", Vec4{{-1.0, 0.0, 0.0, 0.0}}},
                                        {"x4", Vec4{{0.0, -1.0, 0.0, 0.0}}}};
        auto pts = schwinger_mc_scan(g, par, ext, CutoffSpec{}, grid, 400000, mix_seed(seed, cell));
        return classify(fit_uv_divergence(uv_series(grid, std::move(pts))), nullptr);
    });

    run_cell("sunset_np", [&](const RibbonGraph& g) {
        auto grid = logspace(0.7, 2.7, 9);
        std::map<std::string, Vec4> ext{{"x1", Vec4{{1.0, 0.0, 0.0, 0.0}}},
                                        {"x2", Vec4{{-1.0, 0.0, 0.0, 0.0}}}};
        auto pts = schwinger_mc_scan(g, par, ext, CutoffSpec{}, grid, 300000, mix_seed(seed, cell));
        FitResult uv = fit_uv_divergence(uv_series(grid, std::move(pts)));
        return classify(uv, [&] {
            ScanSeries s;
            s.axis = ScanAxis::k_ir;
            s.axis_values = logspace(-3.0, -1.0, 12);
            s.params = par;
            for (std::size_t j = 0; j < s.axis_values.size(); ++j) {
                const double k = s.axis_values[j];
                std::map<std::string, Vec4> e2{{"x1", Vec4{{k, 0.0, 0.0, 0.0}}},
                                               {"x2", Vec4{{-k, 0.0, 0.0, 0.0}}}};
                CutoffSpec cut;
                cut.p_uv = 30.0;
                s.points.push_back(
                    schwinger_mc(g, par, e2, cut, 100000, mix_seed(seed, cell * 1000 + j)));
            }
            return has_mass_term(fit_ir_structure(s));
        });
    });

    run_cell("fourpoint_np", [&](const RibbonGraph& g) {
        auto grid = logspace(0.7, 2.7, 9);
        std::map<std::string, Vec4> ext{{"x1", Vec4{{1.0, 0.0, 0.0, 0.0}}},
                                        {"x2", Vec4{{0.0, 1.0, 0.0, 0.0}}},
                                        {"x3", Vec4{{-1.0, 0.0, 0.0, 0.0}}},
                                        {"x4", Vec4{{0.0, -1.0, 0.0, 0.0}}}};
        auto pts = schwinger_mc_scan(g, par, ext, CutoffSpec{}, grid, 300000, mix_seed(seed, cell));
        return classify(fit_uv_divergence(uv_series(grid, std::move(pts))), nullptr);
    });

    return table;
}

} // namespace moyal4
