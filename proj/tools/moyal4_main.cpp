#include "moyal4/fit.hpp"
#include "moyal4/rosette.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace {

using namespace moyal4;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + (salt + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// fixed shortest round-trip text form; never locale-dependent
std::string fmt(double x) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", x);
    return b;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RibbonGraph resolve_graph(const std::string& src, std::string* catalog_name = nullptr) {
    for (const auto& e : graph_catalog())
        if (e.name == src) {
            if (catalog_name) *catalog_name = e.name;
            return e.graph;
        }
    if (catalog_name) catalog_name->clear();
    std::ifstream probe(src);
    if (!probe)
        throw std::invalid_argument("unknown graph '" + src +
                                    "': not a catalog name and not a readable file");
    RibbonGraph g = parse_graph(read_file(src));
    require_valid(g);
    return g;
}

// generic external assignment for scans: legs paired opposite, leading pairs
// along distinct coordinate axes, each of magnitude k
std::map<std::string, Vec4> paired_externals(const RibbonGraph& g, double k) {
    const int N = g.N();
    if (N % 2 != 0) throw std::invalid_argument("graph has an odd number of external legs");
    std::map<std::string, Vec4> ext;
    for (int j = 0; j < N / 2; ++j) {
        Vec4 dir{};
        dir[j % 4] = k;
        ext[g.externals[j].first] = dir;
        ext[g.externals[j + N / 2].first] = -dir;
    }
    return ext;
}

struct Options {
    std::string graph_src;
    ModelParams par;
    CutoffSpec cut;
    std::string method = "auto";
    double kmag = 1.0;
    std::size_t samples = 1000000;
    std::uint64_t seed = 42;
    // scan
    std::string axis = "k";
    double lo = 1e-3, hi = 1e-1;
    int points = 20;
    bool log_grid = false;
    std::string out = "-";
    int workers = 0; // 0: pick from hardware
    // powercount / fit inputs
    std::string attribution_path;
    std::string csv_path;
    bool shift = false;
};

void add_param_flags(CLI::App* c, Options& o) {
    c->add_option("--a", o.par.a, "1/p^2 coefficient (default 1)");
    c->add_option("--mu2", o.par.mu2, "mass squared (default 1)");
    c->add_option("--theta", o.par.theta, "noncommutativity scale (default 1)");
    c->add_option("--M", o.par.M, "slice base (default 2)");
}

void add_cutoff_flags(CLI::App* c, Options& o) {
    c->add_option("--alpha-min", o.cut.alpha_min, "Schwinger window lower edge (default 0)");
    c->add_option("--alpha-max", o.cut.alpha_max, "Schwinger window upper edge (default inf)");
    c->add_option("--p-uv", o.cut.p_uv, "hard momentum cutoff (default inf)");
}

void add_eval_flags(CLI::App* c, Options& o) {
    c->add_option("--graph", o.graph_src, "catalog name or graph file")->required();
    c->add_option("--method", o.method, "evaluator: auto, planar, bessel1d, regular, reduced3d, schwinger_mc")
        ->check(CLI::IsMember({"auto", "planar", "bessel1d", "regular", "reduced3d", "schwinger_mc"}));
    c->add_option("--k", o.kmag, "external momentum magnitude (default 1)");
    c->add_option("--samples", o.samples, "Monte Carlo samples (default 1e6)");
    c->add_option("--seed", o.seed, "Monte Carlo seed (default 42)");
    add_param_flags(c, o);
    add_cutoff_flags(c, o);
}

std::string pick_method(const std::string& method, const std::string& catalog_name) {
    if (method != "auto") return method;
    if (catalog_name == "tadpole_p") return "planar";
    if (catalog_name == "tadpole_np") return "bessel1d";
    if (catalog_name == "fourpoint_regular") return "regular";
    if (catalog_name == "fourpoint_irregular") return "reduced3d";
    return "schwinger_mc";
}

AmplitudeSample eval_one(const ModelParams& par, const CutoffSpec& cut, const RibbonGraph& g,
                         const std::string& method, double k, std::size_t samples,
                         std::uint64_t seed) {
    if (method == "planar") {
        if (std::isinf(cut.p_uv)) throw std::domain_error("the planar tadpole needs --p-uv");
        return tadpole_planar(par, cut.p_uv);
    }
    if (method == "bessel1d") return tadpole_nonplanar(Vec4{{k, 0.0, 0.0, 0.0}}, par, cut);
    if (method == "regular") return fourpoint_regular(Vec4{{k, 0.0, 0.0, 0.0}}, par, cut);
    if (method == "reduced3d") return fourpoint_irregular(Vec4{{k, 0.0, 0.0, 0.0}}, par, cut);
    return schwinger_mc(g, par, paired_externals(g, k), cut, samples, seed);
}

int cmd_classify(const Options& o) {
    RibbonGraph g = resolve_graph(o.graph_src);
    TopologyReport rep = topology_report(g);
    std::cout << "n=" << rep.n << " N=" << rep.N << " L=" << rep.L << " F=" << rep.F
              << " g=" << rep.g << " B=" << rep.B << ' ' << to_string(rep.klass)
              << " omega>=" << superficial_degree_bound(rep) << ' '
              << to_string(divergence_class(rep)) << "\n";
    return 0;
}

int cmd_rosette(const Options& o) {
    RibbonGraph g = resolve_graph(o.graph_src);
    SpanningTree t = spanning_tree(g);
    Rosette r = contract_to_rosette(g, t);
    IntersectionMatrix im = intersection_matrix(r);
    std::cout << "tree:";
    for (const auto& eid : t.tree_lines) std::cout << ' ' << eid;
    std::cout << "\nword: " << rosette_word_string(r) << "\nlines:";
    for (const auto& l : im.lines) std::cout << ' ' << l;
    std::cout << "\nI:\n";
    for (const auto& row : im.I) {
        for (int x : row) std::cout << ' ' << (x > 0 ? "+1" : x < 0 ? "-1" : " 0");
        std::cout << "\n";
    }
    return 0;
}

int cmd_powercount(const Options& o) {
    RibbonGraph g = resolve_graph(o.graph_src);
    ScaleAttribution att = parse_attribution(read_file(o.attribution_path));
    for (const auto& h : high_subgraphs(g, att)) {
        std::cout << "i>=" << h.scale_i << " component " << h.component_index << ": edges";
        for (const auto& e : h.edges) std::cout << ' ' << e;
        std::cout << " N_ext=" << h.N_ext << "\n";
    }
    std::cout << "power counting bound: " << power_counting_bound(g, att) << "\n";
    return 0;
}

int cmd_amplitude(const Options& o) {
    std::string cname;
    RibbonGraph g = resolve_graph(o.graph_src, &cname);
    AmplitudeSample s = eval_one(o.par, o.cut, g, pick_method(o.method, cname), o.kmag,
                                 o.samples, o.seed);
    std::cout << "k=" << fmt(o.kmag) << " re=" << fmt(s.value.real())
              << " im=" << fmt(s.value.imag()) << " abs_err=" << fmt(s.abs_err)
              << " method=" << s.method << "\n";
    return 0;
}

int cmd_scan(const Options& o) {
    if (o.axis != "k" && o.axis != "uv") throw std::invalid_argument("--axis must be k or uv");
    if (!(o.lo < o.hi)) throw std::invalid_argument("--min must be below --max");
    if (o.points < 2) throw std::invalid_argument("--points must be at least 2");
    if ((o.log_grid || o.axis == "uv") && !(o.lo > 0.0))
        throw std::invalid_argument("grid must be positive");

    std::string cname;
    RibbonGraph g = resolve_graph(o.graph_src, &cname);
    const std::string method = pick_method(o.method, cname);
    if (o.axis == "k" && method == "planar")
        throw std::invalid_argument("the planar tadpole has no external momentum axis");

    std::vector<double> grid(o.points);
    for (int i = 0; i < o.points; ++i) {
        const double t = static_cast<double>(i) / (o.points - 1);
        grid[i] = o.log_grid ? std::pow(10.0, std::log10(o.lo) + t * (std::log10(o.hi) - std::log10(o.lo)))
                             : o.lo + t * (o.hi - o.lo);
    }

    struct Row {
        AmplitudeSample s;
        std::string err;
    };
    std::vector<Row> rows(grid.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= grid.size()) return;
            try {
                CutoffSpec cut = o.cut;
                double k = o.kmag;
                (o.axis == "uv" ? cut.p_uv : k) = grid[i];
                rows[i].s = eval_one(o.par, cut, g, method, k, o.samples, mix_seed(o.seed, i));
            } catch (const std::exception& ex) {
                rows[i].err = ex.what();
            }
        }
    };
    int nw = o.workers > 0 ? o.workers
                           : std::min<int>(8, std::max(1u, std::thread::hardware_concurrency()));
    nw = std::min<int>(nw, static_cast<int>(grid.size()));
    std::vector<std::thread> pool;
    for (int t = 1; t < nw; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    std::ofstream file;
    if (o.out != "-") {
        file.open(o.out);
        if (!file) throw std::invalid_argument("cannot open --out '" + o.out + "'");
    }
    std::ostream& os = o.out == "-" ? std::cout : file;
    os << "axis,re,im,abs_err,status\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Row& r = rows[i];
        if (r.err.empty()) {
            os << fmt(grid[i]) << ',' << fmt(r.s.value.real()) << ',' << fmt(r.s.value.imag())
               << ',' << fmt(r.s.abs_err) << ",ok\n";
        } else {
            std::string msg = r.err;
            for (char& c : msg)
                if (c == ',' || c == '\n') c = ';';
            os << fmt(grid[i]) << ",nan,nan,nan," << msg << "\n";
        }
    }
    return 0;
}

void print_fit(const FitResult& f) {
    std::cout << "model: " << to_string(f.model) << "\n";
    for (const auto& c : f.coefficients)
        std::cout << "  " << c.name << " = " << fmt(c.value) << " +/- " << fmt(c.std_error) << "\n";
    std::cout << "residual_norm: " << fmt(f.residual_norm) << "\n";
    std::cout << "r_squared: " << fmt(f.r_squared) << "\n";
}

int cmd_fit(const Options& o) {
    if (o.axis != "k" && o.axis != "uv") throw std::invalid_argument("--axis must be k or uv");
    std::istringstream in(read_file(o.csv_path));
    std::string line;
    std::vector<std::pair<double, AmplitudeSample>> rows;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "axis,re,im,abs_err,status") continue;
        std::vector<std::string> tok;
        std::size_t start = 0;
        for (int f = 0; f < 4; ++f) {
            const std::size_t c = line.find(',', start);
            if (c == std::string::npos)
                throw std::invalid_argument("malformed CSV at line " + std::to_string(lineno));
            tok.push_back(line.substr(start, c - start));
            start = c + 1;
        }
        tok.push_back(line.substr(start));
        if (tok[4] != "ok") continue;
        try {
            AmplitudeSample s;
            const double axis = std::stod(tok[0]);
            s.k = o.axis == "k" ? axis : o.kmag;
            s.value = cplx(std::stod(tok[1]), std::stod(tok[2]));
            s.abs_err = std::stod(tok[3]);
            rows.emplace_back(axis, std::move(s));
        } catch (const std::exception&) {
            throw std::invalid_argument("malformed CSV at line " + std::to_string(lineno));
        }
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    ScanSeries s;
    s.axis = o.axis == "k" ? ScanAxis::k_ir : ScanAxis::lambda_uv;
    s.params = o.par;
    for (auto& [axis, sample] : rows) {
        s.axis_values.push_back(axis);
        s.points.push_back(std::move(sample));
    }

    if (o.shift) {
        auto [value, err] = finite_a_shift(s);
        std::cout << "k^2 A(k) -> " << fmt(value) << " +/- " << fmt(err) << "\n";
    } else if (s.axis == ScanAxis::k_ir) {
        print_fit(fit_ir_structure(s));
    } else {
        print_fit(fit_uv_divergence(s));
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ribbon graph topology, Moyal phases, and amplitude scans for the "
                 "noncommutative phi^4 model with a 1/p^2 propagator"};
    app.require_subcommand(1);
    Options o;

    CLI::App* classify = app.add_subcommand("classify", "topology and divergence report");
    classify->add_option("--graph", o.graph_src, "catalog name or graph file")->required();

    CLI::App* rosette = app.add_subcommand("rosette", "contract to a rosette and print the word");
    rosette->add_option("--graph", o.graph_src, "catalog name or graph file")->required();

    CLI::App* powercount =
        app.add_subcommand("powercount", "multiscale power counting for a scale attribution");
    powercount->add_option("--graph", o.graph_src, "catalog name or graph file")->required();
    powercount->add_option("--attribution", o.attribution_path, "scale attribution file")
        ->required();

    CLI::App* amplitude = app.add_subcommand("amplitude", "evaluate one amplitude point");
    add_eval_flags(amplitude, o);

    CLI::App* scan = app.add_subcommand("scan", "evaluate an amplitude over a grid, emit CSV");
    add_eval_flags(scan, o);
    scan->add_option("--axis", o.axis, "grid variable: k (external momentum) or uv (hard cutoff)");
    scan->add_option("--min", o.lo, "grid start")->required();
    scan->add_option("--max", o.hi, "grid end")->required();
    scan->add_option("--points", o.points, "grid size (default 20)");
    scan->add_flag("--log", o.log_grid, "logarithmic grid");
    scan->add_option("--out", o.out, "CSV path, - for stdout (default)");
    scan->add_option("--workers", o.workers, "concurrent grid points (default: hardware, max 8)");

    CLI::App* fit = app.add_subcommand("fit", "fit a scan CSV");
    fit->add_option("--csv", o.csv_path, "scan CSV path")->required();
    fit->add_option("--axis", o.axis, "CSV axis meaning: k or uv");
    fit->add_flag("--shift", o.shift, "Richardson limit of k^2 A(k) instead of a structure fit");
    add_param_flags(fit, o);

    try {
        app.parse(argc, argv);
        if (classify->parsed()) return cmd_classify(o);
        if (rosette->parsed()) return cmd_rosette(o);
        if (powercount->parsed()) return cmd_powercount(o);
        if (amplitude->parsed()) return cmd_amplitude(o);
        if (scan->parsed()) return cmd_scan(o);
        if (fit->parsed()) return cmd_fit(o);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const graph_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
