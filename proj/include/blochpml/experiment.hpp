#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "blochpml/assembly.hpp"
#include "blochpml/bloch.hpp"
#include "blochpml/branch.hpp"
#include "blochpml/cellsolve.hpp"
#include "blochpml/contour.hpp"
#include "blochpml/errors.hpp"
#include "blochpml/mesh.hpp"
#include "blochpml/pml_bound.hpp"
#include "blochpml/source.hpp"
#include "blochpml/surface.hpp"

namespace blochpml {

/// Everything a sweep run depends on, parseable from a key=value file.
/// Every field is echoed into the provenance sidecar of each output.
struct ExperimentConfig {
    std::vector<double> k{1.2, std::sqrt(5.0), 1.0, 1.5};
    std::string surface = "wavy";
    double h = 0.05;
    double height = 2.5;           ///< truncation height H
    double pml_thickness = 1.5;    ///< lambda
    double chi_arg = kPi / 4.0;    ///< arg(chi), |chi| = 1
    int pml_degree = 2;            ///< m
    std::vector<double> rho{2, 4, 6, 8, 10, 12, 14, 16, 18, 20};
    double delta = 0.0;            ///< detour radius; 0 = automatic
    int nodes = 80;                ///< contour nodes per reconstruction
    int ref_nodes = 160;           ///< nodes for the reference solution
    int j_range = 40;              ///< DtN series truncation
    double line_x2 = 2.4;          ///< evaluation line height
    int line_n = 257;              ///< evaluation line points
    std::string out_dir = "out";
    bool strict_tau = false;
    double source_x1 = 0.0;
    double source_x2 = 1.8;
    double source_r_inner = 0.1;
    double source_r_outer = 0.3;
    double source_amplitude = 3.0;
    int source_smoothness = 8;
    double tol_half_integer = 1e-9;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<double> parse_list(const std::string& v, const std::string& key) {
    std::string s = v;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream is(s);
    std::vector<double> out;
    double x;
    while (is >> x) out.push_back(x);
    if (out.empty() || !is.eof())
        throw ConfigError("bad numeric list for key '" + key + "': " + v);
    return out;
}

inline double parse_double(const std::string& v, const std::string& key) {
    std::size_t pos = 0;
    double x;
    try {
        x = std::stod(v, &pos);
    } catch (...) {
        throw ConfigError("bad number for key '" + key + "': " + v);
    }
    if (trim(v.substr(pos)) != "")
        throw ConfigError("bad number for key '" + key + "': " + v);
    return x;
}

inline int parse_int(const std::string& v, const std::string& key) {
    const double x = parse_double(v, key);
    if (x != std::floor(x)) throw ConfigError("key '" + key + "' needs an integer");
    return static_cast<int>(x);
}

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw ConfigError("bad boolean for key '" + key + "': " + v);
}

inline std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string fmt_list(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += " ";
        s += fmt(xs[i]);
    }
    return s;
}

}  // namespace detail

inline void apply_config_entry(ExperimentConfig& c, const std::string& key,
                               const std::string& value) {
    using namespace detail;
    if (key == "k") c.k = parse_list(value, key);
    else if (key == "surface") c.surface = value;
    else if (key == "h") c.h = parse_double(value, key);
    else if (key == "height") c.height = parse_double(value, key);
    else if (key == "pml_thickness") c.pml_thickness = parse_double(value, key);
    else if (key == "chi_arg") c.chi_arg = parse_double(value, key);
    else if (key == "pml_degree") c.pml_degree = parse_int(value, key);
    else if (key == "rho") c.rho = parse_list(value, key);
    else if (key == "delta") c.delta = parse_double(value, key);
    else if (key == "nodes") c.nodes = parse_int(value, key);
    else if (key == "ref_nodes") c.ref_nodes = parse_int(value, key);
    else if (key == "j_range") c.j_range = parse_int(value, key);
    else if (key == "line_x2") c.line_x2 = parse_double(value, key);
    else if (key == "line_n") c.line_n = parse_int(value, key);
    else if (key == "out_dir") c.out_dir = value;
    else if (key == "strict_tau") c.strict_tau = parse_bool(value, key);
    else if (key == "source_x1") c.source_x1 = parse_double(value, key);
    else if (key == "source_x2") c.source_x2 = parse_double(value, key);
    else if (key == "source_r_inner") c.source_r_inner = parse_double(value, key);
    else if (key == "source_r_outer") c.source_r_outer = parse_double(value, key);
    else if (key == "source_amplitude") c.source_amplitude = parse_double(value, key);
    else if (key == "source_smoothness") c.source_smoothness = parse_int(value, key);
    else if (key == "tol_half_integer") c.tol_half_integer = parse_double(value, key);
    else throw ConfigError("unknown config key '" + key + "'");
}

/// Plain-text key = value format, '#' comments.
inline ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) +
                              ": expected key = value");
        apply_config_entry(c, detail::trim(line.substr(0, eq)),
                           detail::trim(line.substr(eq + 1)));
    }
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

inline void echo_config(const ExperimentConfig& c, std::ostream& os) {
    using detail::fmt;
    using detail::fmt_list;
    os << "k = " << fmt_list(c.k) << "\n"
       << "surface = " << c.surface << "\n"
       << "h = " << fmt(c.h) << "\n"
       << "height = " << fmt(c.height) << "\n"
       << "pml_thickness = " << fmt(c.pml_thickness) << "\n"
       << "chi_arg = " << fmt(c.chi_arg) << "\n"
       << "pml_degree = " << c.pml_degree << "\n"
       << "rho = " << fmt_list(c.rho) << "\n"
       << "delta = " << fmt(c.delta) << "\n"
       << "nodes = " << c.nodes << "\n"
       << "ref_nodes = " << c.ref_nodes << "\n"
       << "j_range = " << c.j_range << "\n"
       << "line_x2 = " << fmt(c.line_x2) << "\n"
       << "line_n = " << c.line_n << "\n"
       << "out_dir = " << c.out_dir << "\n"
       << "strict_tau = " << (c.strict_tau ? 1 : 0) << "\n"
       << "source_x1 = " << fmt(c.source_x1) << "\n"
       << "source_x2 = " << fmt(c.source_x2) << "\n"
       << "source_r_inner = " << fmt(c.source_r_inner) << "\n"
       << "source_r_outer = " << fmt(c.source_r_outer) << "\n"
       << "source_amplitude = " << fmt(c.source_amplitude) << "\n"
       << "source_smoothness = " << c.source_smoothness << "\n"
       << "tol_half_integer = " << fmt(c.tol_half_integer) << "\n";
}

inline PeriodicSurface surface_from_config(const ExperimentConfig& c) {
    if (c.surface == "wavy") return wavy_surface();
    if (c.surface.rfind("flat:", 0) == 0)
        return flat_surface(detail::parse_double(c.surface.substr(5), "surface"));
    throw ConfigError("unknown surface '" + c.surface + "'");
}

inline SourceTerm source_from_config(const ExperimentConfig& c) {
    return smooth_disk_source({c.source_x1, c.source_x2}, c.source_r_inner,
                              c.source_r_outer, c.source_amplitude,
                              c.source_smoothness);
}

inline Complex chi_from_config(const ExperimentConfig& c) {
    return std::polar(1.0, c.chi_arg);
}

/// Least-squares slope of -ln(err) against rho, restricted to rows above
/// the plateau floor (default: 10x the smallest error seen).
inline double fit_slope(std::span<const double> rhos, std::span<const double> errs,
                        double plateau_floor = 0.0) {
    if (rhos.size() != errs.size()) throw Error("fit_slope: size mismatch");
    if (plateau_floor <= 0.0) {
        double mn = std::numeric_limits<double>::infinity();
        for (double e : errs)
            if (std::isfinite(e)) mn = std::min(mn, e);
        plateau_floor = 10.0 * mn;
    }
    std::vector<double> x, y;
    for (std::size_t i = 0; i < rhos.size(); ++i) {
        if (!std::isfinite(errs[i]) || errs[i] <= plateau_floor) continue;
        x.push_back(rhos[i]);
        y.push_back(-std::log(errs[i]));
    }
    if (x.size() < 3)
        throw TooFewPoints("fit_slope: fewer than 3 rows above the plateau floor");
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / x.size(), my = sy / y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

struct SweepRow {
    double k = 0.0;
    double rho = 0.0;
    double abs_sigma = 0.0;
    double tau = 0.0;
    double err = std::numeric_limits<double>::quiet_NaN();
    bool ok = false;
    std::string note;
};

struct SlopeFit {
    double k = 0.0;
    double slope = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
    bool ok = false;
    std::string note;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<SlopeFit> slopes;
    struct KInfo {
        double k = 0.0;
        double delta = 0.0;
        bool assumption_ok = true;
        std::string contour;
    };
    std::vector<KInfo> k_info;
    std::vector<std::string> warnings;
};

/// Full error-vs-rho study: for each k, an exact-DtN reference on the
/// deformed contour (straight when the wavenumber sits on the n/2 grid)
/// at ref_nodes, then one layer-DtN reconstruction per rho at `nodes`,
/// compared on the evaluation line.  Rows keep going past per-row
/// failures.
inline SweepResult run_pml_sweep(const ExperimentConfig& cfg) {
    SweepResult result;
    const PeriodicSurface surface = surface_from_config(cfg);
    const SourceTerm source = source_from_config(cfg);
    const Complex chi = chi_from_config(cfg);
    auto mesh = std::make_shared<const CellMesh>(
        build_cell_mesh(surface, cfg.height, cfg.h));
    const auto line = evaluation_line(cfg.line_x2, cfg.line_n);

    for (double kval : cfg.k) {
        const Wavenumber k =
            decompose_wavenumber(kval, cfg.tol_half_integer, true);
        auto blocks = std::make_shared<const OperatorBlocks>(
            assemble_blocks(*mesh, k));

        Contour contour;
        double delta_used = 0.0;
        if (k.assumption_ok) {
            delta_used = cfg.delta > 0.0 ? cfg.delta : default_delta(k);
            contour = build_contour(k, delta_used);
        } else {
            contour = build_straight_contour(k);
            result.warnings.push_back(
                "k = " + detail::fmt(kval) +
                " is on the n/2 grid: using the straight contour");
        }
        result.k_info.push_back(
            {kval, delta_used, k.assumption_ok, contour.describe()});

        FieldOnSet reference;
        try {
            reference = reconstruct(
                make_exact_dtn_solver(mesh, blocks, source, cfg.j_range),
                contour, cfg.ref_nodes, line, "exact-dtn", kval);
        } catch (const Error& e) {
            for (double rho : cfg.rho) {
                SweepRow row;
                row.k = kval;
                row.rho = rho;
                row.note = std::string("reference failed: ") + e.what();
                result.rows.push_back(row);
            }
            continue;
        }

        std::vector<double> fit_rho, fit_err;
        for (double rho : cfg.rho) {
            SweepRow row;
            row.k = kval;
            row.rho = rho;
            try {
                const PmlProfile profile =
                    make_pml_profile(cfg.pml_thickness, rho, chi, cfg.pml_degree);
                row.abs_sigma = std::abs(profile.sigma);
                row.tau = profile.tau;
                if (cfg.strict_tau && !profile.tau_in_assumed_range)
                    result.warnings.push_back(
                        "k = " + detail::fmt(kval) + " rho = " + detail::fmt(rho) +
                        ": tau = " + detail::fmt(profile.tau) +
                        " outside the assumed interval; run proceeds");
                const FieldOnSet approx = reconstruct(
                    make_pml_dtn_solver(mesh, blocks, source, cfg.j_range, profile),
                    contour, cfg.nodes, line, "pml-dtn", kval);
                row.err = relative_error(approx, reference);
                row.ok = true;
                fit_rho.push_back(rho);
                fit_err.push_back(row.err);
            } catch (const Error& e) {
                row.note = e.what();
            }
            result.rows.push_back(row);
        }

        SlopeFit fit;
        fit.k = kval;
        try {
            fit.slope = fit_slope(fit_rho, fit_err);
            double mn = std::numeric_limits<double>::infinity();
            for (double e : fit_err) mn = std::min(mn, e);
            const double floor = 10.0 * mn;
            fit.window_lo = std::numeric_limits<double>::infinity();
            fit.window_hi = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < fit_rho.size(); ++i) {
                if (fit_err[i] <= floor) continue;
                fit.window_lo = std::min(fit.window_lo, fit_rho[i]);
                fit.window_hi = std::max(fit.window_hi, fit_rho[i]);
            }
            fit.ok = true;
        } catch (const Error& e) {
            fit.note = e.what();
        }
        result.slopes.push_back(fit);
    }
    return result;
}

inline void write_sweep_csv(const SweepResult& r, std::ostream& os) {
    os << "k,rho,abs_sigma,tau,err\n";
    char buf[256];
    for (const auto& row : r.rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", row.k,
                      row.rho, row.abs_sigma, row.tau, row.err);
        os << buf;
    }
}

inline void write_slopes_csv(const SweepResult& r, std::ostream& os) {
    os << "k,slope,window_lo,window_hi\n";
    char buf[256];
    for (const auto& s : r.slopes) {
        if (!s.ok) continue;
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", s.k, s.slope,
                      s.window_lo, s.window_hi);
        os << buf;
    }
}

inline void write_field_csv(const FieldOnSet& f, std::ostream& os) {
    os << "x1,x2,re,im\n";
    char buf[256];
    for (std::size_t i = 0; i < f.points.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", f.points[i][0],
                      f.points[i][1], f.values[i].real(), f.values[i].imag());
        os << buf;
    }
}

inline void write_provenance(const ExperimentConfig& cfg, const SweepResult& r,
                             std::ostream& os) {
    os << "# provenance\n";
    echo_config(cfg, os);
    for (const auto& ki : r.k_info)
        os << "run: k = " << detail::fmt(ki.k) << " delta = "
           << detail::fmt(ki.delta) << " contour = " << ki.contour
           << " assumption_ok = " << (ki.assumption_ok ? 1 : 0) << "\n";
    for (const auto& w : r.warnings) os << "warning: " << w << "\n";
}

/// Runs the sweep and writes sweep.csv, slopes.csv, per-k gnuplot data
/// and provenance.txt into `dir`.
inline SweepResult run_sweep_to_dir(const ExperimentConfig& cfg,
                                    const std::filesystem::path& dir) {
    const SweepResult r = run_pml_sweep(cfg);
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir / "sweep.csv");
        write_sweep_csv(r, os);
    }
    {
        std::ofstream os(dir / "slopes.csv");
        write_slopes_csv(r, os);
    }
    for (const auto& ki : r.k_info) {
        char name[64];
        std::snprintf(name, sizeof name, "plot_k%.10g.dat", ki.k);
        std::ofstream os(dir / name);
        char buf[128];
        for (const auto& row : r.rows) {
            if (row.k != ki.k || !row.ok) continue;
            std::snprintf(buf, sizeof buf, "%.17g %.17g\n", row.rho, row.err);
            os << buf;
        }
    }
    {
        std::ofstream os(dir / "provenance.txt");
        write_provenance(cfg, r, os);
    }
    return r;
}

}  // namespace blochpml
