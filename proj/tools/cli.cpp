// Command-line front end: solve / sweep / contour-check / verify-lemma /
// oracle-check / dump-mesh.  Exit codes: 0 success, 1 failed check or
// run error, 2 configuration or usage error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "blochpml/blochpml.hpp"

namespace fs = std::filesystem;
using namespace blochpml;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_override;
    double h_override = 0.0;
    std::vector<double> k_override;
};

ExperimentConfig load(const CommonOpts& opts) {
    ExperimentConfig cfg;
    if (!opts.config_path.empty()) cfg = load_config(opts.config_path);
    if (!opts.out_override.empty()) cfg.out_dir = opts.out_override;
    if (opts.h_override > 0.0) cfg.h = opts.h_override;
    if (!opts.k_override.empty()) cfg.k = opts.k_override;
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "key = value config file");
    cmd->add_option("--out", opts.out_override, "output directory override");
    cmd->add_option("--hmax", opts.h_override, "mesh size override");
    cmd->add_option("--k", opts.k_override, "wavenumber list override");
}

Contour contour_for(const ExperimentConfig& cfg, const Wavenumber& k,
                    double* delta_used) {
    if (k.assumption_ok) {
        const double d = cfg.delta > 0.0 ? cfg.delta : default_delta(k);
        *delta_used = d;
        return build_contour(k, d);
    }
    *delta_used = 0.0;
    return build_straight_contour(k);
}

int run_solve(const ExperimentConfig& cfg, const std::string& kind,
              double rho) {
    const PeriodicSurface surface = surface_from_config(cfg);
    const SourceTerm source = source_from_config(cfg);
    const Wavenumber k =
        decompose_wavenumber(cfg.k.at(0), cfg.tol_half_integer, true);
    const auto line = evaluation_line(cfg.line_x2, cfg.line_n);

    double delta_used = 0.0;
    const Contour contour = contour_for(cfg, k, &delta_used);

    CellField solver;
    if (kind == "exact") {
        auto mesh = std::make_shared<const CellMesh>(
            build_cell_mesh(surface, cfg.height, cfg.h));
        auto blocks =
            std::make_shared<const OperatorBlocks>(assemble_blocks(*mesh, k));
        solver = make_exact_dtn_solver(mesh, blocks, source, cfg.j_range);
    } else if (kind == "pml-dtn") {
        auto mesh = std::make_shared<const CellMesh>(
            build_cell_mesh(surface, cfg.height, cfg.h));
        auto blocks =
            std::make_shared<const OperatorBlocks>(assemble_blocks(*mesh, k));
        const PmlProfile profile = make_pml_profile(
            cfg.pml_thickness, rho, chi_from_config(cfg), cfg.pml_degree);
        solver = make_pml_dtn_solver(mesh, blocks, source, cfg.j_range, profile);
    } else if (kind == "pml-layer") {
        auto mesh_ext = std::make_shared<const CellMesh>(build_layer_mesh(
            surface, cfg.height, cfg.pml_thickness, cfg.h));
        const PmlProfile profile = make_pml_profile(
            cfg.pml_thickness, rho, chi_from_config(cfg), cfg.pml_degree);
        solver = make_pml_layer_solver(mesh_ext, k, source, profile, cfg.j_range);
    } else {
        std::cerr << "unknown solver kind '" << kind << "'\n";
        return 2;
    }

    const FieldOnSet field =
        reconstruct(solver, contour, cfg.nodes, line, kind, k.k);

    fs::create_directories(cfg.out_dir);
    {
        std::ofstream os(fs::path(cfg.out_dir) / "field.csv");
        write_field_csv(field, os);
    }
    {
        std::ofstream os(fs::path(cfg.out_dir) / "provenance.txt");
        os << "# provenance\n";
        echo_config(cfg, os);
        os << "run: solve kind = " << kind << " rho = " << rho
           << " delta = " << delta_used << " contour = " << contour.describe()
           << " nodes = " << field.provenance.n_nodes << "\n";
    }
    std::cout << "wrote " << (fs::path(cfg.out_dir) / "field.csv").string()
              << " (" << field.points.size() << " points)\n";
    return 0;
}

int run_sweep_cmd(const ExperimentConfig& cfg) {
    const SweepResult r = run_sweep_to_dir(cfg, cfg.out_dir);
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    int failures = 0;
    for (const auto& row : r.rows)
        if (!row.ok) {
            std::cerr << "row k=" << row.k << " rho=" << row.rho
                      << " failed: " << row.note << "\n";
            ++failures;
        }
    for (const auto& s : r.slopes)
        if (s.ok)
            std::printf("k = %-10g slope = %.4f  (window rho in [%g, %g])\n",
                        s.k, s.slope, s.window_lo, s.window_hi);
        else
            std::printf("k = %-10g slope fit skipped: %s\n", s.k,
                        s.note.c_str());
    std::cout << "wrote sweep outputs to " << cfg.out_dir << "\n";
    return failures == 0 ? 0 : 1;
}

int run_contour_check(const ExperimentConfig& cfg) {
    int failures = 0;
    auto report = [&](bool ok, const std::string& what) {
        std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", what.c_str());
        if (!ok) ++failures;
    };
    for (double kval : cfg.k) {
        const Wavenumber k =
            decompose_wavenumber(kval, cfg.tol_half_integer, true);
        double delta_used = 0.0;
        const Contour contour = contour_for(cfg, k, &delta_used);
        char label[128];

        Complex wsum = 0.0;
        for (const auto& n : contour_quadrature(contour, 16)) wsum += n.w;
        std::snprintf(label, sizeof label,
                      "k=%g weights sum to 1 (err %.2e)", kval,
                      std::abs(wsum - 1.0));
        report(std::abs(wsum - 1.0) < 1e-13, label);

        Complex esum = 0.0;
        for (const auto& n : contour_quadrature(contour, 16))
            esum += n.w * std::exp(kI * n.z);
        const double eerr = std::abs(esum - 2.0 * std::sin(0.5));
        std::snprintf(label, sizeof label,
                      "k=%g entire integrand unchanged (err %.2e)", kval, eerr);
        report(eerr < 1e-11, label);

        if (k.assumption_ok) {
            Contour upper;
            upper.pieces.push_back(
                ContourPiece::half_circle_upper(-k.kappa, delta_used));
            Complex circ = 0.0;
            for (const auto& n : contour_quadrature(upper, 32))
                circ += n.w * sqrt_branch(k.kappa + n.z);
            const Complex closed = 2.0 / 3.0 * std::pow(delta_used, 1.5) *
                                   Complex(1.0, 1.0);
            std::snprintf(label, sizeof label,
                          "k=%g detour equals segment closed form (err %.2e)",
                          kval, std::abs(circ - closed));
            report(std::abs(circ - closed) < 1e-10, label);
        }
    }
    return failures == 0 ? 0 : 1;
}

int run_verify_lemma(const ExperimentConfig& cfg, bool corrupt) {
    int failures = 0;
    for (double kval : cfg.k) {
        const Wavenumber k =
            decompose_wavenumber(kval, cfg.tol_half_integer, true);
        if (!k.assumption_ok) {
            std::printf("k = %-10g skipped (no detour contour on the n/2 grid)\n",
                        kval);
            continue;
        }
        const double delta = cfg.delta > 0.0 ? cfg.delta : default_delta(k);
        for (double rho : cfg.rho) {
            const PmlProfile profile = make_pml_profile(
                cfg.pml_thickness, rho, chi_from_config(cfg), cfg.pml_degree);
            try {
                const HBoundReport rep = verify_h_bound(
                    k, delta, profile.sigma, 200, cfg.j_range,
                    corrupt ? corrupted_branch(k) : BranchFn{});
                const bool ok = rep.gamma_est > 0.0 && rep.min_margin >= 0.0;
                std::printf(
                    "[%s] k=%g rho=%g delta=%g gamma=%.4f margin=%.3e\n",
                    ok ? "PASS" : "FAIL", kval, rho, delta, rep.gamma_est,
                    rep.min_margin);
                if (!ok) ++failures;
            } catch (const BoundViolated& e) {
                std::printf("[FAIL] k=%g rho=%g delta=%g: %s\n", kval, rho,
                            delta, e.what());
                ++failures;
            }
        }
    }
    return failures == 0 ? 0 : 1;
}

int run_oracle_check(const ExperimentConfig& cfg) {
    const Wavenumber k =
        decompose_wavenumber(cfg.k.at(0), cfg.tol_half_integer, false);
    const Complex alpha(0.1, 0.0);
    const double c = 1.0, H = cfg.height;
    const int J = 12;
    const RadialCutoff cut = make_radial_cutoff(0.1, 0.3, 8);
    auto g = [cut](double y) { return Complex(cut(std::abs(y - 1.7)), 0.0); };
    const int mode = 1;
    const SourceTerm f = band_source(
        [=](double x1, double x2) {
            return g(x2) * std::exp(kI * (alpha + static_cast<double>(mode)) * x1);
        },
        2.05);

    std::vector<double> hs{2.0 * cfg.h, cfg.h, 0.5 * cfg.h}, errs;
    for (double h : hs) {
        const CellMesh mesh = build_cell_mesh(flat_surface(c), H, h);
        const OperatorBlocks blocks = assemble_blocks(mesh, k);
        const SpMat D = assemble_D(blocks, alpha, J);
        const Vector rhs = assemble_rhs(mesh, f, alpha);
        const CellSolution sol =
            solve_cell(mesh, D, rhs, alpha, k, J, SolverKind::ExactDtn);

        FlatCellOracle oracle(k, alpha, c, H);
        oracle.add_mode(mode, g);
        double num = 0.0, den = 0.0;
        for (int t = 0; t < mesh.n_triangles(); ++t) {
            const auto& cc = mesh.tri_coords[t];
            const double area = mesh.triangle_area(t);
            const Vec2 mids[3] = {
                {0.5 * (cc[0][0] + cc[1][0]), 0.5 * (cc[0][1] + cc[1][1])},
                {0.5 * (cc[1][0] + cc[2][0]), 0.5 * (cc[1][1] + cc[2][1])},
                {0.5 * (cc[0][0] + cc[2][0]), 0.5 * (cc[0][1] + cc[2][1])}};
            const auto& tv = mesh.triangles[t];
            for (int q = 0; q < 3; ++q) {
                Complex wh;
                if (q == 0)
                    wh = 0.5 * (sol.nodal[tv[0]] + sol.nodal[tv[1]]);
                else if (q == 1)
                    wh = 0.5 * (sol.nodal[tv[1]] + sol.nodal[tv[2]]);
                else
                    wh = 0.5 * (sol.nodal[tv[0]] + sol.nodal[tv[2]]);
                const Complex ws = oracle(mids[q][0], mids[q][1]);
                num += area / 3.0 * std::norm(wh - ws);
                den += area / 3.0 * std::norm(ws);
            }
        }
        errs.push_back(std::sqrt(num / den));
        std::printf("h = %-8g relative L2 error vs closed form = %.3e\n", h,
                    errs.back());
    }
    double sx = 0, sy = 0, sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < hs.size(); ++i) {
        const double x = std::log(hs[i]), y = std::log(errs[i]);
        sx += x;
        sy += y;
    }
    const double mx = sx / hs.size(), my = sy / hs.size();
    for (std::size_t i = 0; i < hs.size(); ++i) {
        sxy += (std::log(hs[i]) - mx) * (std::log(errs[i]) - my);
        sxx += (std::log(hs[i]) - mx) * (std::log(hs[i]) - mx);
    }
    const double rate = sxy / sxx;
    const double bound = 1e-2 * (cfg.h / 0.05) * (cfg.h / 0.05);
    const bool ok = rate > 1.7 && rate < 2.3 && errs[1] < bound;
    std::printf("[%s] observed rate = %.3f (window [1.7, 2.3]), err(h=%g) = %.3e"
                " (bound %.1e)\n",
                ok ? "PASS" : "FAIL", rate, cfg.h, errs[1], bound);
    return ok ? 0 : 1;
}

int run_dump_mesh(const ExperimentConfig& cfg, const std::string& out_file) {
    const PeriodicSurface surface = surface_from_config(cfg);
    const CellMesh mesh = build_cell_mesh(surface, cfg.height, cfg.h);
    fs::path path = out_file.empty()
                        ? fs::path(cfg.out_dir) / "mesh.txt"
                        : fs::path(out_file);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path);
    mesh.dump(os);
    std::cout << "wrote " << path.string() << " (" << mesh.n_vertices()
              << " vertices, " << mesh.n_triangles() << " triangles)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Helmholtz scattering above periodic surfaces: exact-DtN and "
                 "layer-truncated solvers with contour-deformed inverse Bloch "
                 "reconstruction"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string solve_kind = "exact";
    double solve_rho = 8.0;
    std::string dump_out;
    bool corrupt_branch = false;

    CLI::App* solve = app.add_subcommand("solve", "reconstruct one field on the line");
    add_common(solve, opts);
    solve->add_option("--kind", solve_kind, "exact | pml-dtn | pml-layer");
    solve->add_option("--rho", solve_rho, "layer strength for pml kinds");

    CLI::App* sweep = app.add_subcommand("sweep", "error-vs-rho study with slope fits");
    add_common(sweep, opts);

    CLI::App* ccheck = app.add_subcommand("contour-check", "quadrature and detour identities");
    add_common(ccheck, opts);

    CLI::App* lemma = app.add_subcommand("verify-lemma", "sampled growth bound for the layer symbol");
    add_common(lemma, opts);
    lemma->add_flag("--corrupt-branch", corrupt_branch,
                    "fault-injection hook: use a wrong square-root branch")
        ->group("");

    CLI::App* ocheck = app.add_subcommand("oracle-check", "flat-surface solver vs closed form");
    add_common(ocheck, opts);

    CLI::App* dump = app.add_subcommand("dump-mesh", "write the cell triangulation");
    add_common(dump, opts);
    dump->add_option("--out-file", dump_out, "target file (default out_dir/mesh.txt)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const ExperimentConfig cfg = load(opts);
        if (solve->parsed()) return run_solve(cfg, solve_kind, solve_rho);
        if (sweep->parsed()) return run_sweep_cmd(cfg);
        if (ccheck->parsed()) return run_contour_check(cfg);
        if (lemma->parsed()) return run_verify_lemma(cfg, corrupt_branch);
        if (ocheck->parsed()) return run_oracle_check(cfg);
        if (dump->parsed()) return run_dump_mesh(cfg, dump_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
