#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "blochpml/assembly.hpp"
#include "blochpml/branch.hpp"
#include "blochpml/cellsolve.hpp"
#include "blochpml/contour.hpp"
#include "blochpml/errors.hpp"
#include "blochpml/mesh.hpp"
#include "blochpml/source.hpp"

namespace blochpml {

/// Field values on a fixed evaluation set, with enough provenance to
/// reproduce the run.
struct FieldOnSet {
    std::vector<Vec2> points;
    std::vector<Complex> values;
    struct Provenance {
        std::string solver;
        std::string contour;
        int n_nodes = 0;
        double k = 0.0;
    } provenance;
};

/// Uniform evaluation line {x1 in [a, b]} x {x2}, endpoints included.
inline std::vector<Vec2> evaluation_line(double x2, int n, double a = -kPi,
                                         double b = kPi) {
    if (n < 2) throw Error("evaluation line needs at least 2 points");
    std::vector<Vec2> pts(n);
    for (int i = 0; i < n; ++i)
        pts[i] = {a + (b - a) * static_cast<double>(i) / (n - 1), x2};
    return pts;
}

/// Per-alpha cell field: returns the cell solution evaluated at the
/// requested points.  The standard FEM solvers below satisfy this
/// contract; tests may inject semi-analytic ones.
using CellField =
    std::function<std::vector<Complex>(Complex alpha, std::span<const Vec2>)>;

/// u(x) = sum_q w(alpha_q, x) e^{i alpha_q x1} omega_q over the contour
/// quadrature.  One cell solve per node; the weighted sum runs in
/// ascending node order so reruns are bitwise identical.
inline FieldOnSet reconstruct(const CellField& solver, const Contour& contour,
                              int n_nodes, std::span<const Vec2> points,
                              std::string solver_name = "custom",
                              double k_value = 0.0) {
    const auto nodes = contour_quadrature_total(contour, n_nodes);
    FieldOnSet field;
    field.points.assign(points.begin(), points.end());
    field.values.assign(points.size(), Complex(0.0, 0.0));
    field.provenance = {std::move(solver_name), contour.describe(),
                        static_cast<int>(nodes.size()), k_value};
    for (const auto& node : nodes) {
        std::vector<Complex> w;
        try {
            w = solver(node.z, points);
        } catch (const Error& e) {
            throw Error("cell solve failed at alpha = (" +
                        std::to_string(node.z.real()) + ", " +
                        std::to_string(node.z.imag()) + "): " + e.what());
        }
        for (std::size_t p = 0; p < points.size(); ++p)
            field.values[p] += node.w * w[p] *
                               std::exp(kI * node.z * points[p][0]);
    }
    return field;
}

/// ||a - b||_{L2} / ||b||_{L2} by the trapezoid rule along the ordered
/// point set.
inline double relative_error(const FieldOnSet& a, const FieldOnSet& b) {
    if (a.points.size() != b.points.size())
        throw MismatchedPoints("point counts differ");
    const std::size_t n = a.points.size();
    if (n < 2) throw MismatchedPoints("need at least two points");
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(a.points[i][0] - b.points[i][0]) > 1e-12 ||
            std::abs(a.points[i][1] - b.points[i][1]) > 1e-12)
            throw MismatchedPoints("point sets differ");
    auto seg = [&](std::size_t i) {
        return std::hypot(a.points[i + 1][0] - a.points[i][0],
                          a.points[i + 1][1] - a.points[i][1]);
    };
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = seg(i);
        const double d0 = std::norm(a.values[i] - b.values[i]);
        const double d1 = std::norm(a.values[i + 1] - b.values[i + 1]);
        const double r0 = std::norm(b.values[i]);
        const double r1 = std::norm(b.values[i + 1]);
        num += 0.5 * h * (d0 + d1);
        den += 0.5 * h * (r0 + r1);
    }
    return std::sqrt(num) / std::sqrt(den);
}

/// Exact-DtN cell solver over precomputed operator blocks.
inline CellField make_exact_dtn_solver(std::shared_ptr<const CellMesh> mesh,
                                       std::shared_ptr<const OperatorBlocks> blocks,
                                       SourceTerm f, int j_range) {
    return [mesh, blocks, f = std::move(f), j_range](
               Complex alpha, std::span<const Vec2> pts) {
        const SpMat D = assemble_D(*blocks, alpha, j_range);
        const Vector rhs = assemble_rhs(*mesh, f, alpha);
        const CellSolution sol = solve_cell(*mesh, D, rhs, alpha, blocks->k,
                                            j_range, SolverKind::ExactDtn);
        return evaluate_field(sol, pts);
    };
}

/// Truncated-layer DtN cell solver (coth-corrected boundary symbols).
inline CellField make_pml_dtn_solver(std::shared_ptr<const CellMesh> mesh,
                                     std::shared_ptr<const OperatorBlocks> blocks,
                                     SourceTerm f, int j_range,
                                     PmlProfile profile) {
    return [mesh, blocks, f = std::move(f), j_range, profile](
               Complex alpha, std::span<const Vec2> pts) {
        const SpMat D = assemble_D(*blocks, alpha, j_range, profile.sigma);
        const Vector rhs = assemble_rhs(*mesh, f, alpha);
        const CellSolution sol = solve_cell(*mesh, D, rhs, alpha, blocks->k,
                                            j_range, SolverKind::PmlDtn);
        return evaluate_field(sol, pts);
    };
}

/// Stretched-layer cell solver on the extended mesh; evaluation points
/// must lie below the layer.
inline CellField make_pml_layer_solver(std::shared_ptr<const CellMesh> mesh_ext,
                                       Wavenumber k, SourceTerm f,
                                       PmlProfile profile, int j_range) {
    return [mesh_ext, k, f = std::move(f), profile, j_range](
               Complex alpha, std::span<const Vec2> pts) {
        for (const auto& p : pts)
            if (!(p[1] < mesh_ext->trace_x2))
                throw PointOutsideCell(
                    "evaluation points must lie below the absorbing layer");
        const SpMat L = assemble_pml_layer(*mesh_ext, alpha, k, profile);
        const Vector rhs = assemble_rhs(*mesh_ext, f, alpha);
        const CellSolution sol = solve_cell(*mesh_ext, L, rhs, alpha, k,
                                            j_range, SolverKind::PmlLayer);
        return evaluate_field(sol, pts);
    };
}

}  // namespace blochpml
