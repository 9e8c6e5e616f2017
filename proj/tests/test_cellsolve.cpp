#include <catch2/catch.hpp>

#include <cmath>
#include <random>

#include "blochpml/assembly.hpp"
#include "blochpml/cellsolve.hpp"
#include "blochpml/mesh.hpp"
#include "blochpml/surface.hpp"

using namespace blochpml;

namespace {

SourceTerm bump_mode_source(int j, Complex alpha, double y0 = 1.7,
                            double r_in = 0.15, double r_out = 0.35,
                            double sup = 2.05) {
    // physical source e^{i(alpha+j) x1} g(x2): the transformed right side
    // e^{-i alpha x1} f is the pure periodic mode j
    const RadialCutoff cut = make_radial_cutoff(r_in, r_out, 8);
    return band_source(
        [=](double x1, double x2) {
            return cut(std::abs(x2 - y0)) *
                   std::exp(kI * (alpha + static_cast<double>(j)) * x1);
        },
        sup);
}

}  // namespace

TEST_CASE("zero load yields the zero solution", "[cellsolve]") {
    const CellMesh mesh = build_cell_mesh(flat_surface(1.0), 2.5, 0.4);
    const Wavenumber k = decompose_wavenumber(1.2);
    const OperatorBlocks blocks = assemble_blocks(mesh, k);
    const SpMat D = assemble_D(blocks, 0.1, 5);
    const Vector rhs = Vector::Zero(blocks.dofs.n_dofs);
    const CellSolution sol =
        solve_cell(mesh, D, rhs, 0.1, k, 5, SolverKind::ExactDtn);
    CHECK(sol.nodal.norm() == 0.0);
    CHECK(sol.residual == 0.0);
}

TEST_CASE("manufactured solution is recovered to solver accuracy",
          "[cellsolve]") {
    const CellMesh mesh = build_cell_mesh(wavy_surface(), 2.5, 0.25);
    const Wavenumber k = decompose_wavenumber(1.2);
    const OperatorBlocks blocks = assemble_blocks(mesh, k);
    const Complex alpha(0.13, 0.0);
    const SpMat D = assemble_D(blocks, alpha, 8);

    Vector w_star(blocks.dofs.n_dofs);
    for (int d = 0; d < blocks.dofs.n_dofs; ++d) {
        const auto& v = mesh.vertices[blocks.dofs.dof_to_vertex[d]];
        w_star[d] = std::sin(v[1] - mesh.surface(v[0]));
    }
    const Vector rhs = D * w_star;
    const CellSolution sol =
        solve_cell(mesh, D, rhs, alpha, k, 8, SolverKind::ExactDtn);
    Vector got(blocks.dofs.n_dofs);
    for (int d = 0; d < blocks.dofs.n_dofs; ++d)
        got[d] = sol.nodal[blocks.dofs.dof_to_vertex[d]];
    CHECK((got - w_star).norm() <= 1e-10 * w_star.norm());
    CHECK(sol.residual < 1e-10);

    // eliminated surface vertices stay exactly zero
    for (int i = 0; i < mesh.n1; ++i)
        CHECK(sol.nodal[mesh.vid(i, 0)] == Complex(0.0, 0.0));
}

TEST_CASE("flat geometry keeps modal sources modal", "[cellsolve]") {
    const CellMesh mesh = build_cell_mesh(flat_surface(1.0), 2.5, 0.1);
    const Wavenumber k = decompose_wavenumber(1.2);
    const OperatorBlocks blocks = assemble_blocks(mesh, k);
    const Complex alpha(0.1, 0.0);
    const int J = 10;
    const SpMat D = assemble_D(blocks, alpha, J);
    const Vector rhs = assemble_rhs(mesh, bump_mode_source(1, alpha), alpha);
    const CellSolution sol =
        solve_cell(mesh, D, rhs, alpha, k, J, SolverKind::ExactDtn);

    const double main_mode = std::abs(sol.trace_coeffs[1 + J]);
    REQUIRE(main_mode > 0.0);
    for (int j = -J; j <= J; ++j) {
        if (j == 1) continue;
        CHECK(std::abs(sol.trace_coeffs[j + J]) < 1e-10 * main_mode);
    }
}

TEST_CASE("field evaluation reproduces linears and nodal values",
          "[cellsolve]") {
    const CellMesh mesh = build_cell_mesh(wavy_surface(), 2.5, 0.3);
    CellSolution sol;
    sol.mesh = &mesh;
    sol.nodal = Vector(mesh.n_vertices());
    for (int v = 0; v < mesh.n_vertices(); ++v)
        sol.nodal[v] = mesh.vertices[v][0] + mesh.vertices[v][1];

    // vertex hit returns the nodal value (up to locate tolerance);
    // interior points reproduce the linear exactly
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> ux(-kPi, kPi);
    std::uniform_real_distribution<double> ut(0.05, 0.95);
    std::vector<Vec2> pts;
    for (int i = 0; i < 100; ++i) {
        const double x1 = ux(rng);
        const double zb = mesh.surface(x1);
        pts.push_back({x1, zb + ut(rng) * (2.5 - zb)});
    }
    const auto vals = evaluate_field(sol, pts);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double expected =
            (pts[i][0] < mesh.s_col(1) || pts[i][0] > mesh.s_col(mesh.n1 - 1))
                ? 0.0  // seam cells interpolate the unwrapped coordinate
                : pts[i][0] + pts[i][1];
        if (expected != 0.0)
            CHECK(std::abs(vals[i] - Complex(expected, 0.0)) < 1e-12);
    }

    const Vec2 vtx = mesh.vertices[mesh.vid(3, 2)];
    const auto at_vertex = evaluate_field(sol, std::vector<Vec2>{vtx});
    CHECK(std::abs(at_vertex[0] - Complex(vtx[0] + vtx[1], 0.0)) < 1e-12);
}

TEST_CASE("seam values agree at both period ends", "[cellsolve]") {
    const CellMesh mesh = build_cell_mesh(wavy_surface(), 2.5, 0.3);
    const Wavenumber k = decompose_wavenumber(1.2);
    const OperatorBlocks blocks = assemble_blocks(mesh, k);
    const SpMat D = assemble_D(blocks, 0.1, 5);
    const Vector rhs =
        assemble_rhs(mesh, smooth_disk_source({0.0, 1.8}, 0.1, 0.3, 3.0, 8), 0.1);
    const CellSolution sol =
        solve_cell(mesh, D, rhs, 0.1, k, 5, SolverKind::ExactDtn);
    for (double x2 : {1.9, 2.2, 2.45}) {
        const auto v = evaluate_field(
            sol, std::vector<Vec2>{{-kPi, x2}, {kPi, x2}});
        // shared seam dofs: the two ends interpolate the same nodal
        // values, equal up to barycentric rounding
        CHECK(std::abs(v[0] - v[1]) <= 1e-13 * std::max(1.0, std::abs(v[0])));
    }
    // the trace row itself is one shared value per seam vertex
    for (int l = 0; l <= mesh.n_rows; ++l)
        CHECK(mesh.periodic_pairs[l].first == mesh.periodic_pairs[l].second);
}

TEST_CASE("singular systems are reported", "[cellsolve]") {
    const CellMesh mesh = build_cell_mesh(flat_surface(0.0), 1.0, 0.5);
    const DofMap dofs = make_dof_map(mesh);
    const int n = dofs.n_dofs;
    const Wavenumber k = decompose_wavenumber(1.2);
    Vector rhs = Vector::Ones(n);

    SpMat zero(n, n);  // structurally singular
    CHECK_THROWS_AS(solve_cell(mesh, zero, rhs, 0.0, k, 2, SolverKind::ExactDtn),
                    SingularSystem);

    // numerically singular with a full pattern: rank-one matrix
    std::vector<Triplet> trip;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) trip.emplace_back(i, j, Complex(1.0, 0.0));
    SpMat rank1(n, n);
    rank1.setFromTriplets(trip.begin(), trip.end());
    CHECK_THROWS_AS(solve_cell(mesh, rank1, rhs, 0.0, k, 2, SolverKind::ExactDtn),
                    Error);  // SingularSystem or ResidualTooLarge
}

TEST_CASE("opposite Bloch parameters mirror the flat solution",
          "[cellsolve]") {
    // on a flat surface, w(-alpha) for the mode -j source is the exact
    // x1-reflection of w(alpha) for the mode j source (the transverse
    // wavenumbers coincide: k^2-(alpha+j)^2 == k^2-(-alpha-j)^2); the
    // discrete gap comes only from the mirror-asymmetric diagonal split
    const double h = 0.1;
    const CellMesh mesh = build_cell_mesh(flat_surface(1.0), 2.5, h);
    const Wavenumber k = decompose_wavenumber(1.2);
    const OperatorBlocks blocks = assemble_blocks(mesh, k);
    const int J = 8;
    const double alpha = 0.1;
    const int j_mode = 2;

    auto solve_at = [&](double a, int j) {
        const SpMat D = assemble_D(blocks, a, J);
        const Vector rhs = assemble_rhs(mesh, bump_mode_source(j, a), a);
        return solve_cell(mesh, D, rhs, a, k, J, SolverKind::ExactDtn);
    };
    const CellSolution wp = solve_at(alpha, j_mode);
    const CellSolution wm = solve_at(-alpha, -j_mode);

    std::vector<Vec2> pts, pts_neg;
    for (int i = 0; i < 60; ++i) {
        const double x1 = -kPi + 2.0 * kPi * (i + 0.5) / 60.0;
        pts.push_back({x1, 1.9});
        pts_neg.push_back({-x1, 1.9});
    }
    const auto vm = evaluate_field(wm, pts);
    const auto vp = evaluate_field(wp, pts_neg);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        num += std::norm(vm[i] - vp[i]);
        den += std::norm(vm[i]);
    }
    CHECK(std::sqrt(num / den) < 1e-2);

    // trace modes flip accordingly
    for (int j = -J; j <= J; ++j)
        CHECK(std::abs(wm.trace_coeffs[-j + J] - wp.trace_coeffs[j + J]) <
              1e-2 * std::abs(wp.trace_coeffs[j_mode + J]));
}
