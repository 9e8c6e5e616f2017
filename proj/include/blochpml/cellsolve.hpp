#pragma once

#include <Eigen/SparseLU>

#include <span>
#include <string>
#include <vector>

#include "blochpml/assembly.hpp"
#include "blochpml/branch.hpp"
#include "blochpml/errors.hpp"
#include "blochpml/mesh.hpp"

namespace blochpml {

enum class SolverKind { ExactDtn, PmlDtn, PmlLayer };

inline const char* solver_kind_name(SolverKind k) {
    switch (k) {
        case SolverKind::ExactDtn: return "exact-dtn";
        case SolverKind::PmlDtn: return "pml-dtn";
        case SolverKind::PmlLayer: return "pml-layer";
    }
    return "?";
}

/// Discrete cell solution at one Bloch parameter: nodal values on all
/// vertices (eliminated rows exactly zero), trace-mode coefficients on
/// the DtN row and the algebraic residual of the solve.
struct CellSolution {
    Complex alpha{0.0, 0.0};
    Vector nodal;  ///< per vertex
    const CellMesh* mesh = nullptr;
    std::vector<Complex> trace_coeffs;
    int j_range = 0;
    double residual = 0.0;
    Wavenumber k;
    SolverKind kind = SolverKind::ExactDtn;
};

inline constexpr double kResidualTol = 1e-10;

/// Direct sparse factorization and solve of one per-alpha system.
/// Residuals above 1e-10 relative are an error, not a warning.
inline CellSolution solve_cell(const CellMesh& mesh, const SpMat& A,
                               const Vector& rhs, Complex alpha,
                               const Wavenumber& k, int j_range,
                               SolverKind kind) {
    CellSolution sol;
    sol.alpha = alpha;
    sol.mesh = &mesh;
    sol.k = k;
    sol.kind = kind;
    sol.j_range = j_range;

    const DofMap dofs = make_dof_map(mesh);
    if (A.rows() != dofs.n_dofs || rhs.size() != dofs.n_dofs)
        throw Error("solve_cell: system size does not match the mesh dof map");

    Vector x;
    const double rhs_norm = rhs.norm();
    if (rhs_norm == 0.0) {
        x = Vector::Zero(dofs.n_dofs);
        sol.residual = 0.0;
    } else {
        // structurally empty columns make the factorization loop in some
        // Eigen versions; reject them up front
        for (int c = 0; c < A.outerSize(); ++c) {
            SpMat::InnerIterator it(A, c);
            if (!it) throw SingularSystem("structurally empty column " +
                                          std::to_string(c));
        }
        Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
        lu.analyzePattern(A);
        lu.factorize(A);
        if (lu.info() != Eigen::Success)
            throw SingularSystem("sparse factorization failed (alpha near a "
                                 "resonance of the discrete system?)");
        x = lu.solve(rhs);
        sol.residual = (A * x - rhs).norm() / rhs_norm;
        if (!(sol.residual < kResidualTol))
            throw ResidualTooLarge("relative residual " +
                                   std::to_string(sol.residual));
    }

    sol.nodal = Vector::Zero(mesh.n_vertices());
    for (int d = 0; d < dofs.n_dofs; ++d) sol.nodal[dofs.dof_to_vertex[d]] = x[d];

    std::vector<Complex> trace(mesh.n1);
    for (int i = 0; i < mesh.n1; ++i)
        trace[i] = sol.nodal[mesh.vid(i, mesh.trace_row)];
    if (2 * j_range < mesh.n1)
        sol.trace_coeffs = trace_fourier_coeffs(mesh, trace, j_range);
    return sol;
}

/// Barycentric P1 interpolation at the given points.
inline std::vector<Complex> evaluate_field(const CellSolution& sol,
                                           std::span<const Vec2> points) {
    const CellMesh& mesh = *sol.mesh;
    std::vector<Complex> out(points.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
        const auto loc = mesh.locate(points[p][0], points[p][1]);
        const auto& tv = mesh.triangles[loc.tri];
        out[p] = loc.bary[0] * sol.nodal[tv[0]] + loc.bary[1] * sol.nodal[tv[1]] +
                 loc.bary[2] * sol.nodal[tv[2]];
    }
    return out;
}

}  // namespace blochpml
