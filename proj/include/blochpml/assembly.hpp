#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <array>
#include <atomic>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "blochpml/branch.hpp"
#include "blochpml/errors.hpp"
#include "blochpml/mesh.hpp"
#include "blochpml/source.hpp"

namespace blochpml {

using SpMat = Eigen::SparseMatrix<Complex>;
using Vector = Eigen::VectorXcd;
using Triplet = Eigen::Triplet<Complex>;

namespace detail {

/// P1 element matrices on an affine triangle: stiffness, mass and the
/// d/dx1 coupling D_ij = integral (d1 lambda_j) lambda_i, all exact.
struct ElementMatrices {
    std::array<std::array<double, 3>, 3> stiffness;
    std::array<std::array<double, 3>, 3> mass;
    std::array<std::array<double, 3>, 3> dx1;
    std::array<double, 2> grad[3];
    double area;
};

inline ElementMatrices p1_element_matrices(const std::array<Vec2, 3>& c) {
    ElementMatrices e{};
    const double x0 = c[0][0], y0 = c[0][1];
    const double x1 = c[1][0], y1 = c[1][1];
    const double x2 = c[2][0], y2 = c[2][1];
    const double det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
    e.area = 0.5 * det;
    e.grad[0] = {(y1 - y2) / det, (x2 - x1) / det};
    e.grad[1] = {(y2 - y0) / det, (x0 - x2) / det};
    e.grad[2] = {(y0 - y1) / det, (x1 - x0) / det};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            e.stiffness[i][j] = e.area * (e.grad[i][0] * e.grad[j][0] +
                                          e.grad[i][1] * e.grad[j][1]);
            e.mass[i][j] = e.area / 12.0 * (i == j ? 2.0 : 1.0);
            e.dx1[i][j] = e.area / 3.0 * e.grad[j][0];
        }
    return e;
}

inline std::atomic<long>& block_assembly_counter() {
    static std::atomic<long> counter{0};
    return counter;
}

}  // namespace detail

/// Number of times assemble_blocks has run (per-alpha system assembly
/// must reuse blocks instead of re-running it).
inline long block_assembly_count() {
    return detail::block_assembly_counter().load();
}

/// Vertex -> degree-of-freedom numbering.  Bottom-row vertices (the
/// Dirichlet surface) are always eliminated; layer meshes also eliminate
/// the top row.
struct DofMap {
    std::vector<int> vertex_to_dof;
    std::vector<int> dof_to_vertex;
    int n_dofs = 0;
};

inline DofMap make_dof_map(const CellMesh& mesh, bool include_dirichlet = false) {
    DofMap d;
    d.vertex_to_dof.assign(mesh.n_vertices(), -1);
    auto is_dirichlet = [&](int v) {
        const int row = v / mesh.n1;
        if (row == 0) return true;
        if (mesh.is_layer_mesh() && row == mesh.n_rows) return true;
        return false;
    };
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        if (!include_dirichlet && is_dirichlet(v)) continue;
        d.vertex_to_dof[v] = d.n_dofs++;
        d.dof_to_vertex.push_back(v);
    }
    return d;
}

/// Alpha-independent operator blocks of the quasi-periodic cell problem:
///   <A1 u,v> = int (grad u . grad v^bar - k^2 n u v^bar)
///   <A2 u,v> = -2i int (d1 u) v^bar
///   <A3 u,v> = int u v^bar
///   <B_j u,v> = -2pi i u_hat(j) v_hat(j)^bar   (rank one, trace modes)
/// assembled on the dof space (Dirichlet rows eliminated, left/right
/// identified through the cylinder mesh).
struct OperatorBlocks {
    SpMat A1, A2, A3;
    DofMap dofs;
    Wavenumber k;
    int n1 = 0;                    ///< trace grid size
    std::vector<int> trace_dofs;   ///< dof per trace column, ordered
    std::vector<double> trace_x1;  ///< column abscissae

    /// Discrete trace-mode functional g_j: psi_hat(j) = g_j^T psi.
    Vector trace_functional(int j) const {
        Vector g = Vector::Zero(dofs.n_dofs);
        for (int i = 0; i < n1; ++i)
            g[trace_dofs[i]] = std::polar(1.0 / n1, -j * trace_x1[i]);
        return g;
    }

    /// Rank-one boundary operator B_j = -2pi i conj(g_j) g_j^T,
    /// materialized for tests; assemble_D uses the circulant fast path.
    SpMat B_matrix(int j) const {
        const Vector g = trace_functional(j);
        std::vector<Triplet> trip;
        trip.reserve(n1 * n1);
        const Complex c = -2.0 * kPi * kI;
        for (int p = 0; p < n1; ++p)
            for (int q = 0; q < n1; ++q)
                trip.emplace_back(trace_dofs[p], trace_dofs[q],
                                  c * std::conj(g[trace_dofs[p]]) *
                                      g[trace_dofs[q]]);
        SpMat b(dofs.n_dofs, dofs.n_dofs);
        b.setFromTriplets(trip.begin(), trip.end());
        return b;
    }
};

/// One-time P1 assembly of A1, A2, A3 with exact element integrals.
/// `n_index` is the refractive index in the k^2 n mass term (default 1).
inline OperatorBlocks assemble_blocks(
    const CellMesh& mesh, const Wavenumber& k,
    std::function<double(double, double)> n_index = {},
    bool include_dirichlet = false) {
    detail::block_assembly_counter().fetch_add(1);
    OperatorBlocks blocks;
    blocks.k = k;
    blocks.dofs = make_dof_map(mesh, include_dirichlet);
    blocks.n1 = mesh.n1;
    const int n = blocks.dofs.n_dofs;

    std::vector<Triplet> t1, t2, t3;
    t1.reserve(mesh.n_triangles() * 9);
    t2.reserve(mesh.n_triangles() * 9);
    t3.reserve(mesh.n_triangles() * 9);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto e = detail::p1_element_matrices(mesh.tri_coords[t]);
        const auto& tv = mesh.triangles[t];
        double nc = 1.0;
        if (n_index) {
            const auto& c = mesh.tri_coords[t];
            nc = n_index((c[0][0] + c[1][0] + c[2][0]) / 3.0,
                         (c[0][1] + c[1][1] + c[2][1]) / 3.0);
        }
        for (int i = 0; i < 3; ++i) {
            const int di = blocks.dofs.vertex_to_dof[tv[i]];
            if (di < 0) continue;
            for (int j = 0; j < 3; ++j) {
                const int dj = blocks.dofs.vertex_to_dof[tv[j]];
                if (dj < 0) continue;
                t1.emplace_back(di, dj,
                                Complex(e.stiffness[i][j] -
                                        k.k * k.k * nc * e.mass[i][j]));
                t2.emplace_back(di, dj, -2.0 * kI * e.dx1[i][j]);
                t3.emplace_back(di, dj, Complex(e.mass[i][j]));
            }
        }
    }
    blocks.A1.resize(n, n);
    blocks.A2.resize(n, n);
    blocks.A3.resize(n, n);
    blocks.A1.setFromTriplets(t1.begin(), t1.end());
    blocks.A2.setFromTriplets(t2.begin(), t2.end());
    blocks.A3.setFromTriplets(t3.begin(), t3.end());

    blocks.trace_dofs.resize(mesh.n1);
    blocks.trace_x1.resize(mesh.n1);
    for (int i = 0; i < mesh.n1; ++i) {
        const int v = mesh.vid(i, mesh.trace_row);
        blocks.trace_dofs[i] = blocks.dofs.vertex_to_dof[v];
        blocks.trace_x1[i] = mesh.s_col(i);
        if (blocks.trace_dofs[i] < 0)
            throw Error("trace row vertex is not a dof");
    }
    return blocks;
}

/// Per-alpha system D(alpha) = A1 + alpha A2 + alpha^2 A3 + sum c_j B_j
/// with c_j = beta_j(alpha) for the exact DtN, or beta_j * coth_factor
/// when a layer parameter sigma is given.  The rank-one sum collapses to
/// a circulant block over the trace columns, so assembly costs one
/// sparse rebuild plus O(n1 * j_range).
inline SpMat assemble_D(const OperatorBlocks& blocks, Complex alpha, int j_range,
                        std::optional<Complex> sigma = std::nullopt) {
    if (2 * j_range >= blocks.n1)
        throw InsufficientResolution("j_range too large for the trace grid");
    const int n = blocks.dofs.n_dofs;
    const Complex a2 = alpha * alpha;

    std::vector<Triplet> trip;
    trip.reserve(blocks.A1.nonZeros() + blocks.A2.nonZeros() +
                 blocks.A3.nonZeros() + blocks.n1 * blocks.n1);
    for (int c = 0; c < blocks.A1.outerSize(); ++c)
        for (SpMat::InnerIterator it(blocks.A1, c); it; ++it)
            trip.emplace_back(it.row(), it.col(), it.value());
    for (int c = 0; c < blocks.A2.outerSize(); ++c)
        for (SpMat::InnerIterator it(blocks.A2, c); it; ++it)
            trip.emplace_back(it.row(), it.col(), alpha * it.value());
    for (int c = 0; c < blocks.A3.outerSize(); ++c)
        for (SpMat::InnerIterator it(blocks.A3, c); it; ++it)
            trip.emplace_back(it.row(), it.col(), a2 * it.value());

    // T[m] = sum_j c_j e^{i j dx m}; block entry (p,q) depends on p-q mod n1.
    const int n1 = blocks.n1;
    const double dxs = 2.0 * kPi / n1;
    std::vector<Complex> T(n1, Complex(0.0, 0.0));
    for (int j = -j_range; j <= j_range; ++j) {
        Complex cj = beta(alpha, j, blocks.k);
        if (sigma) cj *= coth_factor(alpha, j, blocks.k, *sigma);
        for (int mix = 0; mix < n1; ++mix)
            T[mix] += cj * std::polar(1.0, j * dxs * mix);
    }
    const Complex scale = -2.0 * kPi * kI / (static_cast<double>(n1) * n1);
    for (int p = 0; p < n1; ++p)
        for (int q = 0; q < n1; ++q)
            trip.emplace_back(blocks.trace_dofs[p], blocks.trace_dofs[q],
                              scale * T[(p - q + n1) % n1]);

    SpMat D(n, n);
    D.setFromTriplets(trip.begin(), trip.end());
    return D;
}

/// Load vector F_i = -int e^{-i alpha x1} f(x) lambda_i dx over the dof
/// space, by the 3-point mid-edge rule (exact for quadratics).  Throws
/// SupportViolation if f is sampled nonzero within one mesh width of the
/// truncation height.
inline Vector assemble_rhs(const CellMesh& mesh, const SourceTerm& f,
                           Complex alpha) {
    const DofMap dofs = make_dof_map(mesh);
    Vector rhs = Vector::Zero(dofs.n_dofs);
    const double margin = mesh.trace_x2 - mesh.h_max;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& c = mesh.tri_coords[t];
        const auto& tv = mesh.triangles[t];
        const double area = mesh.triangle_area(t);
        // mid-edge points m01, m12, m02; lambda_i is 1/2 on the two
        // edges containing vertex i and 0 on the opposite one.
        const Vec2 mid[3] = {{0.5 * (c[0][0] + c[1][0]), 0.5 * (c[0][1] + c[1][1])},
                             {0.5 * (c[1][0] + c[2][0]), 0.5 * (c[1][1] + c[2][1])},
                             {0.5 * (c[0][0] + c[2][0]), 0.5 * (c[0][1] + c[2][1])}};
        Complex fv[3];
        bool any = false;
        for (int q = 0; q < 3; ++q) {
            fv[q] = f(mid[q][0], mid[q][1]);
            if (fv[q] != Complex(0.0, 0.0)) {
                any = true;
                if (mid[q][1] > margin)
                    throw SupportViolation(
                        "source sampled nonzero within one mesh width of the "
                        "truncation height");
            }
        }
        if (!any) continue;
        for (int q = 0; q < 3; ++q)
            fv[q] *= std::exp(-kI * alpha * mid[q][0]);
        const Complex contrib[3] = {0.5 * (fv[0] + fv[2]),   // vertex 0: m01, m02
                                    0.5 * (fv[0] + fv[1]),   // vertex 1: m01, m12
                                    0.5 * (fv[1] + fv[2])};  // vertex 2: m12, m02
        for (int i = 0; i < 3; ++i) {
            const int di = dofs.vertex_to_dof[tv[i]];
            if (di < 0) continue;
            rhs[di] -= area / 3.0 * contrib[i];
        }
    }
    return rhs;
}

/// Weak form of the vertically stretched operator on the extended cell:
///   int [ s d1u d1v^bar + (1/s) d2u d2v^bar - 2 i alpha s (d1u) v^bar
///         - (k^2 - alpha^2) s u v^bar ]
/// with s evaluated at triangle centroids and Dirichlet rows eliminated
/// on both the surface and the layer top.
inline SpMat assemble_pml_layer(const CellMesh& mesh_ext, Complex alpha,
                                const Wavenumber& k, const PmlProfile& profile) {
    if (!mesh_ext.is_layer_mesh())
        throw Error("assemble_pml_layer expects a layer mesh");
    const DofMap dofs = make_dof_map(mesh_ext);
    const double H = mesh_ext.trace_x2;
    const Complex kk = Complex(k.k * k.k, 0.0) - alpha * alpha;

    std::vector<Triplet> trip;
    trip.reserve(mesh_ext.n_triangles() * 9);
    for (int t = 0; t < mesh_ext.n_triangles(); ++t) {
        const auto& c = mesh_ext.tri_coords[t];
        const auto e = detail::p1_element_matrices(c);
        const auto& tv = mesh_ext.triangles[t];
        const double yc = (c[0][1] + c[1][1] + c[2][1]) / 3.0;
        const Complex s = profile.s(yc, H);
        const Complex inv_s = 1.0 / s;
        for (int i = 0; i < 3; ++i) {
            const int di = dofs.vertex_to_dof[tv[i]];
            if (di < 0) continue;
            for (int j = 0; j < 3; ++j) {
                const int dj = dofs.vertex_to_dof[tv[j]];
                if (dj < 0) continue;
                const Complex grad = e.area * (s * e.grad[j][0] * e.grad[i][0] +
                                               inv_s * e.grad[j][1] * e.grad[i][1]);
                const Complex conv = -2.0 * kI * alpha * s * e.dx1[i][j];
                const Complex mass = -kk * s * e.mass[i][j];
                trip.emplace_back(di, dj, grad + conv + mass);
            }
        }
    }
    SpMat L(dofs.n_dofs, dofs.n_dofs);
    L.setFromTriplets(trip.begin(), trip.end());
    return L;
}

}  // namespace blochpml
