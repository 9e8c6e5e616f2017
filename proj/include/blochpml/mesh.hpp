#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <vector>

#include "blochpml/branch.hpp"
#include "blochpml/errors.hpp"
#include "blochpml/surface.hpp"

namespace blochpml {

using Vec2 = std::array<double, 2>;

enum class EdgeTag { Bottom, Top, Left, Right };

inline const char* edge_tag_name(EdgeTag t) {
    switch (t) {
        case EdgeTag::Bottom: return "BOTTOM";
        case EdgeTag::Top: return "TOP";
        case EdgeTag::Left: return "LEFT";
        case EdgeTag::Right: return "RIGHT";
    }
    return "?";
}

/// Boundary-fitted structured triangulation of one periodicity cell.
///
/// The cell is meshed as a cylinder: columns i = 0..n1-1 at
/// s_i = -pi + i*2pi/n1, and the seam column i = 0 serves as both the
/// left boundary (x1 = -pi) and, shifted by 2pi, the right boundary
/// (x1 = +pi).  Periodicity of the trial space is therefore built into
/// the vertex numbering; `periodic_pairs` lists the seam vertices paired
/// with their own right-hand incarnation.
///
/// Vertices sit on a lattice (column i, row l), vid = l*n1 + i.  Rows
/// follow the sheared map (s, t) -> (s, zeta(s) + t (x2_top - zeta(s))).
/// A layer mesh appends flat uniform rows above the trace height.
struct CellMesh {
    int n1 = 0;           ///< columns == cells per row (cylinder)
    int n_rows = 0;       ///< cell rows
    double dx = 0.0;      ///< 2*pi / n1
    double x2_top = 0.0;  ///< top boundary height
    double h_max = 0.0;   ///< target mesh size
    PeriodicSurface surface;

    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<std::array<Vec2, 3>> tri_coords;  ///< unwrapped geometry
    struct TaggedEdge {
        int v0, v1;
        EdgeTag tag;
    };
    std::vector<TaggedEdge> boundary_edges;
    std::vector<std::pair<int, int>> periodic_pairs;

    int trace_row = 0;      ///< row carrying the DtN trace (x2 == trace_x2)
    double trace_x2 = 0.0;  ///< == x2_top for plain meshes, H for layer meshes
    int layer_rows = 0;     ///< rows above trace_row (0 for plain meshes)

    int vid(int i, int l) const { return l * n1 + i; }
    double s_col(int i) const { return -kPi + dx * static_cast<double>(i); }
    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_triangles() const { return static_cast<int>(triangles.size()); }
    bool is_layer_mesh() const { return layer_rows > 0; }

    double triangle_area(int t) const {
        const auto& c = tri_coords[t];
        return 0.5 * ((c[1][0] - c[0][0]) * (c[2][1] - c[0][1]) -
                      (c[2][0] - c[0][0]) * (c[1][1] - c[0][1]));
    }

    /// Vertex ids of one lattice row, ordered by column.
    std::vector<int> row_vertices(int l) const {
        std::vector<int> v(n1);
        for (int i = 0; i < n1; ++i) v[i] = vid(i, l);
        return v;
    }

    /// Triangle containing (x1, x2) plus its barycentric coordinates.
    /// Column lookup is O(1) through the lattice; the row comes from
    /// inverting the shear map, with a small guarded search to absorb
    /// roundoff at cell borders.
    struct Location {
        int tri;
        std::array<double, 3> bary;
    };
    Location locate(double x1, double x2) const;

    void dump(std::ostream& os) const;
};

namespace detail {

inline bool bary_in_triangle(const std::array<Vec2, 3>& c, double x, double y,
                             std::array<double, 3>& b, double tol) {
    const double d = (c[1][0] - c[0][0]) * (c[2][1] - c[0][1]) -
                     (c[2][0] - c[0][0]) * (c[1][1] - c[0][1]);
    b[1] = ((x - c[0][0]) * (c[2][1] - c[0][1]) -
            (c[2][0] - c[0][0]) * (y - c[0][1])) / d;
    b[2] = ((c[1][0] - c[0][0]) * (y - c[0][1]) -
            (x - c[0][0]) * (c[1][1] - c[0][1])) / d;
    b[0] = 1.0 - b[1] - b[2];
    return b[0] >= -tol && b[1] >= -tol && b[2] >= -tol;
}

}  // namespace detail

/// Structured mesh of the cell below `x2_top`.
inline CellMesh build_cell_mesh(const PeriodicSurface& surface, double x2_top,
                                double h_max) {
    if (!(h_max > 0.0)) throw GeometryError("h_max must be positive");
    if (!(x2_top > surface.sup_zeta))
        throw GeometryError("x2_top must exceed sup zeta");

    CellMesh m;
    m.surface = surface;
    m.x2_top = x2_top;
    m.h_max = h_max;
    m.n1 = static_cast<int>(std::ceil(2.0 * kPi / h_max));
    m.dx = 2.0 * kPi / m.n1;
    const int n2 = static_cast<int>(std::ceil((x2_top - surface.inf_zeta) / h_max));
    m.n_rows = n2;
    m.trace_row = n2;
    m.trace_x2 = x2_top;
    m.layer_rows = 0;

    m.vertices.resize(static_cast<std::size_t>(m.n1) * (n2 + 1));
    for (int i = 0; i < m.n1; ++i) {
        const double s = m.s_col(i);
        const double zb = surface(s);
        for (int l = 0; l <= n2; ++l) {
            double y;
            if (l == 0)
                y = zb;
            else if (l == n2)
                y = x2_top;
            else
                y = zb + (static_cast<double>(l) / n2) * (x2_top - zb);
            m.vertices[m.vid(i, l)] = {s, y};
        }
    }

    auto add_cells = [&](int l0, int l1) {
        for (int l = l0; l < l1; ++l) {
            for (int i = 0; i < m.n1; ++i) {
                const int i2 = (i + 1) % m.n1;
                const double sr = m.s_col(i) + m.dx;  // == s_col(i+1), unwrapped
                const int v00 = m.vid(i, l), v10 = m.vid(i2, l);
                const int v11 = m.vid(i2, l + 1), v01 = m.vid(i, l + 1);
                const Vec2 c00 = m.vertices[v00];
                const Vec2 c10 = {sr, m.vertices[v10][1]};
                const Vec2 c11 = {sr, m.vertices[v11][1]};
                const Vec2 c01 = m.vertices[v01];
                m.triangles.push_back({v00, v10, v11});
                m.tri_coords.push_back({c00, c10, c11});
                m.triangles.push_back({v00, v11, v01});
                m.tri_coords.push_back({c00, c11, c01});
            }
        }
    };
    add_cells(0, n2);

    for (int t = 0; t < m.n_triangles(); ++t)
        if (!(m.triangle_area(t) > 1e-14 * h_max * h_max))
            throw GeometryError("degenerate triangle in structured mesh");

    for (int i = 0; i < m.n1; ++i) {
        const int i2 = (i + 1) % m.n1;
        m.boundary_edges.push_back({m.vid(i, 0), m.vid(i2, 0), EdgeTag::Bottom});
        m.boundary_edges.push_back({m.vid(i, n2), m.vid(i2, n2), EdgeTag::Top});
    }
    for (int l = 0; l <= n2; ++l)
        m.periodic_pairs.emplace_back(m.vid(0, l), m.vid(0, l));
    return m;
}

/// Extended mesh for the absorbing layer: below H it reproduces the rows
/// of build_cell_mesh(surface, H, h_max) exactly, above H it adds flat
/// uniform rows up to H + lambda.  The shared lower rows make the
/// restriction to the physical cell an exact sub-mesh.
inline CellMesh build_layer_mesh(const PeriodicSurface& surface, double H,
                                 double lambda, double h_max) {
    if (!(lambda > 0.0)) throw GeometryError("layer thickness must be positive");
    CellMesh lower = build_cell_mesh(surface, H, h_max);
    const int n2 = lower.n_rows;
    const int nl = static_cast<int>(std::ceil(lambda / h_max));

    CellMesh m = lower;
    m.x2_top = H + lambda;
    m.n_rows = n2 + nl;
    m.trace_row = n2;
    m.trace_x2 = H;
    m.layer_rows = nl;

    m.vertices.resize(static_cast<std::size_t>(m.n1) * (m.n_rows + 1));
    for (int l = n2 + 1; l <= m.n_rows; ++l) {
        const double y = (l == m.n_rows)
                             ? H + lambda
                             : H + lambda * static_cast<double>(l - n2) / nl;
        for (int i = 0; i < m.n1; ++i) m.vertices[m.vid(i, l)] = {m.s_col(i), y};
    }
    for (int l = n2; l < m.n_rows; ++l) {
        for (int i = 0; i < m.n1; ++i) {
            const int i2 = (i + 1) % m.n1;
            const double sr = m.s_col(i) + m.dx;
            const int v00 = m.vid(i, l), v10 = m.vid(i2, l);
            const int v11 = m.vid(i2, l + 1), v01 = m.vid(i, l + 1);
            const Vec2 c00 = m.vertices[v00];
            const Vec2 c10 = {sr, m.vertices[v10][1]};
            const Vec2 c11 = {sr, m.vertices[v11][1]};
            const Vec2 c01 = m.vertices[v01];
            m.triangles.push_back({v00, v10, v11});
            m.tri_coords.push_back({c00, c10, c11});
            m.triangles.push_back({v00, v11, v01});
            m.tri_coords.push_back({c00, c11, c01});
        }
    }

    m.boundary_edges.clear();
    for (int i = 0; i < m.n1; ++i) {
        const int i2 = (i + 1) % m.n1;
        m.boundary_edges.push_back({m.vid(i, 0), m.vid(i2, 0), EdgeTag::Bottom});
        m.boundary_edges.push_back(
            {m.vid(i, m.n_rows), m.vid(i2, m.n_rows), EdgeTag::Top});
    }
    m.periodic_pairs.clear();
    for (int l = 0; l <= m.n_rows; ++l)
        m.periodic_pairs.emplace_back(m.vid(0, l), m.vid(0, l));
    return m;
}

inline CellMesh::Location CellMesh::locate(double x1, double x2) const {
    const double eps = 1e-9;
    if (x1 < -kPi - eps || x1 > kPi + eps)
        throw PointOutsideCell("x1 outside [-pi, pi]");
    int i = static_cast<int>(std::floor((x1 + kPi) / dx));
    i = std::max(0, std::min(n1 - 1, i));
    const double xi = (x1 - s_col(i)) / dx;
    const double zl = vertices[vid(i, 0)][1];
    const double zr = vertices[vid((i + 1) % n1, 0)][1];
    const double zbar = (1.0 - xi) * zl + xi * zr;  // interpolated bottom
    if (x2 < zbar - eps || x2 > x2_top + eps)
        throw PointOutsideCell("x2 outside the meshed cell");

    const int n2 = trace_row;
    int l;
    if (!is_layer_mesh() || x2 <= trace_x2) {
        const double t = (x2 - zbar) / (trace_x2 - zbar);
        l = static_cast<int>(std::floor(t * n2));
        l = std::max(0, std::min(n2 - 1, l));
    } else {
        const double t = (x2 - trace_x2) / (x2_top - trace_x2);
        l = n2 + static_cast<int>(std::floor(t * layer_rows));
        l = std::max(n2, std::min(n_rows - 1, l));
    }
    for (int dl : {0, -1, 1, -2, 2}) {
        const int ll = l + dl;
        if (ll < 0 || ll >= n_rows) continue;
        const int base = 2 * (ll * n1 + i);
        for (int k = 0; k < 2; ++k) {
            std::array<double, 3> b;
            if (detail::bary_in_triangle(tri_coords[base + k], x1, x2, b, 1e-10))
                return {base + k, b};
        }
    }
    throw PointOutsideCell("point location failed");
}

inline void CellMesh::dump(std::ostream& os) const {
    char buf[128];
    for (const auto& v : vertices) {
        std::snprintf(buf, sizeof buf, "v %.17g %.17g\n", v[0], v[1]);
        os << buf;
    }
    for (const auto& t : triangles) {
        std::snprintf(buf, sizeof buf, "t %d %d %d\n", t[0], t[1], t[2]);
        os << buf;
    }
    for (const auto& e : boundary_edges) {
        std::snprintf(buf, sizeof buf, "e %d %d %s\n", e.v0, e.v1,
                      edge_tag_name(e.tag));
        os << buf;
    }
}

/// j-th Fourier coefficients of a trace sampled on the uniform top grid,
/// w_hat(j) = (1/2pi) integral w e^{-i j x1} dx1 by the periodic
/// trapezoid rule (spectrally accurate).  `values` is ordered by column.
inline std::vector<Complex> trace_fourier_coeffs(const CellMesh& mesh,
                                                 std::span<const Complex> values,
                                                 int j_range) {
    const int n = mesh.n1;
    if (static_cast<int>(values.size()) != n)
        throw Error("trace_fourier_coeffs: expected one value per column");
    if (2 * j_range >= n)
        throw InsufficientResolution("trace modes would alias: 2*j_range >= n1");
    std::vector<Complex> coeffs(2 * j_range + 1);
    for (int j = -j_range; j <= j_range; ++j) {
        Complex acc = 0.0;
        for (int i = 0; i < n; ++i)
            acc += values[i] * std::polar(1.0, -j * mesh.s_col(i));
        coeffs[j + j_range] = acc / static_cast<double>(n);
    }
    return coeffs;
}

}  // namespace blochpml
