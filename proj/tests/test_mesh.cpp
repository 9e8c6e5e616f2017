#include <catch2/catch.hpp>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "blochpml/mesh.hpp"
#include "blochpml/surface.hpp"

using namespace blochpml;

TEST_CASE("wavy surface extremes and periodicity", "[mesh]") {
    const PeriodicSurface s = wavy_surface();
    // stationary values: 1.5 - 11/36 (min, at sin x = -1/3) and
    // 1.5 + 7/12 (max, at x = pi/2)
    CHECK(s.inf_zeta == Approx(1.5 - 11.0 / 36.0).margin(1e-7));
    CHECK(s.sup_zeta == Approx(1.5 + 7.0 / 12.0).margin(1e-7));
    CHECK(s(1.3 + 2.0 * kPi) == Approx(s(1.3)).margin(1e-12));
}

TEST_CASE("structured flat mesh has the predicted counts", "[mesh]") {
    const CellMesh m = build_cell_mesh(flat_surface(0.0), 1.0, 0.5);
    CHECK(m.n1 == 13);           // ceil(2 pi / 0.5)
    CHECK(m.n_rows == 2);        // ceil(1 / 0.5)
    CHECK(m.n_vertices() == 13 * 3);
    CHECK(m.n_triangles() == 2 * 13 * 2);

    for (int i = 0; i < m.n1; ++i) {
        CHECK(m.vertices[m.vid(i, 0)][1] == 0.0);
        CHECK(m.vertices[m.vid(i, m.n_rows)][1] == 1.0);  // top exact
    }
    for (int t = 0; t < m.n_triangles(); ++t) CHECK(m.triangle_area(t) > 0.0);
}

TEST_CASE("mesh rejects bad inputs", "[mesh]") {
    CHECK_THROWS_AS(build_cell_mesh(flat_surface(1.0), 0.5, 0.1), GeometryError);
    CHECK_THROWS_AS(build_cell_mesh(flat_surface(0.0), 1.0, -0.1), GeometryError);
}

TEST_CASE("triangle areas sum to the cell area", "[mesh]") {
    // for trigonometric-polynomial profiles the periodic trapezoid sum
    // of zeta is exact, so the identity holds to rounding at any h
    const CellMesh m = build_cell_mesh(wavy_surface(), 2.5, 0.2);
    double sum = 0.0;
    for (int t = 0; t < m.n_triangles(); ++t) sum += m.triangle_area(t);
    CHECK(sum == Approx(2.0 * kPi * (2.5 - 1.5)).margin(1e-8));

    const CellMesh f = build_cell_mesh(flat_surface(0.0), 1.0, 0.5);
    double fsum = 0.0;
    for (int t = 0; t < f.n_triangles(); ++t) fsum += f.triangle_area(t);
    CHECK(fsum == Approx(2.0 * kPi).margin(1e-10));

    // bottom row follows the surface
    for (int i = 0; i < m.n1; ++i)
        CHECK(m.vertices[m.vid(i, 0)][1] ==
              Approx(m.surface(m.s_col(i))).margin(1e-10));
}

TEST_CASE("seam pairing is a bijection onto shared vertices", "[mesh]") {
    const CellMesh m = build_cell_mesh(wavy_surface(), 2.5, 0.3);
    CHECK(static_cast<int>(m.periodic_pairs.size()) == m.n_rows + 1);
    for (const auto& [l, r] : m.periodic_pairs) {
        CHECK(l == r);  // the seam column serves both boundaries
        CHECK(l % m.n1 == 0);
    }
}

TEST_CASE("tagged edges cover exactly the topological boundary", "[mesh]") {
    const CellMesh m = build_cell_mesh(wavy_surface(), 2.5, 0.4);
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& t : m.triangles) {
        for (int e = 0; e < 3; ++e) {
            int a = t[e], b = t[(e + 1) % 3];
            if (a > b) std::swap(a, b);
            ++edge_count[{a, b}];
        }
    }
    std::map<std::pair<int, int>, int> boundary;
    for (const auto& [edge, cnt] : edge_count)
        if (cnt == 1) boundary[edge] = 1;
    CHECK(boundary.size() == m.boundary_edges.size());
    for (const auto& e : m.boundary_edges) {
        int a = e.v0, b = e.v1;
        if (a > b) std::swap(a, b);
        CHECK(boundary.count({a, b}) == 1);
    }
}

TEST_CASE("point location matches a brute-force triangle search", "[mesh]") {
    const CellMesh m = build_cell_mesh(wavy_surface(), 2.5, 0.21);
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> ux(-kPi, kPi);
    std::uniform_real_distribution<double> ut(0.05, 0.95);
    for (int trial = 0; trial < 200; ++trial) {
        const double x1 = ux(rng);
        const double zb = m.surface(x1);
        const double x2 = zb + ut(rng) * (2.5 - zb);
        const auto loc = m.locate(x1, x2);

        bool found = false;
        for (int t = 0; t < m.n_triangles() && !found; ++t) {
            std::array<double, 3> b;
            if (detail::bary_in_triangle(m.tri_coords[t], x1, x2, b, 1e-10)) {
                found = true;
                // interpolating the linear function x1 + x2 must agree
                // whichever containing triangle was selected
                auto interp = [&](int tri, const std::array<double, 3>& bb) {
                    double acc = 0.0;
                    for (int v = 0; v < 3; ++v)
                        acc += bb[v] * (m.tri_coords[tri][v][0] +
                                        m.tri_coords[tri][v][1]);
                    return acc;
                };
                CHECK(interp(loc.tri, loc.bary) == Approx(interp(t, b)).margin(1e-9));
            }
        }
        CHECK(found);
        CHECK(loc.bary[0] == Approx(loc.bary[0]));  // finite
    }
    CHECK_THROWS_AS(m.locate(0.0, 0.1), PointOutsideCell);   // below surface
    CHECK_THROWS_AS(m.locate(0.0, 3.0), PointOutsideCell);   // above top
    CHECK_THROWS_AS(m.locate(4.0, 2.0), PointOutsideCell);   // outside period
}

TEST_CASE("halving h at least quadruples the triangle count", "[mesh]") {
    const CellMesh a = build_cell_mesh(flat_surface(1.0), 2.5, 0.1);
    const CellMesh b = build_cell_mesh(flat_surface(1.0), 2.5, 0.05);
    CHECK(b.n_triangles() >= 4 * a.n_triangles());
    // ceil() row counts give wavy profiles a little slack below exactly 4x
    const CellMesh c = build_cell_mesh(wavy_surface(), 2.5, 0.1);
    const CellMesh d = build_cell_mesh(wavy_surface(), 2.5, 0.05);
    CHECK(d.n_triangles() >= 3.8 * c.n_triangles());
}

TEST_CASE("layer mesh extends the plain mesh with flat rows", "[mesh]") {
    const double H = 2.5, lambda = 1.5, h = 0.3;
    const CellMesh plain = build_cell_mesh(wavy_surface(), H, h);
    const CellMesh ext = build_layer_mesh(wavy_surface(), H, lambda, h);
    CHECK(ext.is_layer_mesh());
    CHECK(ext.trace_row == plain.n_rows);
    CHECK(ext.trace_x2 == H);
    CHECK(ext.x2_top == H + lambda);
    CHECK(ext.layer_rows == static_cast<int>(std::ceil(lambda / h)));
    REQUIRE(ext.n1 == plain.n1);
    for (int l = 0; l <= plain.n_rows; ++l)
        for (int i = 0; i < plain.n1; ++i) {
            CHECK(ext.vertices[ext.vid(i, l)][0] == plain.vertices[plain.vid(i, l)][0]);
            CHECK(ext.vertices[ext.vid(i, l)][1] == plain.vertices[plain.vid(i, l)][1]);
        }
    for (int i = 0; i < ext.n1; ++i)
        CHECK(ext.vertices[ext.vid(i, ext.n_rows)][1] == H + lambda);
    // location works in both zones
    CHECK_NOTHROW(ext.locate(0.5, 2.0));
    CHECK_NOTHROW(ext.locate(0.5, 3.2));
}

TEST_CASE("mesh dump uses the v/t/e plain-text format", "[mesh]") {
    const CellMesh m = build_cell_mesh(flat_surface(0.0), 1.0, 0.5);
    std::ostringstream os;
    m.dump(os);
    std::istringstream is(os.str());
    std::string line;
    int nv = 0, nt = 0, ne = 0;
    while (std::getline(is, line)) {
        REQUIRE_FALSE(line.empty());
        if (line[0] == 'v') ++nv;
        else if (line[0] == 't') ++nt;
        else if (line[0] == 'e') ++ne;
        else FAIL("unexpected dump line: " + line);
    }
    CHECK(nv == m.n_vertices());
    CHECK(nt == m.n_triangles());
    CHECK(ne == static_cast<int>(m.boundary_edges.size()));
}

TEST_CASE("trace coefficients recover pure modes", "[mesh]") {
    const CellMesh m = build_cell_mesh(flat_surface(0.0), 1.0, 0.2);  // n1 = 32
    std::vector<Complex> ones(m.n1, Complex(1.0, 0.0));
    const auto c0 = trace_fourier_coeffs(m, ones, 10);
    for (int j = -10; j <= 10; ++j)
        CHECK(std::abs(c0[j + 10] - (j == 0 ? 1.0 : 0.0)) < 1e-14);

    std::vector<Complex> mode1(m.n1);
    for (int i = 0; i < m.n1; ++i) mode1[i] = std::polar(1.0, m.s_col(i));
    const auto c1 = trace_fourier_coeffs(m, mode1, 10);
    for (int j = -10; j <= 10; ++j)
        CHECK(std::abs(c1[j + 10] - (j == 1 ? 1.0 : 0.0)) < 1e-13);

    CHECK_THROWS_AS(trace_fourier_coeffs(m, ones, m.n1 / 2),
                    InsufficientResolution);
}

TEST_CASE("trace coefficients nearly exhaust the discrete energy", "[mesh]") {
    const CellMesh m = build_cell_mesh(flat_surface(0.0), 1.0, 0.2);  // n1 = 32
    std::mt19937 rng(55);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Complex> w(m.n1);
    for (auto& v : w) v = Complex(u(rng), u(rng));
    const int J = m.n1 / 2 - 1;
    const auto c = trace_fourier_coeffs(m, w, J);
    double lhs = 0.0;
    for (const auto& v : c) lhs += std::norm(v);
    double rhs = 0.0;
    for (const auto& v : w) rhs += std::norm(v);
    rhs /= m.n1;  // (1/2pi) * trapezoid of |w|^2 over the period
    CHECK(lhs <= rhs + 1e-12);
    CHECK(rhs - lhs <= 0.2 * rhs);  // only the aliasing tail is missing
}
