#include <catch2/catch.hpp>

#include <cmath>
#include <random>

#include "blochpml/oracle.hpp"
#include "blochpml/source.hpp"

using namespace blochpml;

namespace {

ModalProblem sample_problem(int j = 0, Complex alpha = Complex(0.1, 0.0)) {
    ModalProblem p;
    p.k = decompose_wavenumber(1.2);
    p.alpha = alpha;
    p.j = j;
    p.c = 1.0;
    p.H = 2.5;
    const RadialCutoff cut = make_radial_cutoff(0.1, 0.3, 8);
    p.g = [cut](double y) { return Complex(cut(std::abs(y - 1.6)), 0.0); };
    return p;
}

}  // namespace

TEST_CASE("zero source gives the zero modal solution", "[oracle]") {
    ModalProblem p = sample_problem();
    p.g = [](double) { return Complex(0.0, 0.0); };
    CHECK(std::abs(flat_modal_solution(p, 1.7)) == 0.0);
}

TEST_CASE("modal solution satisfies both boundary conditions", "[oracle]") {
    const ModalProblem p = sample_problem();
    CHECK(std::abs(flat_modal_solution(p, p.c)) < 1e-14);  // u1(c) = 0
    const Complex b = p.beta_j();
    const Complex dv = flat_modal_derivative(p, p.H);
    const Complex v = flat_modal_solution(p, p.H);
    CHECK(std::abs(dv - kI * b * v) < 1e-10);
}

TEST_CASE("modal solution satisfies the equation by finite differences",
          "[oracle]") {
    const ModalProblem p = sample_problem();
    const Complex b2 = p.beta_j() * p.beta_j();
    const double h = 2.5e-3;
    for (double x : {1.35, 1.6, 1.82, 2.1, 2.4}) {
        const Complex vm2 = flat_modal_solution(p, x - 2.0 * h);
        const Complex vm1 = flat_modal_solution(p, x - h);
        const Complex v0 = flat_modal_solution(p, x);
        const Complex vp1 = flat_modal_solution(p, x + h);
        const Complex vp2 = flat_modal_solution(p, x + 2.0 * h);
        const Complex d2 =
            (-vp2 + 16.0 * vp1 - 30.0 * v0 + 16.0 * vm1 - vm2) / (12.0 * h * h);
        const Complex residual = d2 + b2 * v0 - p.g(x);
        CHECK(std::abs(residual) < 1e-6);
    }
}

TEST_CASE("green kernel is symmetric", "[oracle]") {
    const ModalProblem p = sample_problem(2);  // evanescent branch
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(1.0, 2.5);
    for (int i = 0; i < 50; ++i) {
        const double x = u(rng), y = u(rng);
        const Complex a = modal_green(p, x, y);
        const Complex b = modal_green(p, y, x);
        CHECK(std::abs(a - b) <= 1e-13 * std::max(1.0, std::abs(a)));
    }
}

TEST_CASE("evanescent modes decay monotonically above the source", "[oracle]") {
    const ModalProblem p = sample_problem(3);  // |alpha + 3| > k
    REQUIRE(p.beta_j().imag() > 0.0);
    REQUIRE(std::abs(p.beta_j().real()) < 1e-12);
    const double top_of_support = 1.9;
    double prev = std::abs(flat_modal_solution(p, top_of_support));
    for (double x = top_of_support + 0.1; x <= p.H + 1e-9; x += 0.1) {
        const double cur = std::abs(flat_modal_solution(p, x));
        CHECK(cur <= prev + 1e-14);
        prev = cur;
    }
    const double vH = std::abs(flat_modal_solution(p, p.H));
    CHECK(vH <= std::abs(flat_modal_solution(p, 2.0)) + 1e-14);
}

TEST_CASE("cutoff modes are rejected", "[oracle]") {
    ModalProblem p = sample_problem(1, Complex(0.2, 0.0));  // |alpha + j| = k
    CHECK_THROWS_AS(flat_modal_solution(p, 1.7), CutoffMode);
}

TEST_CASE("cell oracle superposes modes linearly and stays mode-pure",
          "[oracle]") {
    const Wavenumber k = decompose_wavenumber(1.2);
    const Complex alpha(0.1, 0.0);
    const RadialCutoff cut = make_radial_cutoff(0.1, 0.3, 8);
    auto g1 = [cut](double y) { return Complex(cut(std::abs(y - 1.6)), 0.0); };
    auto g2 = [cut](double y) { return Complex(0.0, cut(std::abs(y - 1.8))); };

    FlatCellOracle single(k, alpha, 1.0, 2.5);
    single.add_mode(1, g1);
    // x1-Fourier purity: project onto e^{i m x1} on a ring
    const int n = 64;
    for (int m : {0, 1, 2, -1}) {
        Complex acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x1 = -kPi + 2.0 * kPi * i / n;
            acc += single(x1, 2.0) * std::polar(1.0, -m * x1);
        }
        acc /= static_cast<double>(n);
        if (m == 1)
            CHECK(std::abs(acc) > 1e-3);
        else
            CHECK(std::abs(acc) < 1e-12);
    }

    FlatCellOracle a(k, alpha, 1.0, 2.5), b(k, alpha, 1.0, 2.5),
        ab(k, alpha, 1.0, 2.5);
    a.add_mode(1, g1);
    b.add_mode(-2, g2);
    ab.add_mode(1, g1);
    ab.add_mode(-2, g2);
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> ux(-kPi, kPi), uy(1.05, 2.45);
    for (int i = 0; i < 40; ++i) {
        const double x1 = ux(rng), x2 = uy(rng);
        const Complex lhs = ab(x1, x2);
        const Complex rhs = a(x1, x2) + b(x1, x2);
        CHECK(std::abs(lhs - rhs) <= 1e-13 * std::max(1.0, std::abs(rhs)));
    }
}
