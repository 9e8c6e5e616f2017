#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "blochpml/branch.hpp"
#include "blochpml/errors.hpp"

namespace blochpml {

namespace detail {

/// Adaptive Simpson quadrature for complex integrands.
inline Complex adaptive_simpson_rec(const std::function<Complex(double)>& f,
                                    double a, double b, Complex fa, Complex fm,
                                    Complex fb, Complex whole, double tol,
                                    int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const Complex flm = f(lm), frm = f(rm);
    const Complex left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const Complex right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const Complex delta = left + right - whole;
    // the relative floor stops refinement once delta sits in rounding
    // noise of the local panel values
    const double floor = 2e-16 * (std::abs(left) + std::abs(right));
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol + floor)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

}  // namespace detail

/// integral_a^b f, adaptive Simpson to absolute tolerance `tol`.
inline Complex adaptive_integrate(const std::function<Complex(double)>& f,
                                  double a, double b, double tol = 1e-13) {
    if (a == b) return 0.0;
    const Complex fa = f(a), fm = f(0.5 * (a + b)), fb = f(b);
    const Complex whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 30);
}

/// One transverse mode of the flat-surface cell problem on (c, H):
///   v'' + beta^2 v = g,   v(c) = 0,   v'(H) = i beta v(H),
/// with beta = beta(alpha, j, k).
struct ModalProblem {
    Wavenumber k;
    Complex alpha{0.0, 0.0};
    int j = 0;
    double c = 0.0;  ///< flat surface height
    double H = 0.0;
    std::function<Complex(double)> g;

    Complex beta_j() const { return beta(alpha, j, k); }
};

namespace detail {

/// Green kernel data for the modal problem: u1(t) = sin(beta (t-c))
/// vanishes at the surface, u2(t) = e^{i beta (t-c)} is outgoing, and
/// the Wronskian u1 u2' - u1' u2 is the constant -beta.
struct ModalKernel {
    Complex bta;
    double c;
    Complex u1(double t) const { return std::sin(bta * (t - c)); }
    Complex u2(double t) const { return std::exp(kI * bta * (t - c)); }
};

}  // namespace detail

/// Green function G(x,y) = -u1(min) u2(max) / beta of the modal problem.
inline Complex modal_green(const ModalProblem& p, double x, double y) {
    const Complex b = p.beta_j();
    if (std::abs(b) < 1e-10) throw CutoffMode("mode at a cutoff: |beta| < 1e-10");
    const detail::ModalKernel ker{b, p.c};
    const double lo = std::min(x, y), hi = std::max(x, y);
    return -ker.u1(lo) * ker.u2(hi) / b;
}

/// Closed-form modal solution v(x2) = integral_c^H G(x2, y) g(y) dy,
/// split at the kink so each piece is smooth for the quadrature.
inline Complex flat_modal_solution(const ModalProblem& p, double x2,
                                   double tol = 1e-13) {
    const Complex b = p.beta_j();
    if (std::abs(b) < 1e-10) throw CutoffMode("mode at a cutoff: |beta| < 1e-10");
    const detail::ModalKernel ker{b, p.c};
    const Complex lower = adaptive_integrate(
        [&](double y) { return ker.u1(y) * p.g(y); }, p.c, x2, tol);
    const Complex upper = adaptive_integrate(
        [&](double y) { return ker.u2(y) * p.g(y); }, x2, p.H, tol);
    return -(ker.u2(x2) * lower + ker.u1(x2) * upper) / b;
}

/// d/dx2 of the closed form (the kink contributions cancel).
inline Complex flat_modal_derivative(const ModalProblem& p, double x2,
                                     double tol = 1e-13) {
    const Complex b = p.beta_j();
    if (std::abs(b) < 1e-10) throw CutoffMode("mode at a cutoff: |beta| < 1e-10");
    const detail::ModalKernel ker{b, p.c};
    const Complex lower = adaptive_integrate(
        [&](double y) { return ker.u1(y) * p.g(y); }, p.c, x2, tol);
    const Complex upper = adaptive_integrate(
        [&](double y) { return ker.u2(y) * p.g(y); }, x2, p.H, tol);
    const Complex du2 = kI * b * ker.u2(x2);
    const Complex du1 = b * std::cos(b * (x2 - p.c));
    return -(du2 * lower + du1 * upper) / b;
}

/// Semi-analytic cell solution for a flat surface and a finite modal
/// source sum_j e^{i j x1} g_j(x2): per-mode closed forms superposed.
/// Evaluations memoize v_j per distinct x2 (meshes hit few levels).
class FlatCellOracle {
  public:
    FlatCellOracle(Wavenumber k, Complex alpha, double c, double H)
        : k_(k), alpha_(alpha), c_(c), H_(H) {}

    void add_mode(int j, std::function<Complex(double)> g) {
        modes_.push_back({j, std::move(g)});
        memo_.emplace_back();
    }

    Complex operator()(double x1, double x2) const {
        Complex acc = 0.0;
        for (std::size_t mIdx = 0; mIdx < modes_.size(); ++mIdx) {
            auto& memo = memo_[mIdx];
            auto it = memo.find(x2);
            if (it == memo.end()) {
                ModalProblem p{k_, alpha_, modes_[mIdx].first, c_, H_,
                               modes_[mIdx].second};
                it = memo.emplace(x2, flat_modal_solution(p, x2)).first;
            }
            acc += it->second *
                   std::exp(kI * static_cast<double>(modes_[mIdx].first) * x1);
        }
        return acc;
    }

    std::vector<Complex> evaluate(std::span<const std::array<double, 2>> pts) const {
        std::vector<Complex> out(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i)
            out[i] = (*this)(pts[i][0], pts[i][1]);
        return out;
    }

  private:
    Wavenumber k_;
    Complex alpha_;
    double c_, H_;
    std::vector<std::pair<int, std::function<Complex(double)>>> modes_;
    mutable std::vector<std::map<double, Complex>> memo_;
};

}  // namespace blochpml
