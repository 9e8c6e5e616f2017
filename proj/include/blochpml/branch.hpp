#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "blochpml/errors.hpp"

namespace blochpml {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

/// Square root on the branch cut along the negative imaginary axis,
/// i.e. arg(z) taken in (-pi/2, 3pi/2].  Points on the cut itself take
/// the limit from the left half-plane.  Positive reals map to positive
/// reals, negative reals to +i*sqrt(|z|).
inline Complex sqrt_branch(Complex z) {
    double a = std::arg(z);  // principal value in (-pi, pi]
    if (a <= -kPi / 2.0) a += 2.0 * kPi;
    return std::sqrt(std::abs(z)) * std::polar(1.0, 0.5 * a);
}

/// k = kappa + jhat with jhat a non-negative integer and the rounding
/// error kappa in (-1/2, 1/2).  kappa == 0 or |kappa| == 1/2 mark the
/// excluded half-integer wavenumbers; `assumption_ok` records whether k
/// kept a safe distance `tol` from that grid.
struct Wavenumber {
    double k = 0.0;
    double kappa = 0.0;
    int jhat = 0;
    bool assumption_ok = true;

    /// The two cutoff values {-kappa, +kappa} coincide when kappa == 0.
    double cutoff() const { return kappa; }
};

/// Unique decomposition k = kappa + jhat.  Throws HalfIntegerWavenumber
/// when k is within `tol` of some n/2 (n a positive integer) unless
/// `allow_half_integer` is set, in which case the decomposition is
/// returned with assumption_ok = false.
inline Wavenumber decompose_wavenumber(double k, double tol = 1e-9,
                                       bool allow_half_integer = false) {
    if (!(k > 0.0)) throw Error("wavenumber must be positive");
    const double grid = std::max(0.5, std::round(2.0 * k) / 2.0);
    const double dist = std::abs(k - grid);
    Wavenumber w;
    w.k = k;
    w.jhat = static_cast<int>(std::llround(k));
    w.kappa = k - static_cast<double>(w.jhat);
    w.assumption_ok = dist >= tol;
    if (!w.assumption_ok && !allow_half_integer)
        throw HalfIntegerWavenumber("k = " + std::to_string(k) +
                                    " is within tol of the n/2 grid");
    return w;
}

/// sqrt(k^2 - z^2) continued analytically as the product
/// sqrt(k+z)*sqrt(k-z); the factors are never merged because
/// sqrt(xy) = sqrt(x)sqrt(y) fails off the positive axis.
inline Complex beta_scalar(Complex z, double k) {
    return sqrt_branch(k + z) * sqrt_branch(k - z);
}

/// Transverse wavenumber of mode j at Bloch parameter alpha.  On the
/// real axis this equals the piecewise rule: real sqrt(k^2-(a+j)^2) for
/// |a+j| <= k, i*sqrt((a+j)^2-k^2) otherwise.
inline Complex beta(Complex alpha, int j, const Wavenumber& k) {
    return beta_scalar(alpha + static_cast<double>(j), k.k);
}

/// exp(z) - 1 without cancellation for small |z|.
inline Complex cexpm1(Complex z) {
    if (std::abs(z) < 1e-4)
        return z * (1.0 + z / 2.0 * (1.0 + z / 3.0 * (1.0 + z / 4.0)));
    return std::exp(z) - 1.0;
}

/// h(z) = exp(-2i sqrt(k^2-z^2) sigma).  May overflow to inf for very
/// large exponents; use log_abs_h where only the modulus matters.
inline Complex h_func(Complex z, const Wavenumber& k, Complex sigma) {
    return std::exp(-2.0 * kI * beta_scalar(z, k.k) * sigma);
}

/// ln|h(z)|, overflow-free.
inline double log_abs_h(Complex z, const Wavenumber& k, Complex sigma) {
    return std::real(-2.0 * kI * beta_scalar(z, k.k) * sigma);
}

/// coth(-i beta_j(alpha) sigma), evaluated as 1 + 2/(h-1) so that large
/// |sigma| never overflows.  Throws DegenerateExponent at a resonant
/// sigma (h == 1 to machine scale); callers should perturb sigma.
inline Complex coth_factor(Complex alpha, int j, const Wavenumber& k,
                           Complex sigma) {
    const Complex e = -2.0 * kI * beta(alpha, j, k) * sigma;  // h = exp(e)
    if (std::real(e) > 700.0) return 1.0 + 2.0 * std::exp(-e);
    const Complex hm1 = cexpm1(e);
    if (std::abs(hm1) < 1e-300)
        throw DegenerateExponent("h(alpha+j) == 1 at j = " + std::to_string(j));
    return 1.0 + 2.0 / hm1;
}

/// Complex vertical-stretch profile of the absorbing layer and the
/// aggregate parameter sigma = lambda*(1 + rho*chi/(m+1)).
struct PmlProfile {
    double lambda = 1.5;         ///< layer thickness
    double rho = 0.0;            ///< strength
    Complex chi{0.0, 0.0};       ///< unit-modulus direction, Re,Im > 0
    int m = 2;                   ///< polynomial degree
    Complex sigma{0.0, 0.0};     ///< derived
    double tau = 0.0;            ///< arg(sigma)
    bool tau_in_assumed_range = false;  ///< tau in (pi/8, (pi-atan2)/2)

    /// s(x2) = 1 + rho*chi*((x2-H)/lambda)^m above H, 1 below.
    Complex s(double x2, double H) const {
        if (x2 <= H) return 1.0;
        const double t = (x2 - H) / lambda;
        return 1.0 + rho * chi * std::pow(t, m);
    }
};

inline PmlProfile make_pml_profile(double lambda, double rho, Complex chi,
                                   int m) {
    if (!(lambda > 0.0)) throw Error("pml thickness must be positive");
    if (rho < 0.0) throw Error("pml strength must be non-negative");
    if (m < 1) throw Error("pml degree must be a positive integer");
    if (std::abs(std::abs(chi) - 1.0) > 1e-12 || chi.real() <= 0.0 ||
        chi.imag() <= 0.0)
        throw Error("chi must be unit-modulus with positive real and "
                    "imaginary parts");
    PmlProfile p;
    p.lambda = lambda;
    p.rho = rho;
    p.chi = chi;
    p.m = m;
    p.sigma = lambda * (1.0 + rho * chi / static_cast<double>(m + 1));
    p.tau = std::atan2(p.sigma.imag(), p.sigma.real());
    const double lo = kPi / 8.0;
    const double hi = (kPi - std::atan(2.0)) / 2.0;
    p.tau_in_assumed_range = (p.tau > lo && p.tau < hi);
    return p;
}

}  // namespace blochpml
