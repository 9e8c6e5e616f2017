#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "blochpml/branch.hpp"
#include "blochpml/contour.hpp"
#include "blochpml/errors.hpp"

namespace blochpml {

/// Result of sampling the layer-error symbol h(z) = exp(-2i b(z) sigma)
/// along the extended contour and over the half disks at the branch
/// points.
///   gamma_est  = min over contour samples of
///                  ln|h(z)| / (sqrt(delta) |sigma| sqrt(|Re z| + k)),
///   min_margin = min over half-disk samples of
///                  1/(gamma_est |sigma|) - |2 b(z) / (h(z) - 1)|.
struct HBoundReport {
    double gamma_est = 0.0;
    double min_margin = 0.0;
    Complex argmin_contour{0.0, 0.0};
    Complex argmin_disk{0.0, 0.0};
    long contour_samples = 0;
    long disk_samples = 0;
};

/// sqrt(k^2 - z^2) evaluated through some branch rule; the default is
/// the factor-wise continuation, the test hook may corrupt it.
using BranchFn = std::function<Complex(Complex)>;

/// Samples ln|h| on the contour translated by every j in [-j_max, j_max]
/// and checks the uniform growth estimate plus the bounded-ratio
/// property on the half disks at -k+j (upper) and k+j (lower).  Throws
/// BoundViolated when the growth estimate comes out non-positive, which
/// indicates a branch or contour bug rather than a property of the
/// layer.
inline HBoundReport verify_h_bound(const Wavenumber& k, double delta,
                                   Complex sigma, int samples_per_piece,
                                   int j_max = 40, BranchFn branch = {}) {
    if (!(std::abs(sigma) > 0.0)) throw Error("sigma must be nonzero");
    if (samples_per_piece < 2) throw Error("need at least 2 samples per piece");
    if (!branch)
        branch = [kk = k.k](Complex z) { return beta_scalar(z, kk); };

    const Contour contour = build_contour(k, delta);
    const double as = std::abs(sigma);
    const double sq_delta = std::sqrt(delta);

    HBoundReport rep;
    rep.gamma_est = std::numeric_limits<double>::infinity();
    for (const auto& piece : contour.pieces) {
        for (int s = 0; s <= samples_per_piece; ++s) {
            const Complex a = piece.point(static_cast<double>(s) / samples_per_piece);
            for (int j = -j_max; j <= j_max; ++j) {
                const Complex z = a + static_cast<double>(j);
                const double lh = std::real(-2.0 * kI * branch(z) * sigma);
                const double ratio =
                    lh / (sq_delta * as * std::sqrt(std::abs(z.real()) + k.k));
                ++rep.contour_samples;
                if (ratio < rep.gamma_est) {
                    rep.gamma_est = ratio;
                    rep.argmin_contour = z;
                }
            }
        }
    }
    if (!(rep.gamma_est > 0.0))
        throw BoundViolated("non-positive growth estimate at z = (" +
                            std::to_string(rep.argmin_contour.real()) + ", " +
                            std::to_string(rep.argmin_contour.imag()) + ")");

    // |2 b / (h - 1)| on the half disks; near b = 0 the stable form
    // 2b / expm1(-2 i b sigma) has the finite limit |1/sigma|.
    auto disk_ratio = [&](Complex z) {
        const Complex b = branch(z);
        const Complex e = -2.0 * kI * b * sigma;
        if (std::abs(e) < 1e-12) return 1.0 / as;
        return std::abs(2.0 * b / cexpm1(e));
    };
    const double bound = 1.0 / (rep.gamma_est * as);
    rep.min_margin = std::numeric_limits<double>::infinity();
    const int n_rad = 8, n_ang = 16;
    for (int j = -j_max; j <= j_max; ++j) {
        for (int up = 0; up < 2; ++up) {
            const double center = (up ? -k.k : k.k) + static_cast<double>(j);
            for (int r = 0; r <= n_rad; ++r) {
                const double xi = delta * r / n_rad;
                const int n_a = (r == 0) ? 0 : n_ang;
                for (int a = 0; a <= n_a; ++a) {
                    const double w = kPi * a / std::max(1, n_a);
                    const Complex z =
                        center + xi * std::polar(1.0, up ? w : -w);
                    const double margin = bound - disk_ratio(z);
                    ++rep.disk_samples;
                    if (margin < rep.min_margin) {
                        rep.min_margin = margin;
                        rep.argmin_disk = z;
                    }
                }
            }
        }
    }
    return rep;
}

/// Deliberately wrong branch (principal square root of the product) for
/// fault-injection tests: on upper detours far from the origin it flips
/// the sign of ln|h|.
inline BranchFn corrupted_branch(const Wavenumber& k) {
    return [kk = k.k](Complex z) { return std::sqrt(kk * kk - z * z); };
}

}  // namespace blochpml
