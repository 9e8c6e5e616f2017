#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "blochpml/branch.hpp"
#include "blochpml/errors.hpp"

namespace blochpml {

/// Polynomial smoothstep of order N: the unique degree-(2N+1) polynomial
/// with S(0)=0, S(1)=1 and N vanishing derivatives at both ends.
/// Coefficients are c_n = (-1)^n C(N+n,n) C(2N+1,N-n) on powers N+1+n.
struct SmoothstepPoly {
    int order = 0;
    std::vector<double> coeffs;  ///< coeffs[n] multiplies x^{order+1+n}

    double operator()(double x) const {
        if (x <= 0.0) return 0.0;
        if (x >= 1.0) return 1.0;
        // evaluate through S(x) = 1 - S(1-x) on the upper half: the raw
        // polynomial has ~1e6-sized alternating coefficients and Horner
        // near x = 1 would drown the tiny tail 1 - S in rounding noise
        if (x > 0.5) return 1.0 - raw(1.0 - x);
        return raw(x);
    }

    double raw(double x) const {
        double acc = 0.0;
        for (int n = order; n >= 0; --n) acc = acc * x + coeffs[n];
        return acc * std::pow(x, order + 1);
    }
};

inline SmoothstepPoly make_smoothstep(int order) {
    if (order < 0) throw Error("smoothstep order must be non-negative");
    auto binom = [](int n, int k) {
        double r = 1.0;
        for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
        return r;
    };
    SmoothstepPoly p;
    p.order = order;
    p.coeffs.resize(order + 1);
    for (int n = 0; n <= order; ++n) {
        const double sign = (n % 2 == 0) ? 1.0 : -1.0;
        p.coeffs[n] = sign * binom(order + n, n) * binom(2 * order + 1, order - n);
    }
    return p;
}

/// Radial cutoff equal to 1 on [0, r_in], 0 on [r_out, inf), joined by a
/// smoothstep whose first `order` derivatives vanish at both ends.
struct RadialCutoff {
    double r_in = 0.1;
    double r_out = 0.3;
    SmoothstepPoly step;

    double operator()(double r) const {
        if (r <= r_in) return 1.0;
        if (r >= r_out) return 0.0;
        return 1.0 - step((r - r_in) / (r_out - r_in));
    }
};

inline RadialCutoff make_radial_cutoff(double r_in, double r_out, int order) {
    if (!(0.0 <= r_in && r_in < r_out))
        throw Error("cutoff radii must satisfy 0 <= r_in < r_out");
    return RadialCutoff{r_in, r_out, make_smoothstep(order)};
}

/// Compactly supported volume source.  `sup_x2` bounds the support from
/// above; assembly rejects sources reaching into the truncation margin.
/// `support_radius <= 0` marks an x1-periodic band source whose support
/// is bounded in x2 only.
struct SourceTerm {
    std::function<Complex(double, double)> evaluator;
    std::array<double, 2> center{0.0, 0.0};
    double support_radius = 0.0;
    double sup_x2 = 0.0;

    Complex operator()(double x1, double x2) const { return evaluator(x1, x2); }
};

/// amplitude * cutoff(|x - a0|): constant near the center, smoothly cut
/// to zero at radius r_out.
inline SourceTerm smooth_disk_source(std::array<double, 2> a0, double r_in,
                                     double r_out, double amplitude,
                                     int smooth_order) {
    RadialCutoff c = make_radial_cutoff(r_in, r_out, smooth_order);
    SourceTerm f;
    f.center = a0;
    f.support_radius = r_out;
    f.sup_x2 = a0[1] + r_out;
    f.evaluator = [c, a0, amplitude](double x1, double x2) -> Complex {
        const double r = std::hypot(x1 - a0[0], x2 - a0[1]);
        return amplitude * c(r);
    };
    return f;
}

/// Band source g(x2) * phase(x1), supported in x2 on [lo, hi].
inline SourceTerm band_source(std::function<Complex(double, double)> evaluator,
                              double sup_x2) {
    SourceTerm f;
    f.evaluator = std::move(evaluator);
    f.support_radius = 0.0;
    f.sup_x2 = sup_x2;
    return f;
}

}  // namespace blochpml
