#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "blochpml/branch.hpp"
#include "blochpml/errors.hpp"

namespace blochpml {

/// A 2*pi-periodic Lipschitz surface profile x2 = zeta(x1) with cached
/// extreme values over one period.
struct PeriodicSurface {
    std::function<double(double)> zeta;
    double sup_zeta = 0.0;
    double inf_zeta = 0.0;
    std::string name;

    double operator()(double x1) const { return zeta(x1); }
};

/// Wraps a callable, sampling one period densely for the extremes and
/// checking 2*pi-periodicity at a few points.
inline PeriodicSurface make_surface(std::function<double(double)> zeta,
                                    std::string name) {
    PeriodicSurface s;
    s.zeta = std::move(zeta);
    s.name = std::move(name);
    const int n = 100000;
    double lo = s.zeta(-kPi), hi = lo;
    for (int i = 1; i <= n; ++i) {
        const double v = s.zeta(-kPi + 2.0 * kPi * i / n);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    s.inf_zeta = lo;
    s.sup_zeta = hi;
    for (double x : {-2.5, -0.3, 0.0, 1.1, 2.9})
        if (std::abs(s.zeta(x + 2.0 * kPi) - s.zeta(x)) > 1e-12)
            throw GeometryError("surface '" + s.name + "' is not 2*pi-periodic");
    return s;
}

inline PeriodicSurface flat_surface(double height) {
    PeriodicSurface s;
    s.zeta = [height](double) { return height; };
    s.inf_zeta = s.sup_zeta = height;
    s.name = "flat:" + std::to_string(height);
    return s;
}

/// Built-in example profile 1.5 + sin(x1)/3 - cos(2 x1)/4.
inline PeriodicSurface wavy_surface() {
    return make_surface(
        [](double x1) {
            return 1.5 + std::sin(x1) / 3.0 - std::cos(2.0 * x1) / 4.0;
        },
        "wavy");
}

}  // namespace blochpml
