#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "blochpml/branch.hpp"
#include "blochpml/errors.hpp"

namespace blochpml {

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton
/// iteration on the three-term recurrence.  Exact for polynomials of
/// degree 2n-1.
inline std::vector<std::pair<double, double>> gauss_legendre(int n) {
    if (n < 1) throw Error("gauss_legendre: n must be >= 1");
    std::vector<std::pair<double, double>> nw(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int l = 2; l <= n; ++l) {
                const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nw[i] = {-x, w};
        nw[n - 1 - i] = {x, w};
    }
    if (n % 2 == 1) nw[n / 2].first = 0.0;  // symmetry pins the middle node
    return nw;
}

enum class PieceKind { Segment, HalfCircleUpper, HalfCircleLower };

/// One piece of an integration path, parameterized over t in [0, 1] and
/// always traversed left to right on the real axis.
///   Segment:          z(t) = a + (b-a) t
///   HalfCircleUpper:  z(t) = c + r e^{i(pi - pi t)}   (clockwise)
///   HalfCircleLower:  z(t) = c + r e^{i(pi + pi t)}   (counter-clockwise)
struct ContourPiece {
    PieceKind kind = PieceKind::Segment;
    double a = 0.0, b = 0.0;      // segment endpoints
    double center = 0.0;          // half-circle data
    double radius = 0.0;

    static ContourPiece segment(double a, double b) {
        ContourPiece p;
        p.kind = PieceKind::Segment;
        p.a = a;
        p.b = b;
        return p;
    }
    static ContourPiece half_circle_upper(double c, double r) {
        ContourPiece p;
        p.kind = PieceKind::HalfCircleUpper;
        p.center = c;
        p.radius = r;
        return p;
    }
    static ContourPiece half_circle_lower(double c, double r) {
        ContourPiece p;
        p.kind = PieceKind::HalfCircleLower;
        p.center = c;
        p.radius = r;
        return p;
    }

    Complex point(double t) const {
        switch (kind) {
            case PieceKind::Segment:
                return Complex(a + (b - a) * t, 0.0);
            case PieceKind::HalfCircleUpper:
                return center + radius * std::polar(1.0, kPi - kPi * t);
            case PieceKind::HalfCircleLower:
            default:
                return center + radius * std::polar(1.0, kPi + kPi * t);
        }
    }

    Complex derivative(double t) const {
        switch (kind) {
            case PieceKind::Segment:
                return Complex(b - a, 0.0);
            case PieceKind::HalfCircleUpper:
                return -kI * kPi * radius * std::polar(1.0, kPi - kPi * t);
            case PieceKind::HalfCircleLower:
            default:
                return kI * kPi * radius * std::polar(1.0, kPi + kPi * t);
        }
    }

    Complex start() const { return point(0.0); }
    Complex end() const { return point(1.0); }
};

/// Integration path from -1/2 to +1/2, either the straight interval
/// (split at interior cutoff values) or the deformed path detouring
/// around the cutoffs on half circles of radius delta.
struct Contour {
    std::vector<ContourPiece> pieces;
    bool deformed = false;
    double delta = 0.0;

    std::string describe() const {
        std::string s = deformed ? "deformed" : "straight";
        s += "(pieces=" + std::to_string(pieces.size());
        if (deformed) s += ",delta=" + std::to_string(delta);
        s += ")";
        return s;
    }
};

/// Largest comfortable detour radius: half the distance from the cutoff
/// to both the origin-side and the endpoint-side obstruction.  Zero when
/// kappa degenerates (k integer or half-integer).
inline double default_delta(const Wavenumber& k) {
    const double ak = std::abs(k.kappa);
    const double room = std::min(ak, 0.5 - ak);
    return room > 0.0 ? room / 2.0 : 0.0;
}

/// Deformed path: the detour at -kappa is the upper (clockwise) half
/// circle, the detour at +kappa the lower (counter-clockwise) one,
/// matching the branch rays -kappa + i R_{<=0} and kappa + i R_{>=0}.
/// Works for kappa of either sign.
inline Contour build_contour(const Wavenumber& k, double delta) {
    const double ak = std::abs(k.kappa);
    if (!(delta > 0.0) || delta >= ak || delta >= 0.5 - ak)
        throw InvalidDelta("delta must lie in (0, |kappa|) and below 1/2 - |kappa|");

    struct Detour {
        double pos;
        bool upper;
    };
    Detour d1{-k.kappa, true};   // upward detour at -kappa
    Detour d2{+k.kappa, false};  // downward detour at +kappa
    if (d1.pos > d2.pos) std::swap(d1, d2);

    Contour c;
    c.deformed = true;
    c.delta = delta;
    auto circle = [&](const Detour& d) {
        return d.upper ? ContourPiece::half_circle_upper(d.pos, delta)
                       : ContourPiece::half_circle_lower(d.pos, delta);
    };
    c.pieces.push_back(ContourPiece::segment(-0.5, d1.pos - delta));
    c.pieces.push_back(circle(d1));
    c.pieces.push_back(ContourPiece::segment(d1.pos + delta, d2.pos - delta));
    c.pieces.push_back(circle(d2));
    c.pieces.push_back(ContourPiece::segment(d2.pos + delta, 0.5));
    return c;
}

/// Straight path [-1/2, 1/2] split at the interior cutoff values so that
/// Gauss nodes never land on a singularity.
inline Contour build_straight_contour(const Wavenumber& k) {
    std::vector<double> knots{-0.5};
    const double ak = std::abs(k.kappa);
    if (ak > 0.0 && ak < 0.5) {
        knots.push_back(-ak);
        knots.push_back(ak);
    } else if (ak == 0.0) {
        knots.push_back(0.0);
    }
    knots.push_back(0.5);
    std::sort(knots.begin(), knots.end());
    Contour c;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i)
        c.pieces.push_back(ContourPiece::segment(knots[i], knots[i + 1]));
    return c;
}

struct QuadratureNode {
    Complex z;
    Complex w;
};

/// Composite Gauss-Legendre on each piece; weights carry the complex
/// path derivative, so the weights of any contour from -1/2 to 1/2 sum
/// to exactly 1.
inline std::vector<QuadratureNode> contour_quadrature(const Contour& c,
                                                      int n_per_piece) {
    if (n_per_piece < 2) throw Error("contour_quadrature: need n >= 2 per piece");
    const auto gl = gauss_legendre(n_per_piece);
    std::vector<QuadratureNode> nodes;
    nodes.reserve(c.pieces.size() * gl.size());
    for (const auto& piece : c.pieces) {
        for (const auto& [x, w] : gl) {
            const double t = 0.5 * (x + 1.0);
            nodes.push_back({piece.point(t), 0.5 * w * piece.derivative(t)});
        }
    }
    return nodes;
}

/// Same, but distributing a total node budget over the pieces (earlier
/// pieces absorb the remainder); at least 2 nodes per piece.
inline std::vector<QuadratureNode> contour_quadrature_total(const Contour& c,
                                                            int n_total) {
    const int np = static_cast<int>(c.pieces.size());
    if (np == 0) throw Error("contour has no pieces");
    const int base = std::max(2, n_total / np);
    int extra = std::max(0, n_total - base * np);
    std::vector<QuadratureNode> nodes;
    for (const auto& piece : c.pieces) {
        int n = base + (extra > 0 ? 1 : 0);
        if (extra > 0) --extra;
        const auto gl = gauss_legendre(n);
        for (const auto& [x, w] : gl) {
            const double t = 0.5 * (x + 1.0);
            nodes.push_back({piece.point(t), 0.5 * w * piece.derivative(t)});
        }
    }
    return nodes;
}

}  // namespace blochpml
