#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "special_functions.hpp"

namespace maxtail {

// Geometry of the level curves C_alpha = { (w, z) : Phi(w) Phi(z) = alpha }.
//
// Along a ray from the origin the product h(r) = Phi(r cos t) Phi(r sin t)
// starts at 1/4 and is unimodal, so each ray meets a level curve at most
// once beyond the origin.  The curve layout by level:
//   alpha >  1/4: a single arc in the first quadrant, V-shaped in polar form
//                 over t in (0, pi/2) (for alpha < 1/2 the curve continues
//                 past the axes, but there the polar radius is multivalued
//                 and outside this parametrization);
//   alpha == 1/4: passes through the origin, tangent to the anti-diagonal;
//                 branches over t in (pi/2, 3pi/4) and (7pi/4, 2pi);
//   alpha <  1/4: a single curve enclosing the origin's lower-left,
//                 single-valued over t in (pi/2, 2pi).

inline constexpr double kPi = 3.141592653589793238462643383279503;

// z such that Phi(w) Phi(z) = alpha, for Phi(w) > alpha.
inline double level_z(double w, double alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::domain_error("level_z: alpha outside (0, 1)");
    const double pw = special::normal_cdf(w);
    if (!(pw > alpha)) throw std::domain_error("level_z: Phi(w) must exceed alpha");
    return special::normal_quantile(alpha / pw);
}

namespace detail {

inline double ray_product(double r, double c, double s) {
    return special::normal_cdf(r * c) * special::normal_cdf(r * s);
}

// Bisect h(r) - alpha to a sign change inside [lo, hi]; h(lo) and h(hi)
// must straddle alpha.
inline double bisect_radius(double lo, double hi, double c, double s, double alpha) {
    const bool lo_above = ray_product(lo, c, s) > alpha;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
        const double m = 0.5 * (lo + hi);
        ((ray_product(m, c, s) > alpha) == lo_above ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

// Polar radius of C_alpha along the ray at angle theta.  Throws outside the
// sector where the level curve lives (see the layout above); at alpha = 1/4
// rays that meet the curve only at the origin return 0.
inline double curve_polar_radius(double alpha, double theta) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::domain_error("curve_polar_radius: alpha outside (0, 1)");
    const double c = std::cos(theta);
    const double s = std::sin(theta);

    if (alpha > 0.25) {
        if (!(theta > 0.0) || !(theta < kPi / 2.0))
            throw std::domain_error("curve_polar_radius: theta outside (0, pi/2)");
        double hi = 1.0;
        while (detail::ray_product(hi, c, s) < alpha) {
            hi *= 2.0; // the curve recedes like 1/sin(theta) near the axes
            if (hi > 1e9)
                throw std::runtime_error("curve_polar_radius: bracket expansion failed");
        }
        return detail::bisect_radius(0.0, hi, c, s, alpha);
    }

    if (!(theta > kPi / 2.0) || !(theta < 2.0 * kPi))
        throw std::domain_error("curve_polar_radius: theta outside (pi/2, 2pi)");

    if (alpha < 0.25) {
        double hi = 1.0;
        while (detail::ray_product(hi, c, s) > alpha) {
            hi *= 2.0;
            if (hi > 1e9)
                throw std::runtime_error("curve_polar_radius: bracket expansion failed");
        }
        return detail::bisect_radius(0.0, hi, c, s, alpha);
    }

    // alpha == 1/4: h(0) = alpha exactly.  Hunt for a radius where the ray
    // is inside { h > 1/4 }; if there is none the ray leaves the curve's
    // closure immediately and the only curve point on it is the origin.
    double inside = 0.0;
    for (double r0 = 1e-8; r0 <= 1.0; r0 *= 4.0) {
        if (detail::ray_product(r0, c, s) > alpha) {
            inside = r0;
            break;
        }
    }
    if (inside == 0.0) return 0.0;
    double hi = std::max(1.0, 2.0 * inside);
    while (detail::ray_product(hi, c, s) > alpha) {
        hi *= 2.0;
        if (hi > 1e9) throw std::runtime_error("curve_polar_radius: bracket expansion failed");
    }
    return detail::bisect_radius(inside, hi, c, s, alpha);
}

// d(ln r)/d(theta) along the level curve through (w, z), from implicit
// differentiation of Phi(w)Phi(z) = const (the 1/sqrt(2 pi) factors cancel).
// Flagged singular where the denominator loses all significance, i.e. the
// curve's tangent is radial there.
struct RadialDerivative {
    double value;
    bool singular;
};

inline RadialDerivative radial_log_derivative(double w, double z) {
    const double ew = std::exp(-0.5 * w * w);
    const double ez = std::exp(-0.5 * z * z);
    const double pw = special::normal_cdf(w);
    const double pz = special::normal_cdf(z);
    const double t1 = pz * ew * w;
    const double t2 = pw * ez * z;
    const double num = pz * ew * z - pw * ez * w;
    const double den = t1 + t2;
    const bool singular = std::fabs(den) <= 1e-14 * (std::fabs(t1) + std::fabs(t2));
    return {num / den, singular};
}

// Coordinate change between section space and level-curve space for the
// Gaussian with correlation rho:
//   w = qn(x),  z = (qn(u^2/x) - rho w) / sqrt(1 - rho^2).
inline std::pair<double, double> lambda_map(double u, double x, double rho) {
    if (!(u > 0.0) || !(u < 1.0)) throw std::domain_error("lambda_map: u must lie in (0, 1)");
    if (!(x > u * u) || !(x < 1.0))
        throw std::domain_error("lambda_map: x outside (u^2, 1)");
    if (!(std::fabs(rho) < 1.0)) throw std::domain_error("lambda_map: |rho| must be < 1");
    const double w = special::normal_quantile(x);
    const double q = special::normal_quantile(u * u / x);
    const double sig = std::sqrt((1.0 - rho) * (1.0 + rho));
    return {w, (q - rho * w) / sig};
}

// Inverse of lambda_map; u is recovered in the log domain so that deep-tail
// round trips keep relative accuracy.
inline std::pair<double, double> lambda_map_inverse(double w, double z, double rho) {
    if (!std::isfinite(w) || !std::isfinite(z))
        throw std::domain_error("lambda_map_inverse: non-finite input");
    if (!(std::fabs(rho) < 1.0))
        throw std::domain_error("lambda_map_inverse: |rho| must be < 1");
    const double sig = std::sqrt((1.0 - rho) * (1.0 + rho));
    const double x = special::normal_cdf(w);
    const double lpsi = special::log_normal_cdf(rho * w + sig * z).log();
    const double lx = special::log_normal_cdf(w).log();
    return {std::exp(0.5 * (lx + lpsi)), x};
}

// Self-intersection probe: angles t where the polar radius of C_alpha
// repeats after a rotation by beta, i.e. r(t) = r(t + beta).  Each root
// gives a point (w, z) on the curve whose rotation by beta also lies on the
// curve.  At alpha = 1/4 the origin trivially qualifies and is reported
// first (with theta = NaN); the remaining windows keep both angles inside
// one branch, and cross-branch pairs cannot occur because the branches
// subtend disjoint angle ranges even after the rotation.
struct LevelCurveProbe {
    double alpha;
    double beta;
    int resolution;
    std::vector<std::pair<double, double>> intersections; // (w, z) at theta
    std::vector<double> thetas;
    std::vector<double> radii;
};

namespace detail {

struct RotatedGap {
    double alpha, beta;
    double operator()(double t) const {
        return curve_polar_radius(alpha, t) - curve_polar_radius(alpha, t + beta);
    }
};

// Scan [lo, hi] for sign changes of gap() at the given resolution, bisect
// each, and retry at x4 resolution (twice at most) if two sign changes land
// within three cells of each other, which would hint at an unresolved pair.
inline void scan_span(const RotatedGap& gap, double lo, double hi, int resolution, int depth,
                      std::vector<double>& roots) {
    const double inset = (hi - lo) * 1e-6;
    lo += inset;
    hi -= inset;
    if (!(hi > lo)) return;
    const double step = (hi - lo) / resolution;

    std::vector<int> cells;
    double prev = gap(lo);
    for (int i = 1; i <= resolution; ++i) {
        const double t = lo + i * step;
        const double cur = gap(t);
        if ((prev > 0.0 && cur <= 0.0) || (prev < 0.0 && cur >= 0.0)) cells.push_back(i - 1);
        prev = cur;
    }

    if (depth < 2) {
        for (std::size_t k = 1; k < cells.size(); ++k) {
            if (cells[k] - cells[k - 1] <= 3) {
                scan_span(gap, lo, hi, resolution * 4, depth + 1, roots);
                return;
            }
        }
    }

    for (int cell : cells) {
        double a = lo + cell * step, b = a + step;
        double fa = gap(a);
        for (int it = 0; it < 60; ++it) {
            const double m = 0.5 * (a + b);
            const double fm = gap(m);
            if ((fa > 0.0) == (fm > 0.0)) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        roots.push_back(0.5 * (a + b));
    }
}

} // namespace detail

inline LevelCurveProbe intersection_probe(double alpha, double beta, int resolution = 1000) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::domain_error("intersection_probe: alpha outside (0, 1)");
    if (!(beta > 0.0) || !(beta < kPi / 2.0))
        throw std::domain_error("intersection_probe: beta outside (0, pi/2)");
    if (resolution < 16)
        throw std::invalid_argument("intersection_probe: resolution must be >= 16");

    LevelCurveProbe probe{alpha, beta, resolution, {}, {}, {}};

    std::vector<std::pair<double, double>> spans;
    if (alpha > 0.25) {
        spans.push_back({0.0, kPi / 2.0 - beta});
    } else if (alpha < 0.25) {
        spans.push_back({kPi / 2.0, 2.0 * kPi - beta});
    } else {
        probe.intersections.emplace_back(0.0, 0.0);
        probe.thetas.push_back(std::numeric_limits<double>::quiet_NaN());
        probe.radii.push_back(0.0);
        if (beta < kPi / 4.0) {
            spans.push_back({kPi / 2.0, 0.75 * kPi - beta});
            spans.push_back({1.75 * kPi, 2.0 * kPi - beta});
        }
    }

    const detail::RotatedGap gap{alpha, beta};
    std::vector<double> roots;
    for (const auto& span : spans)
        if (span.second > span.first)
            detail::scan_span(gap, span.first, span.second, resolution, 0, roots);

    for (double t : roots) {
        const double r = curve_polar_radius(alpha, t);
        probe.intersections.emplace_back(r * std::cos(t), r * std::sin(t));
        probe.thetas.push_back(t);
        probe.radii.push_back(r);
    }
    return probe;
}

} // namespace maxtail
