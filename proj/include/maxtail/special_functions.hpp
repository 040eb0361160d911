#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "detail/quadrature.hpp"
#include "log_prob.hpp"

namespace maxtail::special {

inline constexpr double kSqrt2 = 1.4142135623730950488016887242097;
inline constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;
inline constexpr double kLnSqrt2Pi = 0.91893853320467274178032973640562;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;

inline double normal_pdf(double x) {
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

namespace detail {

// ln Phi(x) for deep negative x via the Mills asymptotic series
//   Phi(x) = phi(x)/|x| * (1 - 1/x^2 + 3/x^4 - 15/x^6 + ...).
// Truncation below 1e-15 relative for |x| >= 20.
inline double log_ncdf_asymptotic(double x) {
    const double z = 1.0 / (x * x);
    const double ds =
        z * (-1.0 +
             z * (3.0 +
                  z * (-15.0 +
                       z * (105.0 +
                            z * (-945.0 + z * (10395.0 - z * 135135.0))))));
    return -0.5 * x * x - kLnSqrt2Pi - std::log(-x) + std::log1p(ds);
}

// ln Phi(x), any finite x.  erfc keeps full precision down to x ~ -37;
// beyond that the asymptotic series takes over.
inline double log_ncdf_raw(double x) {
    if (x >= 0.0) return std::log1p(-0.5 * std::erfc(x * kInvSqrt2));
    if (x >= -37.0) return std::log(0.5 * std::erfc(-x * kInvSqrt2));
    return log_ncdf_asymptotic(x);
}

inline void require_finite(double x, const char* who) {
    if (!std::isfinite(x)) throw std::domain_error(std::string(who) + ": non-finite input");
}

} // namespace detail

// Standard normal CDF, relative error a few ulp down to x ~ -37 (contract:
// <= 1e-14 for x >= -38).  Deeper in the tail the value is exp of the log
// path; the linear double may be subnormal or zero there, so callers needing
// the far tail use log_normal_cdf instead.
inline double normal_cdf(double x) {
    detail::require_finite(x, "normal_cdf");
    if (x >= -37.0) return 0.5 * std::erfc(-x * kInvSqrt2);
    return std::exp(detail::log_ncdf_asymptotic(x));
}

// ln Phi(x) as a LogProb; valid for any finite x, full relative precision in
// the tail (e.g. x = -40 gives log ~ -804.6 rather than an underflown 0).
inline LogProb log_normal_cdf(double x) {
    detail::require_finite(x, "log_normal_cdf");
    return LogProb::from_log(std::min(detail::log_ncdf_raw(x), 0.0));
}

// Inverse standard normal CDF.  Rational initial estimate (Acklam) refined by
// two Newton steps on the log-CDF, which stays well conditioned into the far
// tail.  Composition normal_cdf(normal_quantile(p)) holds to ~1e-15 relative
// on p in [1e-12, 1 - 1e-12].
inline double normal_quantile(double p) {
    if (std::isnan(p) || p <= 0.0 || p >= 1.0)
        throw std::domain_error("normal_quantile: p outside (0,1)");
    if (p == 0.5) return 0.0;

    // q = min(p, 1-p); 1-p is exact for p >= 0.5 (Sterbenz).
    const bool upper = p > 0.5;
    const double q = upper ? 1.0 - p : p;

    double x;
    if (q >= 0.02425) {
        // central region rational approximation
        static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
        static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
        const double r = q - 0.5;
        const double s = r * r;
        x = (((((a[0] * s + a[1]) * s + a[2]) * s + a[3]) * s + a[4]) * s + a[5]) * r /
            (((((b[0] * s + b[1]) * s + b[2]) * s + b[3]) * s + b[4]) * s + 1.0);
    } else {
        // tail region
        static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
        static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
        const double k = std::sqrt(-2.0 * std::log(q));
        x = (((((c[0] * k + c[1]) * k + c[2]) * k + c[3]) * k + c[4]) * k + c[5]) /
            ((((d[0] * k + d[1]) * k + d[2]) * k + d[3]) * k + 1.0);
    }

    // Newton on F(x) = ln Phi(x) - ln q; step = -F * Phi/phi computed in logs.
    const double lnq = std::log(q);
    for (int it = 0; it < 2; ++it) {
        const double lphi = detail::log_ncdf_raw(x);
        const double lpdf = -0.5 * x * x - kLnSqrt2Pi;
        x -= (lphi - lnq) * std::exp(lphi - lpdf);
    }
    return upper ? -x : x;
}

// Bivariate standard normal CDF P(X <= s, Y <= t) with corr(X,Y) = rho,
// |rho| < 1.  Computed by reducing the double integral to the conditional
// form  int_{-inf}^{s} phi(x) Phi((t - rho x)/sqrt(1-rho^2)) dx  and applying
// adaptive Gauss-Kronrod quadrature.  Absolute error <= 1e-12 (relative error
// tracked too, so small values keep significance).  s or t may be +inf
// (marginal limit).
inline double bvn_cdf(double s, double t, double rho) {
    if (std::isnan(s) || std::isnan(t) || !std::isfinite(rho))
        throw std::domain_error("bvn_cdf: non-finite input");
    if (std::fabs(rho) >= 1.0)
        throw std::domain_error("bvn_cdf: |rho| must be < 1");
    if (std::isinf(s) && s < 0.0) throw std::domain_error("bvn_cdf: s must be finite or +inf");
    if (std::isinf(t) && t < 0.0) throw std::domain_error("bvn_cdf: t must be finite or +inf");

    const bool s_inf = std::isinf(s), t_inf = std::isinf(t);
    if (s_inf && t_inf) return 1.0;
    if (s_inf) return normal_cdf(t);
    if (t_inf) return normal_cdf(s);
    if (rho == 0.0) return normal_cdf(s) * normal_cdf(t);

    // integrate over the smaller marginal; symmetric in (s, t) by construction
    const double a = std::min(s, t);
    const double b = std::max(s, t);
    const double hi = std::min(a, 38.0);
    const double lo = -38.0; // phi(x) < 1e-314 beyond; contribution negligible
    if (hi <= lo) return 0.0;

    const double sig = std::sqrt((1.0 - rho) * (1.0 + rho));
    const auto f = [b, rho, sig](double x) {
        return normal_pdf(x) * normal_cdf((b - rho * x) / sig);
    };
    const double v = maxtail::detail::adaptive_gk15(f, lo, hi, 1e-13, 5e-13);
    return std::clamp(v, 0.0, 1.0);
}

// ln Phi2(s, t; rho) for finite s, t, computed entirely in the log domain so
// that deep-tail values (far below linear quadrature accuracy) retain
// relative precision.  Relative error of the log <= 1e-9 (typically ~1e-13).
// The conditional integrand is log-concave, so it has a single mode: the
// integral is rescaled by the mode value and integrated adaptively.
inline LogProb log_bvn_cdf_tail(double s, double t, double rho) {
    if (!std::isfinite(s) || !std::isfinite(t) || !std::isfinite(rho))
        throw std::domain_error("log_bvn_cdf_tail: non-finite input");
    if (std::fabs(rho) >= 1.0)
        throw std::domain_error("log_bvn_cdf_tail: |rho| must be < 1");
    if (rho == 0.0) return log_normal_cdf(s) * log_normal_cdf(t);

    const double a = std::min(s, t);
    const double b = std::max(s, t);
    const double sig = std::sqrt((1.0 - rho) * (1.0 + rho));

    const auto g = [b, rho, sig](double x) {
        const double y = (b - rho * x) / sig;
        return -0.5 * x * x - kLnSqrt2Pi + detail::log_ncdf_raw(y);
    };
    // g'(x) = -x - (rho/sig) * phi(y)/Phi(y); g is concave and g' -> +inf as
    // x -> -inf, so the mode on (-inf, a] is either a itself or the root of g'.
    const auto gp = [b, rho, sig](double x) {
        const double y = (b - rho * x) / sig;
        const double lr = (-0.5 * y * y - kLnSqrt2Pi) - detail::log_ncdf_raw(y);
        return -x - (rho / sig) * std::exp(lr);
    };

    double mode = a;
    if (gp(a) < 0.0) {
        double step = 1.0, xr = a, xl = a - step;
        while (gp(xl) < 0.0) {
            xr = xl;
            step *= 2.0;
            xl = a - step;
            if (step > 1e6) throw std::runtime_error("log_bvn_cdf_tail: mode bracket failed");
        }
        for (int it = 0; it < 80; ++it) {
            const double m = 0.5 * (xl + xr);
            (gp(m) < 0.0 ? xr : xl) = m;
        }
        mode = 0.5 * (xl + xr);
    }

    // Left cutoff: beyond g(mode) - 46 the integrand contributes < 1e-19 of
    // the total.
    const double gm = g(mode);
    double x_lo = mode;
    double step = 0.5;
    while (g(x_lo) > gm - 46.0) {
        x_lo -= step;
        step *= 2.0;
        if (step > 1e8) break;
    }

    const auto scaled = [&g, gm](double x) { return std::exp(g(x) - gm); };
    const double v = maxtail::detail::adaptive_gk15(scaled, x_lo, a, 1e-300, 5e-14);
    if (!(v > 0.0)) return LogProb::zero();
    return LogProb::from_log(std::min(gm + std::log(v), 0.0));
}

// h(w) = w exp(w^2/2) Phi(w): strictly increasing, h -> -1/sqrt(2 pi) as
// w -> -inf.  The exponent w^2/2 + ln Phi(w) nearly cancels for w << 0, so the
// deep-negative branch uses the Mills series directly:
//   h(w) = -(1/sqrt(2 pi)) (1 - 1/w^2 + 3/w^4 - 15/w^6 + ...).
// Overflows for w > ~37.5 (range error); any negative w is fine.
inline double mills_h(double w) {
    detail::require_finite(w, "mills_h");
    if (w > 37.5) throw std::range_error("mills_h: overflow for w > 37.5");
    if (w >= 0.0) return w * std::exp(0.5 * w * w) * normal_cdf(w);
    if (w >= -20.0) return w * std::exp(0.5 * w * w + detail::log_ncdf_raw(w));
    const double z = 1.0 / (w * w);
    const double series =
        1.0 +
        z * (-1.0 +
             z * (3.0 +
                  z * (-15.0 +
                       z * (105.0 +
                            z * (-945.0 + z * (10395.0 - z * 135135.0))))));
    return -kInvSqrt2Pi * series;
}

} // namespace maxtail::special
