#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "copulas.hpp"

namespace maxtail {

// Section of the copula at level u: the values C(x, u^2/x) for x in [u^2, 1].
// Maximizing it over x gives one point of the path of maximal dependence.

struct SolverOptions {
    int scan_points = 512;  // initial log-spaced scan resolution
    double xtol = 1e-10;    // golden-section bracket tolerance (relative, in ln x)
    int refine_iters = 200; // hard cap on golden-section iterations per basin
};

struct SectionMax {
    double u;
    double x_star;
    double psi_star; // u^2 / x_star, the second path coordinate
    double pi_star;  // section value at x_star
    double log_pi_star;
    bool boundary;   // maximum within one scan cell of an endpoint
    bool multimodal; // two or more distinct interior maxima tie within 1e-10 in log
};

namespace detail {

inline void require_section_domain(double u, double x, const char* who) {
    if (!(u > 0.0) || !(u < 1.0))
        throw std::domain_error(std::string(who) + ": u must lie in (0, 1)");
    if (!(x >= u * u) || x > 1.0)
        throw std::domain_error(std::string(who) + ": x outside [u^2, 1]");
}

inline double section_psi(double u, double x) {
    if (x == u * u) return 1.0; // keep the left endpoint exact
    return std::min(u * u / x, 1.0);
}

} // namespace detail

inline double section_value(const CopulaSpec& spec, double u, double x) {
    detail::require_section_domain(u, x, "section_value");
    return cdf(spec, x, detail::section_psi(u, x));
}

// ln of the section value.  The Gaussian switches to the log-domain tail
// integrator once u is small enough that linear quadrature would lose
// relative accuracy; the other families have exact log forms throughout.
inline LogProb section_log_value(const CopulaSpec& spec, double u, double x) {
    detail::require_section_domain(u, x, "section_log_value");
    const double psi = detail::section_psi(u, x);
    if (const auto* g = std::get_if<Gaussian>(&spec)) {
        if (u > 1e-5 && psi < 1.0 && x < 1.0) {
            const double v = special::bvn_cdf(special::normal_quantile(x),
                                              special::normal_quantile(psi), g->rho);
            return LogProb::from_linear(std::min(v, 1.0));
        }
    }
    return log_cdf(spec, x, psi);
}

namespace detail {

struct SectionObjective {
    const CopulaSpec& spec;
    double u;
    double t_lo;
    double x_lo;

    double operator()(double t) const {
        // exp(ln x_lo) can land one ulp off the endpoint; keep it exact so
        // endpoint evaluations take the quadrature-free shortcut.
        const double x = t <= t_lo ? x_lo : std::min(std::exp(t), 1.0);
        const LogProb lp = section_log_value(spec, u, x);
        return lp.is_zero() ? -std::numeric_limits<double>::infinity() : lp.log();
    }
};

// Golden-section maximization on [a, b]; assumes a single peak inside.
inline double golden_max(const SectionObjective& f, double a, double b, double tol,
                         int max_iters) {
    constexpr double invphi = 0.6180339887498948482;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    int it = 0;
    while (b - a > tol && it++ < max_iters) {
        if (f1 >= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    return f1 >= f2 ? x1 : x2;
}

// One least-squares parabola pass over 9 equispaced samples centred at t.
// Returns the vertex estimate, or t unchanged when the fit is not concave or
// (when guarded) does not improve the objective.  Guarding protects kinked
// sections, where a parabola across the corner extrapolates nonsense.
inline double parabola_polish(const SectionObjective& f, double t, double delta, double t_lo,
                              double t_hi, bool guarded) {
    if (t_hi - t_lo < 8.0 * delta) return t;
    double c = std::clamp(t, t_lo + 4.0 * delta, t_hi - 4.0 * delta);
    double y[9];
    for (int k = -4; k <= 4; ++k) y[k + 4] = f(c + k * delta);
    double sy = 0.0, sky = 0.0, sk2y = 0.0;
    for (int k = -4; k <= 4; ++k) {
        sy += y[k + 4];
        sky += k * y[k + 4];
        sk2y += static_cast<double>(k) * k * y[k + 4];
    }
    // fit y ~ a0 + a1 k + a2 k^2 over k = -4..4 (sum k^2 = 60, sum k^4 = 708)
    const double a2 = (9.0 * sk2y - 60.0 * sy) / 2772.0;
    const double a1 = sky / 60.0;
    if (!(a2 < 0.0)) return t;
    double kstar = -a1 / (2.0 * a2);
    kstar = std::clamp(kstar, -6.0, 6.0);
    const double cand = std::clamp(c + kstar * delta, t_lo, t_hi);
    if (guarded && f(cand) < f(t)) return t;
    return cand;
}

} // namespace detail

inline SectionMax maximize_section(const CopulaSpec& spec, double u,
                                   const SolverOptions& opts = {}) {
    if (!(u > 0.0) || !(u < 1.0))
        throw std::domain_error("maximize_section: u must lie in (0, 1)");
    if (opts.scan_points < 16)
        throw std::invalid_argument("maximize_section: scan_points must be >= 16");

    const double x_lo = u * u;
    const double t_lo = std::log(x_lo);
    const double t_hi = 0.0;
    const int n = opts.scan_points;
    const double cell = (t_hi - t_lo) / (n - 1);

    detail::SectionObjective obj{spec, u, t_lo, x_lo};

    std::vector<double> ts(n), gs(n);
    for (int i = 0; i < n; ++i) {
        ts[i] = i == 0 ? t_lo : (i == n - 1 ? t_hi : t_lo + i * cell);
        gs[i] = obj(ts[i]);
    }

    const double gmax = *std::max_element(gs.begin(), gs.end());
    const double gmin = *std::min_element(gs.begin(), gs.end());

    // Constant section: every admissible path is maximal; report the diagonal.
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (gmax - gmin <= 64.0 * eps * std::max(1.0, std::fabs(gmax))) {
        const double pi = cdf(spec, u, u);
        return {u, u, u, pi, log_cdf(spec, u, u).log(), false, false};
    }

    // Refine every scan-local maximum, then merge refined candidates that
    // landed in the same place.
    std::vector<double> cand_t, cand_g;
    for (int i = 0; i < n; ++i) {
        const bool left_ok = i == 0 || gs[i] >= gs[i - 1];
        const bool right_ok = i == n - 1 || gs[i] >= gs[i + 1];
        if (!(left_ok && right_ok)) continue;
        if (i == 0 || i == n - 1) {
            // An endpoint basin contributes the endpoint itself.  Its value
            // is quadrature-free, so exact ties between the two boundary
            // maxima (the negative-rho Gaussian) resolve deterministically;
            // anything sharper sits within one scan cell and is flagged as a
            // boundary hit regardless.
            cand_t.push_back(ts[i]);
            cand_g.push_back(gs[i]);
            continue;
        }
        const double a = ts[i - 1];
        const double b = ts[i + 1];
        const double tol = opts.xtol * std::max(1.0, std::fabs(ts[i]));
        double th = detail::golden_max(obj, a, b, tol, opts.refine_iters);

        if (th > t_lo + cell && th < t_hi - cell) {
            // Golden section is limited by value noise near a smooth peak;
            // two parabola passes recover the argmax well below that floor.
            const bool kinked = std::holds_alternative<NelsenEx33>(spec) ||
                                std::holds_alternative<MarshallOlkin>(spec);
            th = detail::parabola_polish(obj, th, 1e-3, t_lo, t_hi, kinked);
            th = detail::parabola_polish(obj, th, 1e-4, t_lo, t_hi, kinked);
        } else {
            // Endpoint basin: snap, so exact ties between the two boundary
            // values resolve deterministically.
            if (th - t_lo <= 8.0 * tol) th = t_lo;
            if (t_hi - th <= 8.0 * tol) th = t_hi;
        }

        cand_t.push_back(th);
        cand_g.push_back(obj(th));
    }

    std::vector<std::pair<double, double>> clusters; // (t, g), t ascending
    std::vector<std::size_t> order(cand_t.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&cand_t](std::size_t a, std::size_t b) { return cand_t[a] < cand_t[b]; });
    for (std::size_t i : order) {
        if (!clusters.empty() && cand_t[i] - clusters.back().first < 1e-3) {
            if (cand_g[i] > clusters.back().second) clusters.back() = {cand_t[i], cand_g[i]};
        } else {
            clusters.emplace_back(cand_t[i], cand_g[i]);
        }
    }

    double best_g = -std::numeric_limits<double>::infinity();
    for (const auto& c : clusters) best_g = std::max(best_g, c.second);

    // Co-maximal clusters tie within 1e-10 in log; the smallest x wins, and
    // two or more interior ties mark the section as multimodal.
    double t_star = 0.0;
    bool found = false;
    int interior_ties = 0;
    for (const auto& c : clusters) {
        if (c.second >= best_g - 1e-10) {
            const bool interior = c.first > t_lo + cell && c.first < t_hi - cell;
            if (interior) ++interior_ties;
            if (!found) {
                t_star = c.first;
                found = true;
            }
        }
    }
    const bool multimodal = interior_ties >= 2;
    const bool boundary = t_star <= t_lo + cell || t_star >= t_hi - cell;

    double x_star = std::clamp(std::exp(t_star), x_lo, 1.0);
    if (t_star == t_lo) x_star = x_lo; // exp/log round trip must not leave the domain

    const double log_pi = obj(t_star);
    // On an exact endpoint the copula shortcuts give the value without
    // quadrature; elsewhere exp of the log value keeps tail accuracy.
    const double pi = (x_star == x_lo || x_star == 1.0) ? section_value(spec, u, x_star)
                                                        : std::exp(log_pi);
    return {u,      x_star,   detail::section_psi(u, x_star), pi, log_pi,
            boundary, multimodal};
}

inline std::vector<SectionMax> trace_max_path(const CopulaSpec& spec,
                                              const std::vector<double>& u_grid,
                                              const SolverOptions& opts = {}) {
    if (u_grid.size() < 2)
        throw std::invalid_argument("trace_max_path: need at least two section levels");
    for (std::size_t i = 0; i < u_grid.size(); ++i) {
        if (!(u_grid[i] > 0.0) || !(u_grid[i] < 1.0))
            throw std::invalid_argument("trace_max_path: levels must lie in (0, 1)");
        if (i > 0 && !(u_grid[i] < u_grid[i - 1]))
            throw std::invalid_argument("trace_max_path: levels must decrease strictly");
    }
    std::vector<SectionMax> out;
    out.reserve(u_grid.size());
    for (double u : u_grid) {
        try {
            out.push_back(maximize_section(spec, u, opts));
        } catch (const std::exception& e) {
            throw std::runtime_error("trace_max_path: at u = " + std::to_string(u) + ": " +
                                     e.what());
        }
    }
    return out;
}

// Finite-sample admissibility diagnostics for a traced path:
//   C1: every x_star lies in [u^2, 1];
//   C2: both coordinates head to 0, checked as nonincreasing tails (relative
//       slack 1e-9) with strict overall decrease across the last
//       min(5, n) samples.
// A path pinned to the boundary (e.g. x_star = u^2, so psi_star = 1
// throughout) fails C2: its second coordinate never decays.
struct AdmissibilityReport {
    bool pass;
    std::vector<double> c1_violations; // u values with x_star outside [u^2, 1]
    std::vector<std::string> c2_violations;
    int boundary_points;
};

inline AdmissibilityReport admissibility_check(const std::vector<SectionMax>& path) {
    if (path.size() < 2)
        throw std::invalid_argument("admissibility_check: need at least two samples");
    AdmissibilityReport rep{true, {}, {}, 0};
    for (const auto& s : path) {
        if (s.boundary) ++rep.boundary_points;
        if (!(s.x_star >= s.u * s.u) || s.x_star > 1.0) rep.c1_violations.push_back(s.u);
    }

    const std::size_t k = std::min<std::size_t>(5, path.size());
    const std::size_t first = path.size() - k;
    const auto check_decay = [&](auto get, const char* name) {
        for (std::size_t i = first + 1; i < path.size(); ++i) {
            const double prev = get(path[i - 1]), cur = get(path[i]);
            if (cur > prev * (1.0 + 1e-9))
                rep.c2_violations.push_back(std::string(name) + " increases at u = " +
                                            std::to_string(path[i].u));
        }
        if (!(get(path.back()) < get(path[first]) * (1.0 - 1e-9)))
            rep.c2_violations.push_back(std::string(name) +
                                        " shows no strict decrease over the tail");
    };
    check_decay([](const SectionMax& s) { return s.x_star; }, "x_star");
    check_decay([](const SectionMax& s) { return s.psi_star; }, "psi_star");

    rep.pass = rep.c1_violations.empty() && rep.c2_violations.empty();
    return rep;
}

// Signed log-residual of the Gaussian critical-point equation at (u, x):
//   lhs = x Phi((qn(u^2/x) - rho qn(x)) / sigma)
//   rhs = (u^2/x) Phi((qn(x) - rho qn(u^2/x)) / sigma),    sigma^2 = 1 - rho^2,
// returned as ln(lhs) - ln(rhs), which has the sign of x dPi/dx and never
// underflows.  For rho in (0, 1) the sign changes + to - exactly once on
// (u^2, 1), at x = u.
inline double critical_residual_gaussian(const Gaussian& g, double u, double x) {
    if (!(u > 0.0) || !(u < 1.0))
        throw std::domain_error("critical_residual_gaussian: u must lie in (0, 1)");
    if (!(x > u * u) || !(x < 1.0))
        throw std::domain_error("critical_residual_gaussian: x outside (u^2, 1)");
    if (g.rho == 0.0) return 0.0; // both sides reduce to u^2

    const double psi = u * u / x;
    const double w = special::normal_quantile(x);
    const double q = special::normal_quantile(std::min(psi, 1.0));
    const double sig = std::sqrt((1.0 - g.rho) * (1.0 + g.rho));
    const double lhs = std::log(x) + special::log_normal_cdf((q - g.rho * w) / sig).log();
    const double rhs = std::log(psi) + special::log_normal_cdf((w - g.rho * q) / sig).log();
    return lhs - rhs;
}

} // namespace maxtail
