#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "max_dependence.hpp"

namespace maxtail {

// Lower-tail index estimation along the diagonal and along the traced path
// of maximal dependence, from section levels u_max down to u_min:
//   lambda: C/u               (limit is the classical tail-dependence index)
//   chi:    2 ln u / ln C - 1
//   kappa:  secant slope of ln C against ln u (tail-order estimate)

struct GridSpec {
    double u_max = 0.1;
    double u_min = 1e-6;
    int points = 15;
};

inline double default_u_min(const CopulaSpec& spec) {
    // The Gaussian's slowly varying factor decays like 1/ln u; it needs a
    // deeper grid than the families with exact power tails.
    return std::holds_alternative<Gaussian>(spec) ? 1e-8 : 1e-6;
}

inline std::vector<double> make_u_grid(const GridSpec& grid) {
    if (!(grid.u_max > 0.0) || !(grid.u_max < 1.0) || !(grid.u_min > 0.0) ||
        !(grid.u_min < grid.u_max))
        throw std::invalid_argument("make_u_grid: need 0 < u_min < u_max < 1");
    if (grid.points < 3) throw std::invalid_argument("make_u_grid: need at least 3 points");
    std::vector<double> us(grid.points);
    const double step = std::log(grid.u_min / grid.u_max) / (grid.points - 1);
    for (int i = 0; i < grid.points; ++i)
        us[i] = i == 0 ? grid.u_max
                       : (i == grid.points - 1 ? grid.u_min : grid.u_max * std::exp(i * step));
    return us;
}

// One estimate trajectory over the grid.  Entries that cannot be formed are
// NaN; `estimate` is the deepest finite entry and `flagged` records that
// something degenerate (an exact zero or one, a non-finite log) was hit.
struct EstimateTrajectory {
    std::vector<double> values;
    double estimate;
    bool flagged;
};

namespace detail {

inline EstimateTrajectory finish_trajectory(std::vector<double> values, bool flagged) {
    double est = std::numeric_limits<double>::quiet_NaN();
    for (double v : values)
        if (std::isfinite(v)) est = v;
    return {std::move(values), est, flagged};
}

} // namespace detail

inline EstimateTrajectory lambda_estimate(const std::vector<double>& u_grid,
                                          const std::vector<double>& cdf_values) {
    if (u_grid.size() != cdf_values.size() || u_grid.empty())
        throw std::invalid_argument("lambda_estimate: mismatched inputs");
    std::vector<double> vals(u_grid.size());
    bool flagged = false;
    for (std::size_t i = 0; i < u_grid.size(); ++i) {
        vals[i] = cdf_values[i] / u_grid[i];
        if (cdf_values[i] == 0.0) flagged = true;
    }
    return detail::finish_trajectory(std::move(vals), flagged);
}

inline EstimateTrajectory chi_estimate(const std::vector<double>& u_grid,
                                       const std::vector<double>& log_cdf_values) {
    if (u_grid.size() != log_cdf_values.size() || u_grid.empty())
        throw std::invalid_argument("chi_estimate: mismatched inputs");
    std::vector<double> vals(u_grid.size());
    bool flagged = false;
    for (std::size_t i = 0; i < u_grid.size(); ++i) {
        const double lc = log_cdf_values[i];
        if (lc == 0.0 || std::isnan(lc)) { // C = 1 makes the ratio meaningless
            vals[i] = std::numeric_limits<double>::quiet_NaN();
            flagged = true;
            continue;
        }
        vals[i] = 2.0 * std::log(u_grid[i]) / lc - 1.0;
    }
    return detail::finish_trajectory(std::move(vals), flagged);
}

// Secant slopes between adjacent grid points; entry j covers the pair
// (u_j, u_{j+1}), so the trajectory is one shorter than the grid.
inline EstimateTrajectory kappa_estimate(const std::vector<double>& u_grid,
                                         const std::vector<double>& log_cdf_values) {
    if (u_grid.size() != log_cdf_values.size())
        throw std::invalid_argument("kappa_estimate: mismatched inputs");
    if (u_grid.size() < 3)
        throw std::invalid_argument("kappa_estimate: need at least 3 grid points");
    std::vector<double> vals(u_grid.size() - 1);
    bool flagged = false;
    for (std::size_t j = 0; j + 1 < u_grid.size(); ++j) {
        const double dl = log_cdf_values[j + 1] - log_cdf_values[j];
        const double du = std::log(u_grid[j + 1]) - std::log(u_grid[j]);
        vals[j] = dl / du;
        if (!std::isfinite(vals[j])) {
            vals[j] = std::numeric_limits<double>::quiet_NaN();
            flagged = true;
        }
    }
    return detail::finish_trajectory(std::move(vals), flagged);
}

struct ConvergenceDeltas {
    double lambda_diag, lambda_star;
    double chi_diag, chi_star;
    double kappa_diag, kappa_star;
};

struct IndexReport {
    std::string copula; // canonical textual form
    std::vector<double> u_grid;
    std::vector<double> log_diag;     // ln C(u, u)
    std::vector<SectionMax> path;     // maximal-dependence samples, ln Pi* inside
    EstimateTrajectory lambda_diag, lambda_star;
    EstimateTrajectory chi_diag, chi_star;
    EstimateTrajectory kappa_diag, kappa_star;
    ConvergenceDeltas deltas; // |last - previous| per trajectory, NaN when undefined
};

namespace detail {

inline double last_delta(const EstimateTrajectory& t) {
    double prev = std::numeric_limits<double>::quiet_NaN();
    double last = std::numeric_limits<double>::quiet_NaN();
    for (double v : t.values) {
        if (!std::isfinite(v)) continue;
        prev = last;
        last = v;
    }
    return std::fabs(last - prev);
}

} // namespace detail

inline IndexReport index_report(const CopulaSpec& spec, const GridSpec& grid,
                                const SolverOptions& opts = {}) {
    IndexReport rep;
    rep.copula = format_copula(spec);
    rep.u_grid = make_u_grid(grid);
    rep.path = trace_max_path(spec, rep.u_grid, opts);

    const std::size_t n = rep.u_grid.size();
    rep.log_diag.resize(n);
    std::vector<double> diag_lin(n), star_lin(n), log_star(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rep.u_grid[i];
        const LogProb lp = log_cdf(spec, u, u);
        rep.log_diag[i] = lp.is_zero() ? -std::numeric_limits<double>::infinity() : lp.log();
        diag_lin[i] = lp.linear();
        log_star[i] = rep.path[i].log_pi_star;
        star_lin[i] = rep.path[i].pi_star;
    }

    rep.lambda_diag = lambda_estimate(rep.u_grid, diag_lin);
    rep.lambda_star = lambda_estimate(rep.u_grid, star_lin);
    rep.chi_diag = chi_estimate(rep.u_grid, rep.log_diag);
    rep.chi_star = chi_estimate(rep.u_grid, log_star);
    rep.kappa_diag = kappa_estimate(rep.u_grid, rep.log_diag);
    rep.kappa_star = kappa_estimate(rep.u_grid, log_star);

    rep.deltas = {detail::last_delta(rep.lambda_diag), detail::last_delta(rep.lambda_star),
                  detail::last_delta(rep.chi_diag),    detail::last_delta(rep.chi_star),
                  detail::last_delta(rep.kappa_diag),  detail::last_delta(rep.kappa_star)};
    return rep;
}

} // namespace maxtail
