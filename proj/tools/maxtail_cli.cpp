// Command-line front end: evaluate copulas, estimate tail indices, trace
// paths of maximal dependence, and run the Gaussian verification battery.
// All data output is CSV on stdout (or --out), numbers as %.17g.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "maxtail/copulas.hpp"
#include "maxtail/csv.hpp"
#include "maxtail/level_curves.hpp"
#include "maxtail/max_dependence.hpp"
#include "maxtail/tail_indices.hpp"

namespace {

using maxtail::csv::field;
using maxtail::csv::num;

struct Output {
    std::ofstream file;
    std::ostream* os = &std::cout;

    void open(const std::string& path) {
        if (path.empty()) return;
        file.open(path);
        if (!file) throw std::runtime_error("cannot open output file: " + path);
        os = &file;
    }
    std::ostream& stream() { return *os; }
};

std::pair<std::string, std::string> split_family(const std::string& canonical) {
    const auto colon = canonical.find(':');
    if (colon == std::string::npos) return {canonical, ""};
    return {canonical.substr(0, colon), canonical.substr(colon + 1)};
}

std::string kappa_cell(const maxtail::EstimateTrajectory& t, std::size_t row) {
    return row == 0 ? std::string() : num(t.values[row - 1]);
}

void run_eval(const std::string& copula_text, double u, double v, const std::string& out_path) {
    const maxtail::CopulaSpec spec = maxtail::parse_copula(copula_text);
    const auto [family, params] = split_family(maxtail::format_copula(spec));
    Output out;
    out.open(out_path);
    out.stream() << "family,params,u,v,C\n"
                 << family << ',' << field(params) << ',' << num(u) << ',' << num(v) << ','
                 << num(maxtail::cdf(spec, u, v)) << '\n';
}

void run_indices(const std::string& copula_text, double u_max, std::optional<double> u_min,
                 int points, const maxtail::SolverOptions& opts, const std::string& out_path) {
    const maxtail::CopulaSpec spec = maxtail::parse_copula(copula_text);
    const maxtail::GridSpec grid{u_max, u_min.value_or(maxtail::default_u_min(spec)), points};
    const maxtail::IndexReport rep = maxtail::index_report(spec, grid, opts);

    Output out;
    out.open(out_path);
    auto& os = out.stream();
    os << "u,C_diag,Pi_star,lambda_diag,lambda_star,chi_diag,chi_star,"
          "kappa_secant_diag,kappa_secant_star\n";
    for (std::size_t i = 0; i < rep.u_grid.size(); ++i) {
        os << num(rep.u_grid[i]) << ',' << num(std::exp(rep.log_diag[i])) << ','
           << num(rep.path[i].pi_star) << ',' << num(rep.lambda_diag.values[i]) << ','
           << num(rep.lambda_star.values[i]) << ',' << num(rep.chi_diag.values[i]) << ','
           << num(rep.chi_star.values[i]) << ',' << kappa_cell(rep.kappa_diag, i) << ','
           << kappa_cell(rep.kappa_star, i) << '\n';
    }
    os << "summary,,," << num(rep.lambda_diag.estimate) << ',' << num(rep.lambda_star.estimate)
       << ',' << num(rep.chi_diag.estimate) << ',' << num(rep.chi_star.estimate) << ','
       << num(rep.kappa_diag.estimate) << ',' << num(rep.kappa_star.estimate) << '\n';
}

void run_path(const std::string& copula_text, double u_max, std::optional<double> u_min,
              int points, const maxtail::SolverOptions& opts, const std::string& out_path) {
    const maxtail::CopulaSpec spec = maxtail::parse_copula(copula_text);
    const maxtail::GridSpec grid{u_max, u_min.value_or(maxtail::default_u_min(spec)), points};
    const auto path = maxtail::trace_max_path(spec, maxtail::make_u_grid(grid), opts);
    const auto rep = maxtail::admissibility_check(path);

    Output out;
    out.open(out_path);
    auto& os = out.stream();
    os << "u,x_star,psi_star,pi_star,boundary,multimodal\n";
    for (const auto& s : path) {
        os << num(s.u) << ',' << num(s.x_star) << ',' << num(s.psi_star) << ','
           << num(s.pi_star) << ',' << (s.boundary ? 1 : 0) << ',' << (s.multimodal ? 1 : 0)
           << '\n';
    }
    os << "# admissibility: " << (rep.pass ? "PASS" : "FAIL")
       << " c1_violations=" << rep.c1_violations.size()
       << " c2_violations=" << rep.c2_violations.size()
       << " boundary_points=" << rep.boundary_points << '\n';
}

void run_geometry(double alpha, std::optional<double> beta, const std::vector<double>& thetas,
                  int resolution, const std::string& out_path) {
    if (beta.has_value() == !thetas.empty())
        throw std::invalid_argument("geometry: pass exactly one of --beta or --theta");
    Output out;
    out.open(out_path);
    auto& os = out.stream();
    if (beta) {
        const auto probe = maxtail::intersection_probe(alpha, *beta, resolution);
        os << "alpha,beta,n_intersections,w,z\n";
        if (probe.intersections.empty()) {
            os << num(alpha) << ',' << num(*beta) << ",0,,\n";
        }
        for (const auto& [w, z] : probe.intersections) {
            os << num(alpha) << ',' << num(*beta) << ',' << probe.intersections.size() << ','
               << num(w) << ',' << num(z) << '\n';
        }
    } else {
        os << "alpha,theta,r\n";
        for (double t : thetas)
            os << num(alpha) << ',' << num(t) << ','
               << num(maxtail::curve_polar_radius(alpha, t)) << '\n';
    }
}

struct VerifyRow {
    std::string check, params, observed;
    bool pass;
};

void verify_mills(std::vector<VerifyRow>& rows) {
    double min_delta = std::numeric_limits<double>::infinity();
    double prev = maxtail::special::mills_h(-10.0);
    const double step = 1e-5;
    for (long i = 1; i <= 2000000; ++i) {
        const double cur = maxtail::special::mills_h(-10.0 + i * step);
        min_delta = std::min(min_delta, cur - prev);
        prev = cur;
    }
    rows.push_back({"mills_monotone", "w=[-10,10],step=1e-05",
                    "min_delta=" + num(min_delta), min_delta >= 0.0});
}

void verify_diag_argmax(std::vector<VerifyRow>& rows, double rho, const std::vector<double>& us,
                        const maxtail::SolverOptions& opts) {
    const maxtail::Gaussian g{rho};
    for (double u : us) {
        const auto s = maxtail::maximize_section(maxtail::CopulaSpec{g}, u, opts);
        const double relerr = std::fabs(s.x_star - u) / u;
        const bool ok = relerr <= 1e-4 && !s.boundary && !s.multimodal;
        rows.push_back({"diag_argmax", "rho=" + num(rho) + ",u=" + num(u),
                        "relerr=" + num(relerr) + ";boundary=" + (s.boundary ? "1" : "0") +
                            ";multimodal=" + (s.multimodal ? "1" : "0"),
                        ok});
    }
}

void verify_neg_rho(std::vector<VerifyRow>& rows, double rho, std::vector<double> us,
                    const maxtail::SolverOptions& opts) {
    std::sort(us.begin(), us.end(), std::greater<>());
    const maxtail::Gaussian g{rho};
    const auto path = maxtail::trace_max_path(maxtail::CopulaSpec{g}, us, opts);
    const auto rep = maxtail::admissibility_check(path);
    const bool all_boundary = rep.boundary_points == static_cast<int>(path.size());
    rows.push_back({"neg_rho_boundary", "rho=" + num(rho),
                    "boundary_points=" + std::to_string(rep.boundary_points) + "/" +
                        std::to_string(path.size()) + ";admissible=" + (rep.pass ? "1" : "0"),
                    all_boundary && !rep.pass});
}

void verify_sign_scan(std::vector<VerifyRow>& rows, double rho, const std::vector<double>& us) {
    const maxtail::Gaussian g{rho};
    for (double u : us) {
        const double t_lo = std::log(u * u);
        const int n = 10000;
        int changes = 0;
        bool drop_at_u = false; // the single change must be + to - across x = u
        double prev = 0.0, prev_x = 0.0;
        for (int i = 0; i < n; ++i) {
            // keep strictly inside (u^2, 1)
            const double t = t_lo + (0.0 - t_lo) * (i + 0.5) / n;
            const double x = std::exp(t);
            const double r = maxtail::critical_residual_gaussian(g, u, x);
            if (i > 0 && ((prev > 0.0 && r <= 0.0) || (prev < 0.0 && r >= 0.0))) {
                ++changes;
                if (prev > 0.0 && prev_x <= u && x >= u) drop_at_u = true;
            }
            prev = r;
            prev_x = x;
        }
        rows.push_back({"critical_sign_scan", "rho=" + num(rho) + ",u=" + num(u),
                        "crossings=" + std::to_string(changes) +
                            ";drop_at_u=" + (drop_at_u ? "1" : "0"),
                        changes == 1 && drop_at_u});
    }
}

void verify_intersections(std::vector<VerifyRow>& rows, double rho,
                          const std::vector<double>& alphas) {
    const double beta = std::asin(rho);
    for (double alpha : alphas) {
        const auto probe = maxtail::intersection_probe(alpha, beta);
        double worst = 0.0;
        for (const auto& [w, z] : probe.intersections) {
            if (w == 0.0 && z == 0.0) continue; // origin satisfies the identity exactly
            const double wp = w * std::cos(beta) - z * std::sin(beta);
            const double zp = w * std::sin(beta) + z * std::cos(beta);
            const double resid = (maxtail::special::log_normal_cdf(w).log() +
                                  maxtail::special::log_normal_cdf(z).log()) -
                                 (maxtail::special::log_normal_cdf(wp).log() +
                                  maxtail::special::log_normal_cdf(zp).log());
            worst = std::max(worst, std::fabs(resid));
        }
        const bool ok = probe.intersections.size() == 1 && worst <= 1e-10;
        rows.push_back({"intersection", "rho=" + num(rho) + ",alpha=" + num(alpha),
                        "count=" + std::to_string(probe.intersections.size()) +
                            ";max_resid=" + num(worst),
                        ok});
    }
}

int run_verify_gaussian(std::vector<double> rhos, std::vector<double> us,
                        std::vector<double> alphas, const maxtail::SolverOptions& opts,
                        const std::string& out_path) {
    if (rhos.empty()) rhos = {0.1, 0.3, 0.5, 0.7, 0.9, -0.3, -0.6};
    if (us.empty()) us = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
    if (alphas.empty()) alphas = {0.05, 0.15, 0.25, 0.35, 0.45};

    std::vector<VerifyRow> rows;
    verify_mills(rows);
    for (double rho : rhos) {
        if (rho > 0.0) {
            verify_diag_argmax(rows, rho, us, opts);
            verify_sign_scan(rows, rho, us);
            verify_intersections(rows, rho, alphas);
        } else if (rho < 0.0) {
            verify_neg_rho(rows, rho, us, opts);
        }
    }

    Output out;
    out.open(out_path);
    auto& os = out.stream();
    os << "check,params,observed,status\n";
    bool all_pass = true;
    for (const auto& r : rows) {
        os << r.check << ',' << field(r.params) << ',' << field(r.observed) << ','
           << (r.pass ? "PASS" : "FAIL") << '\n';
        all_pass = all_pass && r.pass;
    }
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tail dependence of bivariate copulas along maximal-dependence paths"};
    app.require_subcommand(1);

    std::string copula_text, out_path;
    double u = 0.0, v = 0.0, u_max = 0.1, alpha = 0.0;
    std::optional<double> u_min, beta;
    int points = 15, resolution = 1000;
    maxtail::SolverOptions opts;
    std::vector<double> rhos, us, alphas, thetas;

    const auto add_grid = [&](CLI::App* cmd) {
        cmd->add_option("--umax", u_max, "largest section level")->capture_default_str();
        cmd->add_option("--umin", u_min, "smallest section level (default per family)");
        cmd->add_option("--points", points, "grid size")->capture_default_str();
    };
    const auto add_solver = [&](CLI::App* cmd) {
        cmd->add_option("--scan-points", opts.scan_points, "section scan resolution")
            ->capture_default_str();
        cmd->add_option("--xtol", opts.xtol, "section refinement tolerance")
            ->capture_default_str();
    };
    const auto add_out = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_path, "write CSV here instead of stdout");
    };

    auto* eval = app.add_subcommand("eval", "evaluate C(u, v) for one copula");
    eval->add_option("--copula", copula_text, "e.g. gaussian:rho=0.5")->required();
    eval->add_option("--u", u)->required();
    eval->add_option("--v", v)->required();
    add_out(eval);
    eval->callback([&] { run_eval(copula_text, u, v, out_path); });

    auto* indices = app.add_subcommand("indices", "tail index trajectories over a level grid");
    indices->add_option("--copula", copula_text)->required();
    add_grid(indices);
    add_solver(indices);
    add_out(indices);
    indices->callback([&] { run_indices(copula_text, u_max, u_min, points, opts, out_path); });

    auto* path = app.add_subcommand("path", "trace the path of maximal dependence");
    path->add_option("--copula", copula_text)->required();
    add_grid(path);
    add_solver(path);
    add_out(path);
    path->callback([&] { run_path(copula_text, u_max, u_min, points, opts, out_path); });

    auto* verify = app.add_subcommand("verify-gaussian",
                                      "check that the Gaussian maximal path is the diagonal");
    verify->add_option("--rho", rhos, "correlations (default 0.1..0.9 and -0.3, -0.6)");
    verify->add_option("--u", us, "section levels (default 1e-1..1e-5)");
    verify->add_option("--alpha", alphas, "level-curve heights (default 0.05..0.45)");
    add_solver(verify);
    add_out(verify);
    int verify_rc = 0;
    verify->callback(
        [&] { verify_rc = run_verify_gaussian(rhos, us, alphas, opts, out_path); });

    auto* geometry = app.add_subcommand("geometry", "level-curve radii and self-intersections");
    geometry->add_option("--alpha", alpha, "level-curve height")->required();
    geometry->add_option("--beta", beta, "rotation angle: probe r(t) = r(t + beta)");
    geometry->add_option("--theta", thetas, "ray angles: report the polar radius");
    geometry->add_option("--resolution", resolution, "probe scan cells")->capture_default_str();
    add_out(geometry);
    geometry->callback([&] { run_geometry(alpha, beta, thetas, resolution, out_path); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return verify_rc;
}
