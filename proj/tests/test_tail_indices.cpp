#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "maxtail/tail_indices.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace maxtail;

TEST_CASE("geometric level grid") {
    const auto grid = make_u_grid({0.1, 1e-6, 6});
    REQUIRE(grid.size() == 6);
    CHECK(grid.front() == 0.1);
    CHECK(grid.back() == 1e-6);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        CHECK_THAT(grid[i + 1] / grid[i], WithinRel(0.1, 1e-12));
    }
    CHECK_THROWS_AS(make_u_grid({0.1, 1e-6, 2}), std::invalid_argument);
    CHECK_THROWS_AS(make_u_grid({1e-6, 0.1, 5}), std::invalid_argument);
    CHECK_THROWS_AS(make_u_grid({1.5, 1e-6, 5}), std::invalid_argument);
    CHECK_THROWS_AS(make_u_grid({0.1, 0.0, 5}), std::invalid_argument);
}

TEST_CASE("default grid floor is family dependent") {
    CHECK(default_u_min(CopulaSpec{Gaussian{0.5}}) == 1e-8);
    CHECK(default_u_min(CopulaSpec{Independence{}}) == 1e-6);
    CHECK(default_u_min(CopulaSpec{NelsenEx33{0.3}}) == 1e-6);
}

TEST_CASE("independence indices") {
    const auto rep = index_report(CopulaSpec{Independence{}}, {}, {});
    CHECK_THAT(rep.kappa_diag.estimate, WithinAbs(2.0, 1e-12));
    CHECK_THAT(rep.kappa_star.estimate, WithinAbs(2.0, 1e-12));
    CHECK_THAT(rep.chi_diag.estimate, WithinAbs(0.0, 1e-12));
    CHECK_THAT(rep.lambda_diag.estimate, WithinAbs(rep.u_grid.back(), 1e-15));
    CHECK_FALSE(rep.kappa_diag.flagged);
    CHECK(rep.copula == "indep");
}

TEST_CASE("three-branch family indices: diagonal and maximal path differ") {
    const double theta = 0.25;
    const auto rep = index_report(CopulaSpec{NelsenEx33{theta}}, {}, {});
    // both paths are tail dependent (kappa = 1) but with different constants
    CHECK_THAT(rep.kappa_diag.estimate, WithinAbs(1.0, 1e-9));
    CHECK_THAT(rep.kappa_star.estimate, WithinAbs(1.0, 1e-9));
    CHECK_THAT(rep.lambda_diag.estimate, WithinAbs(theta, 1e-12));
    CHECK_THAT(rep.lambda_star.estimate, WithinAbs(std::sqrt(theta), 1e-9));
    // secant trajectories line up with the grid: entry i spans (u[i-1], u[i])
    REQUIRE(rep.kappa_diag.values.size() == rep.u_grid.size() - 1);
    REQUIRE(rep.chi_diag.values.size() == rep.u_grid.size());
    CHECK(std::isfinite(rep.deltas.kappa_diag));
}

TEST_CASE("min-stable family indices recover both exponents") {
    SECTION("asymmetric parameters split the paths") {
        const auto rep = index_report(CopulaSpec{MarshallOlkin{0.3, 0.6}}, {}, {});
        CHECK_THAT(rep.kappa_diag.estimate, WithinAbs(1.7, 1e-6)); // 2 - min(a, b)
        CHECK_THAT(rep.kappa_star.estimate, WithinAbs(1.6, 1e-6)); // 2 - 2ab/(a+b)
    }
    SECTION("equal parameters keep the maximal path on the diagonal") {
        const auto rep = index_report(CopulaSpec{MarshallOlkin{0.5, 0.5}}, {}, {});
        CHECK_THAT(rep.kappa_diag.estimate, WithinAbs(1.5, 1e-6));
        CHECK_THAT(rep.kappa_star.estimate, WithinAbs(1.5, 1e-6));
    }
}

TEST_CASE("gaussian indices approach their limits slowly") {
    const double rho = 0.5;
    const CopulaSpec spec{Gaussian{rho}};
    const auto rep = index_report(spec, {0.1, default_u_min(spec), 15}, {});
    CHECK(rep.u_grid.back() == 1e-8);
    CHECK_THAT(rep.kappa_diag.estimate, WithinAbs(2.0 / (1.0 + rho), 0.05));
    CHECK_THAT(rep.kappa_star.estimate, WithinAbs(rep.kappa_diag.estimate, 1e-3));
    CHECK_THAT(rep.chi_diag.estimate, WithinAbs(rho, 0.1));
    CHECK(rep.lambda_diag.estimate < 1e-3); // no tail dependence in the limit
    // |chi - rho| keeps shrinking over the last five levels
    const auto& chi = rep.chi_diag.values;
    for (std::size_t i = chi.size() - 5; i + 1 < chi.size(); ++i) {
        CHECK(std::fabs(chi[i + 1] - rho) < std::fabs(chi[i] - rho));
    }
    CHECK_FALSE(rep.kappa_diag.flagged);
    CHECK_FALSE(rep.chi_star.flagged);
}

TEST_CASE("zero tail mass flags the estimators") {
    // theta = 0 gives C(u, u) = 0 near the corner
    const auto rep = index_report(CopulaSpec{NelsenEx33{0.0}}, {}, {});
    CHECK(rep.lambda_diag.flagged);
    CHECK(rep.kappa_diag.flagged);
    CHECK(std::isnan(rep.kappa_diag.estimate));
    // chi stays finite: log C = -inf drives the ratio to zero arithmetically
    CHECK_THAT(rep.chi_diag.estimate, WithinAbs(-1.0, 1e-12));
}

TEST_CASE("estimator input validation") {
    CHECK_THROWS_AS(lambda_estimate({0.1, 0.01}, {0.01}), std::invalid_argument);
    CHECK_THROWS_AS(kappa_estimate({0.1, 0.01}, {-1.0, -2.0}), std::invalid_argument);
    const auto lam = lambda_estimate({0.1, 0.01, 0.001}, {0.02, 0.002, 0.0002});
    CHECK_THAT(lam.estimate, WithinRel(0.2, 1e-12));
    CHECK_FALSE(lam.flagged);
}
