#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "maxtail/copulas.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace maxtail;

namespace {

std::vector<CopulaSpec> all_specs() {
    return {
        CopulaSpec{Independence{}},
        CopulaSpec{NelsenEx33{0.25}},
        CopulaSpec{NelsenEx33{0.81}},
        CopulaSpec{MarshallOlkin{0.3, 0.6}},
        CopulaSpec{MarshallOlkin{0.5, 0.5}},
        CopulaSpec{Gaussian{0.5}},
        CopulaSpec{Gaussian{-0.4}},
        CopulaSpec{EvcMixture{PickandsParams{0.3, 0.9, 0.2}}},
    };
}

const std::vector<double> kGrid = {0.0, 0.05, 0.2, 0.5, 0.8, 0.95, 1.0};

} // namespace

TEST_CASE("copula boundary conditions hold for every family") {
    for (const auto& spec : all_specs()) {
        CAPTURE(format_copula(spec));
        for (double t : kGrid) {
            CHECK_THAT(cdf(spec, t, 1.0), WithinAbs(t, 1e-13));
            CHECK_THAT(cdf(spec, 1.0, t), WithinAbs(t, 1e-13));
            CHECK(cdf(spec, t, 0.0) == 0.0);
            CHECK(cdf(spec, 0.0, t) == 0.0);
        }
    }
}

TEST_CASE("copulas respect Frechet bounds and rectangle positivity") {
    for (const auto& spec : all_specs()) {
        CAPTURE(format_copula(spec));
        for (double u : kGrid) {
            for (double v : kGrid) {
                const double c = cdf(spec, u, v);
                CHECK(c >= std::max(u + v - 1.0, 0.0) - 1e-12);
                CHECK(c <= std::min(u, v) + 1e-12);
            }
        }
        for (std::size_t i = 0; i + 1 < kGrid.size(); ++i) {
            for (std::size_t j = 0; j + 1 < kGrid.size(); ++j) {
                const double mass = cdf(spec, kGrid[i + 1], kGrid[j + 1]) -
                                    cdf(spec, kGrid[i], kGrid[j + 1]) -
                                    cdf(spec, kGrid[i + 1], kGrid[j]) +
                                    cdf(spec, kGrid[i], kGrid[j]);
                CAPTURE(kGrid[i], kGrid[j]);
                CHECK(mass >= -1e-12);
            }
        }
    }
}

TEST_CASE("log cdf agrees with the linear cdf") {
    for (const auto& spec : all_specs()) {
        CAPTURE(format_copula(spec));
        for (double u : {0.03, 0.2, 0.7}) {
            for (double v : {0.05, 0.4, 0.9}) {
                const double lin = cdf(spec, u, v);
                const LogProb lp = log_cdf(spec, u, v);
                if (lin == 0.0) {
                    CHECK(lp.is_zero());
                } else {
                    CHECK_THAT(std::exp(lp.log()), WithinRel(lin, 1e-10));
                }
            }
        }
        // deep tail: the log form must stay finite where the linear one underflows
        const LogProb tail = log_cdf(spec, 1e-200, 1e-200);
        CHECK((tail.is_zero() || std::isfinite(tail.log())));
    }
}

TEST_CASE("three-branch copula follows its piecewise definition") {
    const double theta = 0.25;
    const CopulaSpec spec{NelsenEx33{theta}};
    // branch interiors
    CHECK(cdf(spec, 0.1, 0.8) == 0.1);                    // u <= theta v
    CHECK(cdf(spec, 0.3, 0.8) == theta * 0.8);            // theta v < u < 1-(1-theta)v
    CHECK_THAT(cdf(spec, 0.95, 0.8), WithinRel(0.95 + 0.8 - 1.0, 1e-12));
    // continuity across both kinks
    for (double v : {0.2, 0.5, 0.9}) {
        const double k1 = theta * v, k2 = 1.0 - (1.0 - theta) * v;
        const double eps = 1e-9;
        CHECK_THAT(cdf(spec, k1 - eps, v), WithinAbs(cdf(spec, k1 + eps, v), 3e-9));
        CHECK_THAT(cdf(spec, k2 - eps, v), WithinAbs(cdf(spec, k2 + eps, v), 3e-9));
    }
    // small-u diagonal sits on the middle branch
    for (double u : {1e-2, 1e-4, 1e-8}) CHECK(cdf(spec, u, u) == theta * u);
    // theta = 0 collapses to the lower Frechet bound
    const CopulaSpec w{NelsenEx33{0.0}};
    CHECK(cdf(w, 0.3, 0.4) == 0.0);
    CHECK_THAT(cdf(w, 0.8, 0.7), WithinRel(0.5, 1e-12));
}

TEST_CASE("min-stable two-parameter copula") {
    const CopulaSpec spec{MarshallOlkin{0.3, 0.6}};
    for (double u : {0.1, 0.5, 0.9}) {
        for (double v : {0.2, 0.7}) {
            const double expected =
                std::min(std::pow(u, 0.7) * v, u * std::pow(v, 0.4));
            CHECK_THAT(cdf(spec, u, v), WithinRel(expected, 1e-14));
        }
    }
    // swapping parameters mirrors the arguments
    const CopulaSpec swapped{MarshallOlkin{0.6, 0.3}};
    for (double u : {0.15, 0.6}) {
        for (double v : {0.35, 0.85}) {
            CHECK_THAT(cdf(spec, u, v), WithinRel(cdf(swapped, v, u), 1e-14));
        }
    }
    // a = b = 0 degenerates to independence
    const CopulaSpec indep{MarshallOlkin{0.0, 0.0}};
    CHECK(cdf(indep, 0.3, 0.7) == 0.3 * 0.7);
}

TEST_CASE("gaussian copula closed-form diagonal value") {
    for (double rho : {-0.8, -0.3, 0.0, 0.5, 0.9}) {
        const double expected = 0.25 + std::asin(rho) / (2.0 * M_PI);
        CHECK_THAT(cdf(CopulaSpec{Gaussian{rho}}, 0.5, 0.5), WithinAbs(expected, 1e-12));
    }
}

TEST_CASE("dependence-function mixture copula") {
    const PickandsParams p{0.3, 0.9, 0.2};
    const EvcMixture mix{p};
    const CopulaSpec spec{mix};
    CHECK_THAT(cdf(spec, 0.05, 0.05), WithinRel(0.0045270623709380034, 1e-10));
    CHECK_THAT(cdf(spec, 0.01, 0.01), WithinRel(0.000249125937, 5e-9));
    // the mixture is exchangeable even though each component is not
    for (double u : {0.1, 0.4}) {
        for (double v : {0.25, 0.7}) {
            CHECK_THAT(cdf(spec, u, v), WithinRel(cdf(spec, v, u), 1e-14));
            CHECK(evc_mixture_cdf(mix, u, v) == cdf(spec, u, v));
        }
    }
    // dependence function endpoints pin the marginals
    CHECK_THAT(pickands(p, 0.0), WithinRel(1.0, 1e-15));
    CHECK_THAT(pickands(p, 1.0), WithinRel(1.0, 1e-15));
    CHECK_THAT(pickands(p, 0.5), WithinRel(0.9008952637, 1e-9));
}

TEST_CASE("diagonal convexity margin of the mixture section") {
    const EvcMixture mix{PickandsParams{0.3, 0.9, 0.2}};
    CHECK_THAT(mixture_diagonal_convexity_margin(mix, 0.01),
               WithinRel(0.0080857542883450133, 1e-4));
    CHECK_THAT(mixture_diagonal_convexity_margin(mix, 0.001),
               WithinRel(0.0037981076617121796, 1e-4));
    CHECK_THAT(mixture_diagonal_convexity_margin(mix, 1e-4),
               WithinRel(0.0010172114886519699, 1e-4));
    CHECK_THROWS_AS(mixture_diagonal_convexity_margin(mix, 0.0), std::domain_error);
    CHECK_THROWS_AS(mixture_diagonal_convexity_margin(mix, 1.0), std::domain_error);
}

TEST_CASE("conditional distribution given the first argument") {
    // independence: exactly v, no kink flag
    const auto ind = conditional_2_given_1(CopulaSpec{Independence{}}, 0.37, 0.5);
    CHECK(ind.value == 0.37);
    CHECK_FALSE(ind.near_kink);

    // gaussian: analytic form against an independent finite difference
    const CopulaSpec g{Gaussian{0.6}};
    for (double u : {0.2, 0.5, 0.8}) {
        for (double v : {0.3, 0.7}) {
            const double h = 1e-5;
            const double fd = (cdf(g, u + h, v) - cdf(g, u - h, v)) / (2.0 * h);
            CHECK_THAT(conditional_2_given_1(g, v, u).value, WithinAbs(fd, 1e-6));
        }
    }

    // min-stable family: exact one-sided derivative at the kink, flagged
    const CopulaSpec mo{MarshallOlkin{0.3, 0.6}};
    const auto at_kink = conditional_2_given_1(mo, 0.5, 0.25); // kink at u = v^(b/a) = 0.25
    CHECK(at_kink.near_kink);
    CHECK_THAT(at_kink.value, WithinRel(0.53050079829031205, 1e-9));

    // middle branch of the three-branch family is flat in u: at v = 0.5 the
    // branch spans u in (0.125, 0.625)
    const auto flat = conditional_2_given_1(CopulaSpec{NelsenEx33{0.25}}, 0.5, 0.3);
    CHECK_THAT(flat.value, WithinAbs(0.0, 1e-9));

    // v boundary shortcuts
    CHECK(conditional_2_given_1(g, 0.0, 0.4).value == 0.0);
    CHECK(conditional_2_given_1(g, 1.0, 0.4).value == 1.0);
    CHECK_THROWS_AS(conditional_2_given_1(g, 0.5, 0.0), std::domain_error);
}

TEST_CASE("parameter validation raises immediately") {
    CHECK_THROWS_AS(NelsenEx33{1.5}, std::invalid_argument);
    CHECK_THROWS_AS(NelsenEx33{-0.1}, std::invalid_argument);
    CHECK_THROWS_AS((MarshallOlkin{1.2, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(Gaussian{1.0}, std::invalid_argument);
    CHECK_THROWS_AS(Gaussian{-1.0}, std::invalid_argument);
    CHECK_THROWS_AS((PickandsParams{0.0, 0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS((PickandsParams{0.5, 1.2, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(cdf(CopulaSpec{Independence{}}, -0.1, 0.5), std::domain_error);
    CHECK_THROWS_AS(cdf(CopulaSpec{Independence{}}, 0.5, 1.1), std::domain_error);
}

TEST_CASE("copula text form parses and round-trips") {
    const auto round = [](const std::string& s) { return format_copula(parse_copula(s)); };
    CHECK(round("indep") == "indep");
    CHECK(round("gaussian:rho=0.5") == "gaussian:rho=0.5");
    CHECK(round("nelsen33:theta=0.25") == "nelsen33:theta=0.25");
    CHECK(round("mo:b=0.6,a=0.3") == "mo:a=0.29999999999999999,b=0.59999999999999998");
    CHECK(round("evcmix:s=0.3,psi1=0.9,psi2=0.2") ==
          "evcmix:s=0.29999999999999999,psi1=0.90000000000000002,psi2=0.20000000000000001");
    CHECK_THROWS_AS(parse_copula(" gaussian : rho = 0.5 "), std::invalid_argument);
    // canonical text reparses to the same spec
    for (const auto& spec : all_specs()) {
        CHECK(format_copula(parse_copula(format_copula(spec))) == format_copula(spec));
    }
    CHECK_THROWS_AS(parse_copula("gauss:rho=0.5"), std::invalid_argument);
    CHECK_THROWS_AS(parse_copula("gaussian"), std::invalid_argument);
    CHECK_THROWS_AS(parse_copula("gaussian:rho=0.5,rho=0.6"), std::invalid_argument);
    CHECK_THROWS_AS(parse_copula("gaussian:rho=abc"), std::invalid_argument);
    CHECK_THROWS_AS(parse_copula("gaussian:rho=0.5,extra=1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_copula("mo:a=0.3"), std::invalid_argument);
    CHECK_THROWS_AS(parse_copula("indep:x=1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_copula(""), std::invalid_argument);
    CHECK_THROWS_AS(parse_copula("gaussian:rho=2"), std::invalid_argument);
}
