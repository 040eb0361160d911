#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "log_prob.hpp"
#include "special_functions.hpp"

namespace maxtail {

// Pickands dependence function of the asymmetric logistic family:
//   A(t) = (1-psi1)(1-t) + (1-psi2)t + ((psi1(1-t))^{1/s} + (psi2 t)^{1/s})^s.
// s = 1 collapses to A == 1 (independence component); smaller s means
// stronger dependence.  A(0) = A(1) = 1 for any admissible parameters.
struct PickandsParams {
    double s;
    double psi1;
    double psi2;

    PickandsParams(double s_, double psi1_, double psi2_) : s(s_), psi1(psi1_), psi2(psi2_) {
        if (!(s > 0.0) || s > 1.0)
            throw std::invalid_argument("PickandsParams: s must lie in (0, 1]");
        if (!(psi1 >= 0.0) || psi1 > 1.0 || !(psi2 >= 0.0) || psi2 > 1.0)
            throw std::invalid_argument("PickandsParams: psi1, psi2 must lie in [0, 1]");
    }
};

inline double pickands(const PickandsParams& p, double t) {
    if (!(t >= 0.0) || t > 1.0) throw std::domain_error("pickands: t outside [0, 1]");
    const double lin = (1.0 - p.psi1) * (1.0 - t) + (1.0 - p.psi2) * t;
    const double q = 1.0 / p.s;
    return lin + std::pow(std::pow(p.psi1 * (1.0 - t), q) + std::pow(p.psi2 * t, q), p.s);
}

struct Independence {};

// Three-branch singular family: C(u,v) = u on {u <= theta v}, theta v on the
// middle wedge, u + v - 1 above.  Branch tests are first-match; the values
// agree on the seams, so the function is continuous.
struct NelsenEx33 {
    double theta;
    explicit NelsenEx33(double theta_) : theta(theta_) {
        if (!(theta >= 0.0) || theta > 1.0)
            throw std::invalid_argument("NelsenEx33: theta must lie in [0, 1]");
    }
};

// Marshall-Olkin: C(u,v) = min(u^{1-a} v, u v^{1-b}).
struct MarshallOlkin {
    double a;
    double b;
    MarshallOlkin(double a_, double b_) : a(a_), b(b_) {
        if (!(a >= 0.0) || a > 1.0 || !(b >= 0.0) || b > 1.0)
            throw std::invalid_argument("MarshallOlkin: a, b must lie in [0, 1]");
    }
};

struct Gaussian {
    double rho;
    explicit Gaussian(double rho_) : rho(rho_) {
        if (!(std::fabs(rho) < 1.0))
            throw std::invalid_argument("Gaussian: rho must lie in (-1, 1)");
    }
};

// Equal-weight mixture of the extreme-value copulas with Pickands functions
// A1 and its reflection A2(t) = A1(1-t).  Reflection makes the mixture
// exchangeable even when A1 is not symmetric.
struct EvcMixture {
    PickandsParams a1;
    explicit EvcMixture(PickandsParams a1_) : a1(a1_) {}
};

using CopulaSpec = std::variant<Independence, NelsenEx33, MarshallOlkin, Gaussian, EvcMixture>;

namespace detail {

inline void require_unit_square(double u, double v, const char* who) {
    if (!(u >= 0.0) || u > 1.0 || !(v >= 0.0) || v > 1.0)
        throw std::domain_error(std::string(who) + ": arguments outside [0, 1]");
}

// u + v - 1 without cancellation: branch on which operand exceeds 1/2 so the
// complement is exact (Sterbenz).  Only called when u + v >= 1.
inline double upper_branch_value(double u, double v) {
    return u >= v ? v - (1.0 - u) : u - (1.0 - v);
}

inline double evc_one_cdf(const PickandsParams& p, double u, double v) {
    if (u == 0.0 || v == 0.0) return 0.0;
    if (u == 1.0) return v;
    if (v == 1.0) return u;
    const double lu = std::log(u), lv = std::log(v);
    const double total = lu + lv;
    return std::exp(total * pickands(p, lv / total));
}

} // namespace detail

inline double evc_mixture_cdf(const EvcMixture& c, double u, double v) {
    detail::require_unit_square(u, v, "evc_mixture_cdf");
    return 0.5 * (detail::evc_one_cdf(c.a1, u, v) + detail::evc_one_cdf(c.a1, v, u));
}

inline double cdf(const CopulaSpec& spec, double u, double v) {
    detail::require_unit_square(u, v, "cdf");
    return std::visit(
        [u, v](const auto& c) -> double {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, Independence>) {
                return u * v;
            } else if constexpr (std::is_same_v<T, NelsenEx33>) {
                if (u <= c.theta * v) return u;
                if (u < 1.0 - (1.0 - c.theta) * v) return c.theta * v;
                return detail::upper_branch_value(u, v);
            } else if constexpr (std::is_same_v<T, MarshallOlkin>) {
                return std::min(std::pow(u, 1.0 - c.a) * v, u * std::pow(v, 1.0 - c.b));
            } else if constexpr (std::is_same_v<T, Gaussian>) {
                if (u == 0.0 || v == 0.0) return 0.0;
                if (u == 1.0) return v;
                if (v == 1.0) return u;
                return special::bvn_cdf(special::normal_quantile(u),
                                        special::normal_quantile(v), c.rho);
            } else {
                return evc_mixture_cdf(c, u, v);
            }
        },
        spec);
}

// ln C(u,v) with full relative precision in the tails.  Every family except
// the Gaussian has an exact log form; the Gaussian goes through the
// log-domain tail integrator.
inline LogProb log_cdf(const CopulaSpec& spec, double u, double v) {
    detail::require_unit_square(u, v, "log_cdf");
    return std::visit(
        [u, v](const auto& c) -> LogProb {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, Independence>) {
                if (u == 0.0 || v == 0.0) return LogProb::zero();
                return LogProb::from_log(std::log(u) + std::log(v));
            } else if constexpr (std::is_same_v<T, NelsenEx33>) {
                if (u <= c.theta * v) return LogProb::from_linear(u);
                if (u < 1.0 - (1.0 - c.theta) * v) {
                    if (c.theta == 0.0 || v == 0.0) return LogProb::zero();
                    return LogProb::from_log(std::log(c.theta) + std::log(v));
                }
                return LogProb::from_linear(detail::upper_branch_value(u, v));
            } else if constexpr (std::is_same_v<T, MarshallOlkin>) {
                if (u == 0.0 || v == 0.0) return LogProb::zero();
                const double lu = std::log(u), lv = std::log(v);
                const double l1 = (1.0 - c.a) * lu + lv;
                const double l2 = lu + (1.0 - c.b) * lv;
                return LogProb::from_log(std::min(std::min(l1, l2), 0.0));
            } else if constexpr (std::is_same_v<T, Gaussian>) {
                if (u == 0.0 || v == 0.0) return LogProb::zero();
                if (u == 1.0) return LogProb::from_linear(v);
                if (v == 1.0) return LogProb::from_linear(u);
                return special::log_bvn_cdf_tail(special::normal_quantile(u),
                                                 special::normal_quantile(v), c.rho);
            } else {
                if (u == 0.0 || v == 0.0) return LogProb::zero();
                if (u == 1.0) return LogProb::from_linear(v);
                if (v == 1.0) return LogProb::from_linear(u);
                const double lu = std::log(u), lv = std::log(v);
                const double total = lu + lv;
                const double t = lv / total;
                const double l1 = total * pickands(c.a1, t);
                const double l2 = total * pickands(c.a1, 1.0 - t);
                const double m = std::max(l1, l2);
                const double lmix = m - 0.6931471805599453094 +
                                    std::log1p(std::exp(std::min(l1, l2) - m));
                return LogProb::from_log(std::min(lmix, 0.0));
            }
        },
        spec);
}

// P(V <= v | U = u) = dC(u,v)/du.
struct ConditionalValue {
    double value;
    bool near_kink; // u sits on (within 1e-9 of) a derivative discontinuity
};

namespace detail {

// u-locations where dC/du jumps for fixed v, restricted to (0, 1)
inline std::vector<double> kink_locations(const CopulaSpec& spec, double v) {
    std::vector<double> ks;
    if (const auto* n = std::get_if<NelsenEx33>(&spec)) {
        const double k1 = n->theta * v;
        const double k2 = 1.0 - (1.0 - n->theta) * v;
        if (k1 > 0.0 && k1 < 1.0) ks.push_back(k1);
        if (k2 > 0.0 && k2 < 1.0) ks.push_back(k2);
    } else if (const auto* m = std::get_if<MarshallOlkin>(&spec)) {
        if (m->a > 0.0 && m->b > 0.0 && v > 0.0 && v < 1.0) {
            const double k = std::pow(v, m->b / m->a);
            if (k > 0.0 && k < 1.0) ks.push_back(k);
        }
    }
    return ks;
}

inline double diff_quotient(const CopulaSpec& spec, double v, double u, double h, int scheme) {
    // scheme: 0 central, +1 forward, -1 backward (both one-sided are O(h^2))
    const auto f = [&spec, v](double x) { return cdf(spec, x, v); };
    if (scheme == 0) return (f(u + h) - f(u - h)) / (2.0 * h);
    if (scheme > 0) return (-3.0 * f(u) + 4.0 * f(u + h) - f(u + 2.0 * h)) / (2.0 * h);
    return (3.0 * f(u) - 4.0 * f(u - h) + f(u - 2.0 * h)) / (2.0 * h);
}

} // namespace detail

inline ConditionalValue conditional_2_given_1(const CopulaSpec& spec, double v, double u) {
    if (!(u > 0.0) || !(u < 1.0))
        throw std::domain_error("conditional_2_given_1: u must lie in (0, 1)");
    if (!(v >= 0.0) || v > 1.0)
        throw std::domain_error("conditional_2_given_1: v outside [0, 1]");
    if (v == 0.0) return {0.0, false};
    if (v == 1.0) return {1.0, false};

    if (std::holds_alternative<Independence>(spec)) return {v, false};
    if (const auto* g = std::get_if<Gaussian>(&spec)) {
        const double sig = std::sqrt((1.0 - g->rho) * (1.0 + g->rho));
        const double z =
            (special::normal_quantile(v) - g->rho * special::normal_quantile(u)) / sig;
        return {special::normal_cdf(z), false};
    }

    const double h = 1e-6;
    const auto ks = detail::kink_locations(spec, v);
    double dmin = std::numeric_limits<double>::infinity();
    double knear = 0.0;
    for (double k : ks) {
        if (std::fabs(u - k) < dmin) {
            dmin = std::fabs(u - k);
            knear = k;
        }
    }
    const bool flag = dmin < 1e-9;

    int scheme = 0;
    if (dmin < 2.0 * h || u - h < 0.0 || u + h > 1.0) {
        bool up = dmin < 2.0 * h ? u >= knear : u - h < 0.0;
        if (up && u + 2.0 * h > 1.0) up = false;
        if (!up && u - 2.0 * h < 0.0) up = true;
        scheme = up ? 1 : -1;
    }
    const double d = detail::diff_quotient(spec, v, u, h, scheme);
    return {std::clamp(d, 0.0, 1.0), flag};
}

// Curvature at the diagonal of the symmetrized section
//   t -> u^{A1(t)} + u^{A1(1-t)}  =  2 C_mix(u^t, u^{1-t}),
// by second central difference (h = 1e-5).  A positive value certifies the
// diagonal as a strict local minimum of the mixture's section, i.e. maximal
// dependence bends away from it.
inline double mixture_diagonal_convexity_margin(const EvcMixture& c, double u) {
    if (!(u > 0.0) || !(u < 1.0))
        throw std::domain_error("mixture_diagonal_convexity_margin: u must lie in (0, 1)");
    const double h = 1e-5;
    const auto f = [&c, u](double t) {
        return 2.0 * evc_mixture_cdf(c, std::pow(u, t), std::pow(u, 1.0 - t));
    };
    return (f(0.5 + h) - 2.0 * f(0.5) + f(0.5 - h)) / (h * h);
}

// --- textual form --------------------------------------------------------
//
//   indep
//   nelsen33:theta=T
//   mo:a=A,b=B
//   gaussian:rho=R
//   evcmix:s=S,psi1=P,psi2=Q
//
// Parsing is strict: unknown families, unknown or repeated keys, missing
// keys, and malformed numbers all raise invalid_argument.

namespace detail {

inline double parse_number(const std::string& text, const std::string& key) {
    std::size_t pos = 0;
    double x;
    try {
        x = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("parse_copula: bad value for '" + key + "': " + text);
    }
    if (pos != text.size() || !std::isfinite(x))
        throw std::invalid_argument("parse_copula: bad value for '" + key + "': " + text);
    return x;
}

inline std::vector<std::pair<std::string, double>> parse_kv(const std::string& body) {
    std::vector<std::pair<std::string, double>> out;
    std::size_t start = 0;
    while (start <= body.size()) {
        const std::size_t comma = std::min(body.find(',', start), body.size());
        const std::string item = body.substr(start, comma - start);
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw std::invalid_argument("parse_copula: expected key=value, got '" + item + "'");
        const std::string key = item.substr(0, eq);
        for (const auto& kv : out)
            if (kv.first == key)
                throw std::invalid_argument("parse_copula: repeated key '" + key + "'");
        out.emplace_back(key, parse_number(item.substr(eq + 1), key));
        start = comma + 1;
    }
    return out;
}

inline double take(std::vector<std::pair<std::string, double>>& kv, const std::string& key) {
    for (auto it = kv.begin(); it != kv.end(); ++it) {
        if (it->first == key) {
            const double x = it->second;
            kv.erase(it);
            return x;
        }
    }
    throw std::invalid_argument("parse_copula: missing key '" + key + "'");
}

inline void expect_empty(const std::vector<std::pair<std::string, double>>& kv) {
    if (!kv.empty())
        throw std::invalid_argument("parse_copula: unknown key '" + kv.front().first + "'");
}

} // namespace detail

inline CopulaSpec parse_copula(const std::string& text) {
    const std::size_t colon = text.find(':');
    const std::string family = text.substr(0, colon);
    const std::string body = colon == std::string::npos ? std::string() : text.substr(colon + 1);

    if (family == "indep") {
        if (!body.empty()) throw std::invalid_argument("parse_copula: indep takes no parameters");
        return Independence{};
    }
    if (body.empty())
        throw std::invalid_argument("parse_copula: missing parameters for '" + family + "'");
    auto kv = detail::parse_kv(body);

    if (family == "nelsen33") {
        const double theta = detail::take(kv, "theta");
        detail::expect_empty(kv);
        return NelsenEx33{theta};
    }
    if (family == "mo") {
        const double a = detail::take(kv, "a");
        const double b = detail::take(kv, "b");
        detail::expect_empty(kv);
        return MarshallOlkin{a, b};
    }
    if (family == "gaussian") {
        const double rho = detail::take(kv, "rho");
        detail::expect_empty(kv);
        return Gaussian{rho};
    }
    if (family == "evcmix") {
        const double s = detail::take(kv, "s");
        const double p1 = detail::take(kv, "psi1");
        const double p2 = detail::take(kv, "psi2");
        detail::expect_empty(kv);
        return EvcMixture{PickandsParams(s, p1, p2)};
    }
    throw std::invalid_argument("parse_copula: unknown family '" + family + "'");
}

inline std::string format_copula(const CopulaSpec& spec) {
    char buf[160];
    return std::visit(
        [&buf](const auto& c) -> std::string {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, Independence>) {
                return "indep";
            } else if constexpr (std::is_same_v<T, NelsenEx33>) {
                std::snprintf(buf, sizeof buf, "nelsen33:theta=%.17g", c.theta);
            } else if constexpr (std::is_same_v<T, MarshallOlkin>) {
                std::snprintf(buf, sizeof buf, "mo:a=%.17g,b=%.17g", c.a, c.b);
            } else if constexpr (std::is_same_v<T, Gaussian>) {
                std::snprintf(buf, sizeof buf, "gaussian:rho=%.17g", c.rho);
            } else {
                std::snprintf(buf, sizeof buf, "evcmix:s=%.17g,psi1=%.17g,psi2=%.17g", c.a1.s,
                              c.a1.psi1, c.a1.psi2);
            }
            return std::string(buf);
        },
        spec);
}

} // namespace maxtail
