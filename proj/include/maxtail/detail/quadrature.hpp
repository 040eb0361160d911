#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace maxtail::detail {

// Gauss-Kronrod 7-15 pair, abscissae and weights from QUADPACK dqk15.
inline constexpr double kGK15Node[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kGK15WK[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double kGK15WG[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct PanelEstimate {
    double integral;
    double error; // |K15 - G7|
};

template <class F>
PanelEstimate gk15_panel(F&& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double k = kGK15WK[7] * fc;
    double g = kGK15WG[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double x = h * kGK15Node[j];
        const double fs = f(c - x) + f(c + x);
        k += kGK15WK[j] * fs;
        if (j % 2 == 1) g += kGK15WG[j / 2] * fs;
    }
    return {k * h, std::fabs((k - g) * h)};
}

// Globally adaptive Gauss-Kronrod integration: repeatedly bisect the segment
// with the largest error estimate until the summed error meets
// max(abs_tol, rel_tol * |integral|).  Deterministic; throws if the segment
// budget is exhausted before convergence.
template <class F>
double adaptive_gk15(F&& f, double a, double b, double abs_tol, double rel_tol,
                     std::size_t max_segments = 4000) {
    if (!(a < b)) {
        if (a == b) return 0.0;
        throw std::invalid_argument("adaptive_gk15: inverted interval");
    }
    struct Seg {
        double a, b, integral, error;
    };
    std::vector<Seg> segs;
    segs.reserve(64);
    PanelEstimate first = gk15_panel(f, a, b);
    segs.push_back({a, b, first.integral, first.error});

    for (;;) {
        double total = 0.0, err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            total += segs[i].integral;
            err += segs[i].error;
            if (segs[i].error > segs[worst].error) worst = i;
        }
        if (err <= std::max(abs_tol, rel_tol * std::fabs(total))) return total;
        if (segs.size() >= max_segments)
            throw std::runtime_error("adaptive_gk15: segment budget exhausted");
        const Seg s = segs[worst];
        const double m = 0.5 * (s.a + s.b);
        if (!(s.a < m && m < s.b)) return total; // interval at rounding floor
        PanelEstimate left = gk15_panel(f, s.a, m);
        PanelEstimate right = gk15_panel(f, m, s.b);
        segs[worst] = {s.a, m, left.integral, left.error};
        segs.push_back({m, s.b, right.integral, right.error});
    }
}

} // namespace maxtail::detail
