#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace urllc::quad {

// Gauss-Kronrod 15-point nodes/weights on [-1,1] with the embedded 7-point
// Gauss rule for the error estimate.
namespace detail {
inline constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct Segment {
    double a, b, integral, error;
};

template <class F>
inline Segment gk15(const F& f, double a, double b) {
    double hl = 0.5 * (b - a), c = 0.5 * (a + b);
    double fc = f(c);
    double resk = kWgk[7] * fc, resg = kWg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        double x = hl * kXgk[j];
        double fv = f(c - x) + f(c + x);
        resk += kWgk[j] * fv;
        if (j % 2 == 1) resg += kWg[j / 2] * fv;
    }
    double integral = resk * hl;
    double err = std::abs((resk - resg) * hl);
    return {a, b, integral, err};
}
}  // namespace detail

struct Result {
    double value = 0.0;
    double error = 0.0;   // achieved absolute error estimate
    bool converged = true;
};

// Adaptive integration with initial breakpoints; subdivides the segment with
// the largest error estimate until the relative tolerance is met.
template <class F>
inline Result integrate(const F& f, const std::vector<double>& breaks, double rel_tol,
                        int max_segments = 4000) {
    if (breaks.size() < 2) throw std::invalid_argument("integrate: need at least one interval");
    std::vector<detail::Segment> segs;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (breaks[i + 1] <= breaks[i]) continue;
        segs.push_back(detail::gk15(f, breaks[i], breaks[i + 1]));
    }
    auto total = [&segs]() {
        double v = 0.0, e = 0.0;
        for (const auto& s : segs) { v += s.integral; e += s.error; }
        return std::pair<double, double>(v, e);
    };
    while (static_cast<int>(segs.size()) < max_segments) {
        auto [v, e] = total();
        if (e <= rel_tol * std::max(std::abs(v), 1e-300)) return {v, e, true};
        std::size_t worst = 0;
        for (std::size_t i = 1; i < segs.size(); ++i)
            if (segs[i].error > segs[worst].error) worst = i;
        detail::Segment s = segs[worst];
        double m = 0.5 * (s.a + s.b);
        if (!(m > s.a && m < s.b)) break;  // interval exhausted at double precision
        segs[worst] = detail::gk15(f, s.a, m);
        segs.push_back(detail::gk15(f, m, s.b));
    }
    auto [v, e] = total();
    return {v, e, e <= rel_tol * std::max(std::abs(v), 1e-300)};
}

template <class F>
inline Result integrate(const F& f, double a, double b, double rel_tol) {
    return integrate(f, std::vector<double>{a, b}, rel_tol);
}

// Density of the difference Z - X of two independent uniforms, a trapezoid
// (triangle when the supports have equal length). Piecewise linear between
// its four breakpoints.
struct DiffDensity {
    double b0, b1, b2, b3;  // sorted breakpoints
    double peak;            // plateau height = 1/max(L1, L2)

    DiffDensity(double a1, double c1, double a2, double c2) {
        double l1 = c1 - a1, l2 = c2 - a2;
        b0 = a2 - c1;
        b3 = c2 - a1;
        b1 = std::min(a2 - a1, c2 - c1);
        b2 = std::max(a2 - a1, c2 - c1);
        peak = 1.0 / std::max(l1, l2);
    }

    double operator()(double d) const {
        if (d <= b0 || d >= b3) return 0.0;
        if (d < b1) return peak * (d - b0) / (b1 - b0);
        if (d <= b2) return peak;
        return peak * (b3 - d) / (b3 - b2);
    }

    std::vector<double> breakpoints() const { return {b0, b1, b2, b3}; }
};

}  // namespace urllc::quad
