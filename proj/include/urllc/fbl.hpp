#pragma once

#include <cmath>
#include <stdexcept>

namespace urllc::fbl {

inline constexpr double kLog2E = 1.4426950408889634;

// Gaussian tail Q(x) = P[N(0,1) > x].
inline double q_func(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// Inverse Gaussian Q-function to ~1e-10 relative accuracy: safeguarded
// Newton on erfc with a maintained bracket.
inline double q_inv(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("q_inv: eps must lie in (0,1)");
    if (eps == 0.5) return 0.0;
    // Initial guess from the asymptotic expansion of the tail.
    double p = eps < 0.5 ? eps : 1.0 - eps;
    double t = std::sqrt(-2.0 * std::log(p));
    double x = t - (2.30753 + 0.27061 * t) / (1.0 + 0.99229 * t + 0.04481 * t * t);
    double lo = 0.0, hi = 40.0;
    for (int it = 0; it < 200; ++it) {
        double f = q_func(x) - p;  // decreasing in x
        if (f > 0.0) lo = x; else hi = x;
        double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
        double step = f / pdf;  // Newton: x_{n+1} = x + (Q(x)-p)/phi(x)
        double xn = x + step;
        if (!(xn > lo && xn < hi) || !std::isfinite(xn)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= 1e-14 * std::max(1.0, std::abs(xn))) { x = xn; break; }
        x = xn;
    }
    return eps < 0.5 ? x : -x;
}

struct RateQuery {
    double gamma;        // linear SINR
    double blocklength;  // lambda = L*B [symbols]
    double eps;          // error probability
};

// Channel dispersion V(gamma); the high-SNR flag substitutes the constant
// (log2 e)^2 approximation.
inline double dispersion(double gamma, bool high_snr = false) {
    if (high_snr) return kLog2E * kLog2E;
    double s = 1.0 + gamma;
    return (1.0 - 1.0 / (s * s)) * kLog2E * kLog2E;
}

// Normal-approximation achievable rate [bits/symbol]. May be negative at
// small blocklengths; callers clamp when converting to bits.
inline double rate(const RateQuery& q, bool high_snr = false) {
    if (!(q.gamma >= 0.0)) throw std::domain_error("rate: gamma must be >= 0");
    if (!(q.blocklength >= 1.0)) throw std::domain_error("rate: blocklength must be >= 1");
    double v = dispersion(q.gamma, high_snr);
    return std::log2(1.0 + q.gamma) - std::sqrt(v / q.blocklength) * q_inv(q.eps);
}

// b = Q^{-1}(eps) * log2(e), the square-root penalty coefficient.
inline double b_coefficient(double eps) { return q_inv(eps) * kLog2E; }

// Deliverable information over lambda symbols with the high-SNR dispersion:
// lambda*log2(1+gamma) - b*sqrt(lambda). No clamping at this layer.
inline double info_bits(double gamma, double lambda, double eps) {
    return lambda * std::log2(1.0 + gamma) - b_coefficient(eps) * std::sqrt(lambda);
}

}  // namespace urllc::fbl
