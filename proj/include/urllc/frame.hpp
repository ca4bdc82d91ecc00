#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "urllc/config.hpp"
#include "urllc/fbl.hpp"
#include "urllc/pathloss.hpp"
#include "urllc/sinr.hpp"

namespace urllc::frame {

inline constexpr double kLn2 = 0.6931471805599453;

// f_SP(zeta) - theta and its derivative in zeta.
struct SpEval {
    double surplus;
    double dzeta;
};
inline SpEval f_sp(double zeta, double a, double b, double theta) {
    if (!(zeta > 0.0)) throw std::domain_error("f_sp: zeta must be > 0");
    double az = a * zeta;
    double value = zeta * std::log2(1.0 + az) - b * std::sqrt(zeta);
    double d = std::log2(1.0 + az) + az / ((1.0 + az) * kLn2) - b / (2.0 * std::sqrt(zeta));
    return {value - theta, d};
}

// f_RP(eta, zeta) - theta with the partials used by Algorithm 1.
struct RpEval {
    double surplus;
    double dzeta;
    double deta;
    double deta2;
};
inline RpEval f_rp(double eta, double zeta, double a, double b, double theta) {
    if (!(eta > 0.0 && eta < 1.0)) throw std::domain_error("f_rp: eta must lie in (0,1)");
    if (!(zeta > 0.0)) throw std::domain_error("f_rp: zeta must be > 0");
    double one = 1.0 - eta;
    double aez = a * eta * zeta;
    double l2 = std::log2(1.0 + aez);
    double sq = std::sqrt(one * zeta);
    double value = one * zeta * l2 - b * sq;
    double dz = one * (l2 + aez / ((1.0 + aez) * kLn2)) - b * one / (2.0 * sq);
    double de = -zeta * l2 + one * zeta * (a * zeta / ((1.0 + aez) * kLn2)) + b * zeta / (2.0 * sq);
    double de2 = -2.0 * a * zeta * zeta / ((1.0 + aez) * kLn2) -
                 one * a * a * zeta * zeta * zeta / ((1.0 + aez) * (1.0 + aez) * kLn2) +
                 b * zeta * zeta / (4.0 * sq * sq * sq);
    return {value - theta, dz, de, de2};
}

struct FrameDesign {
    sinr::PilotScheme::Kind scheme = sinr::PilotScheme::Kind::SP;
    double eta = 0.0;          // RP only
    double eta_v2v = 0.0;      // RP maximizer of the V2V-only branch
    double zeta = 0.0;         // continuous solution
    int zeta_frame = 0;        // ceiling integer actually scheduled
    double zeta_lower = 0.0;   // CUE-constraint floor
    std::array<double, 4> a_coeff{};  // merging coefficient per road
    double b = 0.0;
    bool cue_dominated = false;
    int newton_iters = 0;      // largest Newton iteration count encountered
    int bisection_steps = 0;   // RP only
    double eta_bracket = 0.0;  // |eta_max - eta_min| at exit
    // iteration history for convergence reporting:
    // SP rows (t, zeta_t); RP rows (w, eta_min, eta_max, zeta_w)
    std::vector<std::array<double, 4>> trace;

    sinr::PilotScheme pilot_scheme() const {
        return scheme == sinr::PilotScheme::Kind::RP
                   ? sinr::PilotScheme::rp(eta * zeta, zeta)
                   : sinr::PilotScheme::sp(zeta);
    }
    double lambda() const {
        return scheme == sinr::PilotScheme::Kind::RP ? (1.0 - eta) * zeta : zeta;
    }
};

struct FeasibleRegion {
    double zeta_star_lower = 0.0;  // symbols
    double coherence_bandwidth = 0.0;
    double latency_min = 0.0;  // seconds
};

inline FeasibleRegion feasible_region(const FrameDesign& f, double b_c) {
    if (!(b_c > 0.0)) throw std::domain_error("feasible_region: bandwidth must be > 0");
    return {f.zeta, b_c, f.zeta / b_c};
}

inline void to_json(nlohmann::json& j, const FrameDesign& f) {
    j = {{"scheme", f.scheme == sinr::PilotScheme::Kind::RP ? "RP" : "SP"},
         {"eta", f.eta},
         {"eta_v2v", f.eta_v2v},
         {"zeta", f.zeta},
         {"zeta_frame", f.zeta_frame},
         {"zeta_lower", f.zeta_lower},
         {"a_coeff", f.a_coeff},
         {"b", f.b},
         {"cue_dominated", f.cue_dominated},
         {"newton_iters", f.newton_iters},
         {"bisection_steps", f.bisection_steps}};
}
inline void to_json(nlohmann::json& j, const FeasibleRegion& r) {
    j = {{"zeta_star_lower", r.zeta_star_lower},
         {"coherence_bandwidth", r.coherence_bandwidth},
         {"latency_min", r.latency_min}};
}

namespace detail {

struct NewtonOutcome {
    double root;
    int iters;
};

// Newton iteration on g(zeta) = 0 for a convex increasing-at-the-root g,
// from the given initial point, with a maintained bracket and bisection
// fallback. Finds the upper root.
template <class G>
inline NewtonOutcome newton_root(const G& g, double z0, double mu, int max_iter = 200,
                                 std::vector<double>* iterates = nullptr) {
    double hi = std::max(z0, 2.0);
    int expand = 0;
    while (g(hi).first < 0.0 && expand++ < 200) hi *= 2.0;
    if (g(hi).first < 0.0) throw std::runtime_error("frame solver: no feasible frame size found");
    double lo = 1e-9;
    double z = hi;
    int it = 0;
    for (; it < max_iter; ++it) {
        if (iterates) iterates->push_back(z);
        auto [val, der] = g(z);
        if (val > 0.0) hi = z; else lo = z;
        double zn = der > 0.0 ? z - val / der : 0.5 * (lo + hi);
        if (!(zn > lo && zn < hi)) zn = 0.5 * (lo + hi);
        if (std::abs(zn - z) <= mu) {
            if (iterates) iterates->push_back(zn);
            return {zn, it + 1};
        }
        z = zn;
    }
    return {z, it};
}

// Newton on the stationarity condition of f_RP in eta at fixed zeta.
// f also has a spurious stationary point just below eta = 1 where the
// square-root penalty climbs back to zero, so the bracket is seeded by a
// coarse scan around the global maximum before Newton takes over.
inline NewtonOutcome eta_maximizer(double zeta, double a, double b, double theta, double eta0,
                                   double mu, int max_iter = 200) {
    const int scan = 64;
    double best = std::clamp(eta0, 1e-6, 1.0 - 1e-6);
    double best_val = f_rp(best, zeta, a, b, theta).surplus;
    for (int i = 1; i < scan; ++i) {
        double e = double(i) / scan;
        double v = f_rp(e, zeta, a, b, theta).surplus;
        if (v > best_val) {
            best_val = v;
            best = e;
        }
    }
    double lo = std::max(best - 1.0 / scan, 1e-9);
    double hi = std::min(best + 1.0 / scan, 1.0 - 1e-9);
    double eta = best;
    int it = 0;
    for (; it < max_iter; ++it) {
        RpEval e = f_rp(eta, zeta, a, b, theta);
        if (e.deta > 0.0) lo = eta; else hi = eta;
        double en = e.deta2 < 0.0 ? eta - e.deta / e.deta2 : 0.5 * (lo + hi);
        if (!(en > lo && en < hi)) en = 0.5 * (lo + hi);
        if (std::abs(en - eta) <= mu) return {en, it + 1};
        eta = en;
    }
    return {eta, it};
}

}  // namespace detail

// Algorithm branch for the superimposed-pilot scheme: per-road Newton from
// the CUE-constraint initial point, then the max over roads and the CUE
// floor.
inline FrameDesign solve_frame_sp(const ScenarioConfig& c, const pathloss::OmegaTable& om) {
    c.validate();
    FrameDesign out;
    out.scheme = sinr::PilotScheme::Kind::SP;
    out.b = fbl::b_coefficient(c.reliability);
    double psi2 = c.power_ratio * c.power_ratio;
    double floor = c.cue_sinr_thresholds.frame *
                   (sinr::cue_interference_sum(c, om) + sinr::cue_self_term(c, om)) / psi2;
    out.zeta_lower = floor;
    double best = 0.0;
    for (int u = 1; u <= 4; ++u) {
        double a = sinr::a_sp(c, om, u);
        out.a_coeff[u - 1] = a;
        auto g = [&](double z) {
            SpEval e = f_sp(z, a, out.b, c.info_threshold);
            return std::pair<double, double>(e.surplus, e.dzeta);
        };
        std::vector<double> iterates;
        auto res = detail::newton_root(g, std::max(floor, 2.0), c.tolerances.zeta, 200, &iterates);
        out.newton_iters = std::max(out.newton_iters, res.iters);
        if (res.root > best) {
            out.trace.clear();
            for (std::size_t t = 0; t < iterates.size(); ++t)
                out.trace.push_back({double(t), iterates[t], 0.0, 0.0});
        }
        best = std::max(best, res.root);
    }
    out.cue_dominated = floor > best;
    out.zeta = std::max(best, floor);
    out.zeta_frame = static_cast<int>(std::ceil(out.zeta - 1e-9));
    return out;
}

// Algorithm branch for the regular-pilot scheme: binary search on eta with a
// Newton zeta-solve and a Newton eta-maximizer per probe, then the CUE
// product rule.
inline FrameDesign solve_frame_rp(const ScenarioConfig& c, const pathloss::OmegaTable& om) {
    c.validate();
    FrameDesign out;
    out.scheme = sinr::PilotScheme::Kind::RP;
    out.b = fbl::b_coefficient(c.reliability);
    double psi2 = c.power_ratio * c.power_ratio;
    // eta*zeta product required by the CUE constraint
    double pc = c.cue_sinr_thresholds.frame * sinr::cue_interference_sum(c, om) / (2.0 * psi2);

    double best_zeta = 0.0, best_eta = 0.5;
    for (int u = 1; u <= 4; ++u) {
        double a = sinr::a_rp(c, om, u);
        out.a_coeff[u - 1] = a;
        double eta_min = 0.0, eta_max = 1.0;
        double eta_w = 0.5, zeta_u = 0.0, eta_star = 0.5;
        int w = 0;
        std::vector<std::array<double, 4>> trace;
        while (eta_max - eta_min > c.tolerances.eta && w < 64) {
            eta_w = 0.5 * (eta_min + eta_max);
            auto g = [&](double z) {
                RpEval e = f_rp(eta_w, z, a, out.b, c.info_threshold);
                return std::pair<double, double>(e.surplus, e.dzeta);
            };
            auto zres = detail::newton_root(g, std::max(pc / eta_w, 2.0), c.tolerances.zeta);
            out.newton_iters = std::max(out.newton_iters, zres.iters);
            zeta_u = zres.root;
            auto eres =
                detail::eta_maximizer(zeta_u, a, out.b, c.info_threshold, eta_w, c.tolerances.eta);
            out.newton_iters = std::max(out.newton_iters, eres.iters);
            eta_star = eres.root;
            if (eta_star <= eta_w) eta_max = eta_w; else eta_min = eta_w;
            trace.push_back({double(w), eta_min, eta_max, zeta_u});
            ++w;
        }
        out.bisection_steps = std::max(out.bisection_steps, w);
        out.eta_bracket = std::max(out.eta_bracket, eta_max - eta_min);
        if (zeta_u > best_zeta) {
            best_zeta = zeta_u;
            best_eta = eta_star;
            out.trace = std::move(trace);
        }
    }

    out.eta_v2v = best_eta;
    if (best_eta * best_zeta >= pc) {
        out.eta = best_eta;
        out.zeta = best_zeta;
    } else {
        // CUE-dominated branch: the frame grows to the pilot product the CUE
        // bound demands, and eta is re-maximized at that frame size. The
        // binding road is the one with the largest interference sum, i.e.
        // the smallest merging coefficient.
        out.cue_dominated = true;
        double zeta = pc / best_eta;
        double a = *std::min_element(out.a_coeff.begin(), out.a_coeff.end());
        auto eres = detail::eta_maximizer(zeta, a, out.b, c.info_threshold, best_eta,
                                          c.tolerances.eta);
        out.newton_iters = std::max(out.newton_iters, eres.iters);
        out.eta = eres.root;
        out.zeta = zeta;
    }
    out.zeta_lower = out.cue_dominated ? out.zeta : pc / std::max(out.eta, 1e-12);
    out.zeta_frame = static_cast<int>(std::ceil(out.zeta - 1e-9));
    return out;
}

}  // namespace urllc::frame
