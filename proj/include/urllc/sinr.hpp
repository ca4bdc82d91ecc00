#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "urllc/config.hpp"
#include "urllc/geometry.hpp"
#include "urllc/pathloss.hpp"

namespace urllc::sinr {

// Pilot scheme: regular pilots spend tau_rp of the tau_sp symbols on
// training; superimposed pilots ride on top of all tau_sp symbols.
struct PilotScheme {
    enum class Kind { RP, SP };
    Kind kind = Kind::SP;
    double tau_rp = 0.0;
    double tau_sp = 0.0;

    static PilotScheme rp(double tau_rp, double tau_sp) {
        PilotScheme s{Kind::RP, tau_rp, tau_sp};
        s.validate();
        return s;
    }
    static PilotScheme sp(double tau_sp) {
        PilotScheme s{Kind::SP, 0.0, tau_sp};
        s.validate();
        return s;
    }

    bool is_rp() const { return kind == Kind::RP; }
    // effective data blocklength
    double lambda() const { return is_rp() ? tau_sp - tau_rp : tau_sp; }
    // pilot length used by the estimation stage
    double tau_pilot() const { return is_rp() ? tau_rp : tau_sp; }

    void validate(int num_cues = 0) const {
        if (is_rp()) {
            if (!(num_cues <= tau_rp && tau_rp < tau_sp))
                throw std::invalid_argument("PilotScheme: need K <= tau_RP < tau_SP");
        } else if (!(tau_sp >= 1.0)) {
            throw std::invalid_argument("PilotScheme: need tau_SP >= 1");
        }
    }
};

// Per-transmitter pilot and signal powers.
struct PowerAllocation {
    std::vector<double> p_v, q_v;  // per V2V pair [W]
    std::vector<double> p_c, q_c;  // per CUE [W]

    static PowerAllocation equal_power(int n_pairs, int n_cues, const PilotScheme& s,
                                       double p_v_max, double psi) {
        double scale = s.is_rp() ? 1.0 : 0.5;
        PowerAllocation a;
        a.p_v.assign(n_pairs, scale * p_v_max);
        a.q_v.assign(n_pairs, scale * p_v_max);
        a.p_c.assign(n_cues, scale * psi * p_v_max);
        a.q_c.assign(n_cues, scale * psi * p_v_max);
        return a;
    }

    bool valid_for(const PilotScheme& s, double p_v_max, double psi) const {
        double cap_v = s.is_rp() ? p_v_max : 0.5 * p_v_max;
        double cap_c = psi * cap_v;
        auto ok = [](const std::vector<double>& v, double cap) {
            for (double x : v)
                if (!(x >= 0.0 && x <= cap * (1.0 + 1e-12))) return false;
            return true;
        };
        return ok(p_v, cap_v) && ok(q_v, cap_v) && ok(p_c, cap_c) && ok(q_c, cap_c);
    }
};

// Large-scale gains for one drop; the instance bounds, the GP builder and
// the link-level simulator all read from this shared table.
struct BetaTable {
    int n = 0, k = 0;
    std::vector<double> v2v_;  // [rx pair i][tx pair j]
    std::vector<double> c2v_;  // [rx pair i][cue]
    std::vector<double> v2b_;  // [tx pair j] to BS
    std::vector<double> c2b_;  // [cue] to BS

    double v2v(int rx, int tx) const { return v2v_[std::size_t(rx) * n + tx]; }
    double c2v(int rx, int cue) const { return c2v_[std::size_t(rx) * k + cue]; }
    double v2b(int tx) const { return v2b_[tx]; }
    double c2b(int cue) const { return c2b_[cue]; }
    double v2v_sq(int rx, int tx) const { return v2v(rx, tx) * v2v(rx, tx); }
    double c2v_sq(int rx, int cue) const { return c2v(rx, cue) * c2v(rx, cue); }
    double v2b_sq(int tx) const { return v2b_[tx] * v2b_[tx]; }
    double c2b_sq(int cue) const { return c2b_[cue] * c2b_[cue]; }

    static BetaTable from(const geometry::Topology& topo, const pathloss::FadingModel& fading) {
        BetaTable t;
        t.n = topo.num_pairs();
        t.k = topo.num_cues();
        t.v2v_.resize(std::size_t(t.n) * t.n);
        t.c2v_.resize(std::size_t(t.n) * t.k);
        t.v2b_.resize(t.n);
        t.c2b_.resize(t.k);
        for (int i = 0; i < t.n; ++i) {
            const auto& rx = topo.pairs[i].receiver;
            for (int j = 0; j < t.n; ++j) {
                const auto& tx = topo.pairs[j].transmitter;
                t.v2v_[std::size_t(i) * t.n + j] =
                    pathloss::beta(fading, std::hypot(tx.x - rx.x, tx.y - rx.y));
            }
            for (int c = 0; c < t.k; ++c)
                t.c2v_[std::size_t(i) * t.k + c] =
                    pathloss::beta(fading, std::hypot(topo.cues[c].x - rx.x, topo.cues[c].y - rx.y));
        }
        for (int j = 0; j < t.n; ++j) {
            const auto& tx = topo.pairs[j].transmitter;
            t.v2b_[j] = pathloss::beta(fading, std::hypot(tx.x, tx.y));
        }
        for (int c = 0; c < t.k; ++c)
            t.c2b_[c] = pathloss::beta(fading, std::hypot(topo.cues[c].x, topo.cues[c].y));
        return t;
    }
};

// Gamma = tau * p * q * beta^2 / Phi for each V2V pair; the RP denominator
// carries the three pilot-contamination sums, SP adds the squared
// signal-power terms over every transmitter including the pair itself.
// An empty denominator is reported as +infinity.
inline std::vector<double> gamma_v_instance(const BetaTable& bt, const PowerAllocation& alloc,
                                            const PilotScheme& scheme) {
    const bool sp = !scheme.is_rp();
    const double tau = scheme.tau_pilot();
    std::vector<double> out(bt.n);
    for (int i = 0; i < bt.n; ++i) {
        double phi = 0.0;
        for (int j = 0; j < bt.n; ++j) {
            if (j != i) phi += alloc.p_v[j] * alloc.q_v[j] * bt.v2v_sq(i, j);
            if (sp) phi += alloc.p_v[j] * alloc.p_v[j] * bt.v2v_sq(i, j);
        }
        for (int c = 0; c < bt.k; ++c) {
            phi += alloc.p_c[c] * alloc.q_c[c] * bt.c2v_sq(i, c);
            if (sp) phi += alloc.p_c[c] * alloc.p_c[c] * bt.c2v_sq(i, c);
        }
        double num = tau * alloc.p_v[i] * alloc.q_v[i] * bt.v2v_sq(i, i);
        out[i] = phi > 0.0 ? num / phi : std::numeric_limits<double>::infinity();
    }
    return out;
}

inline std::vector<double> gamma_c_instance(const BetaTable& bt, const PowerAllocation& alloc,
                                            const PilotScheme& scheme) {
    const bool sp = !scheme.is_rp();
    const double tau = scheme.tau_pilot();
    std::vector<double> out(bt.k);
    for (int c = 0; c < bt.k; ++c) {
        double phi = 0.0;
        for (int j = 0; j < bt.n; ++j) {
            phi += alloc.p_v[j] * alloc.q_v[j] * bt.v2b_sq(j);
            if (sp) phi += alloc.p_v[j] * alloc.p_v[j] * bt.v2b_sq(j);
        }
        if (sp)
            for (int c2 = 0; c2 < bt.k; ++c2) phi += alloc.p_c[c2] * alloc.p_c[c2] * bt.c2b_sq(c2);
        double num = tau * alloc.p_c[c] * alloc.q_c[c] * bt.c2b_sq(c);
        out[c] = phi > 0.0 ? num / phi : std::numeric_limits<double>::infinity();
    }
    return out;
}

// ---- worst-case bounds averaged over density and large-scale fading ----

// Common interference sum for road u. The expected same-road interferer
// count rho_u*S_R - 2 is clamped at zero where fewer than one pair per road
// is expected.
inline double interference_sum(const ScenarioConfig& c, const pathloss::OmegaTable& om, int u) {
    if (u < 1 || u > 4) throw std::out_of_range("interference_sum: road id");
    double sr = c.road_area();
    double psi2 = c.power_ratio * c.power_ratio;
    double same = std::max(c.avg_density[u - 1] * sr - 2.0, 0.0) * om.v2v_n1;
    double perp = 0.0, par = 0.0;
    for (int j = 1; j <= 4; ++j) {
        if (j == u) continue;
        double rs = c.avg_density[j - 1] * sr;
        if (geometry::road_relation(u, j) == geometry::RoadRelation::Perpendicular)
            perp += rs * om.v2v_n2;
        else
            par += rs * om.v2v_n3;
    }
    double cue = 2.0 * c.num_cues * psi2 * om.c2v_n;
    return (same + perp + par + cue) * om.v2v_p1;
}

// Worst-case V2V SINR bound of road u. RP: 2*tau_RP/D, SP: tau_SP/(1+D)
// with tau_RP = eta*zeta and tau_SP = zeta.
inline double gamma_v_worstcase(const ScenarioConfig& c, const pathloss::OmegaTable& om,
                                PilotScheme::Kind kind, double eta, double zeta, int u) {
    if (!(zeta > 0.0)) return 0.0;
    double d = interference_sum(c, om, u);
    if (kind == PilotScheme::Kind::RP) {
        if (!(eta > 0.0 && eta < 1.0)) throw std::domain_error("gamma_v_worstcase: eta in (0,1)");
        return 2.0 * eta * zeta / d;
    }
    return zeta / (1.0 + d);
}

// Sum over roads of rho_u * S_R * Omega^V2B_N * Omega^C2B_P.
inline double cue_interference_sum(const ScenarioConfig& c, const pathloss::OmegaTable& om) {
    double sr = c.road_area(), s = 0.0;
    for (int u = 0; u < 4; ++u) s += c.avg_density[u] * sr;
    return s * om.v2b_n * om.c2b_p;
}

inline double cue_self_term(const ScenarioConfig& c, const pathloss::OmegaTable& om) {
    return c.num_cues * c.power_ratio * c.power_ratio * om.c2b_n * om.c2b_p;
}

// Worst-case CUE SINR bound. RP: 2*tau_RP*psi^2/E_C, SP adds the CUE
// self-interference term to the denominator.
inline double gamma_c_worstcase(const ScenarioConfig& c, const pathloss::OmegaTable& om,
                                PilotScheme::Kind kind, double eta, double zeta) {
    double psi2 = c.power_ratio * c.power_ratio;
    double ec = cue_interference_sum(c, om);
    if (kind == PilotScheme::Kind::RP) return 2.0 * eta * zeta * psi2 / ec;
    return zeta * psi2 / (ec + cue_self_term(c, om));
}

// Merging coefficients of the frame-design objective: Gamma^RP = a_rp*eta*zeta,
// Gamma^SP = a_sp*zeta.
inline double a_rp(const ScenarioConfig& c, const pathloss::OmegaTable& om, int u) {
    return 2.0 / interference_sum(c, om, u);
}
inline double a_sp(const ScenarioConfig& c, const pathloss::OmegaTable& om, int u) {
    return 1.0 / (1.0 + interference_sum(c, om, u));
}

}  // namespace urllc::sinr
