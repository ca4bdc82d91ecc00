#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "urllc/rng.hpp"
#include "urllc/sinr.hpp"

namespace urllc::linkmc {

using Cvec = Eigen::VectorXcd;

struct LinkDrawConfig {
    int n_antennas = 256;      // V2V receiver antennas
    int m_antennas = 256;      // BS antennas
    double noise_power = 1e-13;  // sigma^2 [W]
    sinr::PilotScheme scheme = sinr::PilotScheme::sp(166.0);
    int num_symbol_trials = 200;  // independent channel/collision draws

    void validate() const {
        if (n_antennas < 1 || m_antennas < 1)
            throw std::invalid_argument("LinkDrawConfig: antenna counts must be >= 1");
        if (!(noise_power > 0.0)) throw std::invalid_argument("LinkDrawConfig: noise must be > 0");
    }
};

struct PilotAssignment {
    std::vector<int> pair_pilot;  // uniform pick from the pilot set
    std::vector<int> cue_pilot;   // K distinct pilots
    int tau = 0;
};

// CUEs get K distinct pilots; every V2V transmitter draws independently and
// uniformly from the same set, so any two transmitters collide with
// probability 1/tau.
inline PilotAssignment assign_pilots(int num_pairs, int num_cues, int tau_pilot, Rng& rng) {
    if (num_cues > tau_pilot) throw std::invalid_argument("assign_pilots: need K <= tau_pilot");
    PilotAssignment a;
    a.tau = tau_pilot;
    a.cue_pilot.resize(num_cues);
    for (int k = 0; k < num_cues; ++k) a.cue_pilot[k] = k;
    a.pair_pilot.resize(num_pairs);
    for (int i = 0; i < num_pairs; ++i)
        a.pair_pilot[i] = static_cast<int>(rng.uniform_int(tau_pilot));
    return a;
}

inline Cvec cn_vector(int n, Rng& rng) {
    Cvec v(n);
    const double s = std::sqrt(0.5);  // CN(0,1): variance 1/2 per real component
    for (int i = 0; i < n; ++i) v[i] = std::complex<double>(s * rng.normal(), s * rng.normal());
    return v;
}

// Small-scale channel realizations for one coherence block.
struct ChannelDraw {
    int n = 0, k = 0;
    std::vector<Cvec> v2v;  // [rx*n + tx], N-dim
    std::vector<Cvec> c2v;  // [rx*k + cue], N-dim
    std::vector<Cvec> v2b;  // [tx], M-dim
    std::vector<Cvec> c2b;  // [cue], M-dim

    const Cvec& g_v2v(int rx, int tx) const { return v2v[std::size_t(rx) * n + tx]; }
    const Cvec& g_c2v(int rx, int cue) const { return c2v[std::size_t(rx) * k + cue]; }
};

inline ChannelDraw draw_channels(const sinr::BetaTable& bt, const LinkDrawConfig& cfg, Rng& rng) {
    ChannelDraw d;
    d.n = bt.n;
    d.k = bt.k;
    d.v2v.reserve(std::size_t(bt.n) * bt.n);
    d.c2v.reserve(std::size_t(bt.n) * bt.k);
    for (int i = 0; i < bt.n; ++i) {
        for (int j = 0; j < bt.n; ++j)
            d.v2v.push_back(std::sqrt(bt.v2v(i, j)) * cn_vector(cfg.n_antennas, rng));
        for (int c = 0; c < bt.k; ++c)
            d.c2v.push_back(std::sqrt(bt.c2v(i, c)) * cn_vector(cfg.n_antennas, rng));
    }
    for (int j = 0; j < bt.n; ++j)
        d.v2b.push_back(std::sqrt(bt.v2b(j)) * cn_vector(cfg.m_antennas, rng));
    for (int c = 0; c < bt.k; ++c)
        d.c2b.push_back(std::sqrt(bt.c2b(c)) * cn_vector(cfg.m_antennas, rng));
    return d;
}

// Scalar-weight LMMSE channel estimates at every V2V receiver: project the
// received pilot block onto the own pilot, then scale by
// omega/(sqrt(q tau)). The superimposed scheme sees data leakage from every
// transmitter inside the projection and inside omega's denominator; the
// leakage of the pair's own data rides on the desired channel direction and
// is tracked separately so the SINR decomposition can charge it as
// interference.
struct V2vEstimates {
    std::vector<Cvec> g_hat;       // estimate per pair receiver
    std::vector<double> omega;     // LMMSE scaling actually applied
    std::vector<std::complex<double>> own_leak;  // own-data coefficient on g_ii inside g_hat
};

inline V2vEstimates lmmse_estimate(const ChannelDraw& d, const sinr::BetaTable& bt,
                                   const sinr::PowerAllocation& alloc,
                                   const PilotAssignment& pilots, const LinkDrawConfig& cfg,
                                   Rng& rng) {
    const bool sp = !cfg.scheme.is_rp();
    const double tau = pilots.tau;
    const double s2 = cfg.noise_power;
    V2vEstimates est;
    est.g_hat.resize(bt.n);
    est.omega.resize(bt.n);
    est.own_leak.assign(bt.n, {0.0, 0.0});
    for (int i = 0; i < bt.n; ++i) {
        Cvec b = std::sqrt(alloc.q_v[i] * tau) * d.g_v2v(i, i);
        double den = alloc.q_v[i] * tau * bt.v2v(i, i) + s2;
        std::complex<double> own_xi{0.0, 0.0};
        for (int j = 0; j < bt.n; ++j) {
            if (j != i && pilots.pair_pilot[j] == pilots.pair_pilot[i]) {
                b += std::sqrt(alloc.q_v[j] * tau) * d.g_v2v(i, j);
                den += alloc.q_v[j] * tau * bt.v2v(i, j);
            }
            if (sp) {
                // data leakage: s_j^T c_i^* / sqrt(tau) is unit-variance CN
                std::complex<double> xi(std::sqrt(0.5) * rng.normal(),
                                        std::sqrt(0.5) * rng.normal());
                b += std::sqrt(alloc.p_v[j]) * xi * d.g_v2v(i, j);
                den += alloc.p_v[j] * bt.v2v(i, j);
                if (j == i) own_xi = xi;
            }
        }
        for (int c = 0; c < bt.k; ++c) {
            if (pilots.cue_pilot[c] == pilots.pair_pilot[i]) {
                b += std::sqrt(alloc.q_c[c] * tau) * d.g_c2v(i, c);
                den += alloc.q_c[c] * tau * bt.c2v(i, c);
            }
            if (sp) {
                std::complex<double> xi(std::sqrt(0.5) * rng.normal(),
                                        std::sqrt(0.5) * rng.normal());
                b += std::sqrt(alloc.p_c[c]) * xi * d.g_c2v(i, c);
                den += alloc.p_c[c] * bt.c2v(i, c);
            }
        }
        b += std::sqrt(s2) * cn_vector(cfg.n_antennas, rng);
        double omega = alloc.q_v[i] * tau * bt.v2v(i, i) / den;
        est.omega[i] = omega;
        est.g_hat[i] = (omega / std::sqrt(alloc.q_v[i] * tau)) * b;
        if (sp)
            est.own_leak[i] =
                omega * std::sqrt(alloc.p_v[i] / (alloc.q_v[i] * tau)) * own_xi;
    }
    return est;
}

// Post-combining signal decomposition for pair i, conditional on one draw:
// desired power with the own-data leakage removed from the combiner, and the
// total of every other term (other transmitters, CUEs, the own-leakage
// fluctuation, thermal noise).
struct SinrTerms {
    double desired = 0.0;
    double interference = 0.0;
};

inline SinrTerms mrc_sinr_terms(const ChannelDraw& d, const V2vEstimates& est,
                                const sinr::BetaTable& bt, const sinr::PowerAllocation& alloc,
                                double noise_power, int i) {
    const Cvec& gh = est.g_hat[i];
    const Cvec& own = d.g_v2v(i, i);
    std::complex<double> amp = gh.dot(own);
    std::complex<double> leak_amp = std::conj(est.own_leak[i]) * own.squaredNorm();
    SinrTerms t;
    t.desired = alloc.p_v[i] * std::norm(amp - leak_amp);
    t.interference = alloc.p_v[i] * std::norm(leak_amp) + noise_power * gh.squaredNorm();
    for (int j = 0; j < bt.n; ++j)
        if (j != i) t.interference += alloc.p_v[j] * std::norm(gh.dot(d.g_v2v(i, j)));
    for (int c = 0; c < bt.k; ++c)
        t.interference += alloc.p_c[c] * std::norm(gh.dot(d.g_c2v(i, c)));
    return t;
}

// chi-conditional closed forms of the asymptotic SINR given a realized pilot
// assignment (noise omitted, as in the large-antenna expressions).
inline std::vector<double> asymptotic_sinr_v(const sinr::BetaTable& bt,
                                             const sinr::PowerAllocation& alloc,
                                             const PilotAssignment& pilots, bool sp, double tau) {
    std::vector<double> out(bt.n);
    for (int i = 0; i < bt.n; ++i) {
        double interf = 0.0;
        for (int j = 0; j < bt.n; ++j) {
            if (j != i && pilots.pair_pilot[j] == pilots.pair_pilot[i])
                interf += alloc.p_v[j] * alloc.q_v[j] / alloc.q_v[i] * bt.v2v_sq(i, j);
            if (sp)
                interf += alloc.p_v[j] * alloc.p_v[j] / (tau * alloc.q_v[i]) * bt.v2v_sq(i, j);
        }
        for (int c = 0; c < bt.k; ++c) {
            if (pilots.cue_pilot[c] == pilots.pair_pilot[i])
                interf += alloc.p_c[c] * alloc.q_c[c] / alloc.q_v[i] * bt.c2v_sq(i, c);
            if (sp)
                interf += alloc.p_c[c] * alloc.p_c[c] / (tau * alloc.q_v[i]) * bt.c2v_sq(i, c);
        }
        double num = alloc.p_v[i] * bt.v2v_sq(i, i);
        out[i] = interf > 0.0 ? num / interf : std::numeric_limits<double>::infinity();
    }
    return out;
}

struct EmpiricalSinr {
    std::vector<double> empirical;    // post-MRC, averaged over draws
    std::vector<double> asymptotic;   // chi-conditional closed form
    std::vector<double> desired_mean;
    std::vector<double> interference_mean;
};

// Post-MRC SINR measured on the data stage: desired power |g_hat^H g_ii|^2 p_i
// against every other post-combining term plus noise, averaged over channel
// draws with the pilot assignment held fixed.
inline EmpiricalSinr empirical_sinr(const sinr::BetaTable& bt, const sinr::PowerAllocation& alloc,
                                    const PilotAssignment& pilots, const LinkDrawConfig& cfg,
                                    Rng& rng) {
    cfg.validate();
    const bool sp = !cfg.scheme.is_rp();
    EmpiricalSinr out;
    out.desired_mean.assign(bt.n, 0.0);
    out.interference_mean.assign(bt.n, 0.0);
    for (int trial = 0; trial < cfg.num_symbol_trials; ++trial) {
        ChannelDraw d = draw_channels(bt, cfg, rng);
        V2vEstimates est = lmmse_estimate(d, bt, alloc, pilots, cfg, rng);
        for (int i = 0; i < bt.n; ++i) {
            SinrTerms t = mrc_sinr_terms(d, est, bt, alloc, cfg.noise_power, i);
            out.desired_mean[i] += t.desired;
            out.interference_mean[i] += t.interference;
        }
    }
    out.empirical.resize(bt.n);
    for (int i = 0; i < bt.n; ++i) {
        out.desired_mean[i] /= cfg.num_symbol_trials;
        out.interference_mean[i] /= cfg.num_symbol_trials;
        out.empirical[i] = out.desired_mean[i] / out.interference_mean[i];
    }
    out.asymptotic = asymptotic_sinr_v(bt, alloc, pilots, sp, pilots.tau);
    return out;
}

// Mean achieved rate log2(1+gamma_link) and mean 1/gamma_link over draws and
// pilot assignments; used for the bound-direction checks against Theorem 1.
struct RateCheck {
    std::vector<double> mean_rate;       // E[log2(1+gamma)]
    std::vector<double> mean_inv_gamma;  // E[1/gamma]
};

inline RateCheck rate_check(const sinr::BetaTable& bt, const sinr::PowerAllocation& alloc,
                            const LinkDrawConfig& cfg, int num_assignments, Rng& rng) {
    RateCheck rc;
    rc.mean_rate.assign(bt.n, 0.0);
    rc.mean_inv_gamma.assign(bt.n, 0.0);
    int total = 0;
    for (int a = 0; a < num_assignments; ++a) {
        PilotAssignment pilots = assign_pilots(bt.n, bt.k, int(cfg.scheme.tau_pilot()), rng);
        for (int t = 0; t < cfg.num_symbol_trials; ++t) {
            ChannelDraw d = draw_channels(bt, cfg, rng);
            V2vEstimates est = lmmse_estimate(d, bt, alloc, pilots, cfg, rng);
            for (int i = 0; i < bt.n; ++i) {
                SinrTerms terms = mrc_sinr_terms(d, est, bt, alloc, cfg.noise_power, i);
                double gamma = terms.desired / terms.interference;
                rc.mean_rate[i] += std::log2(1.0 + gamma);
                rc.mean_inv_gamma[i] += 1.0 / gamma;
            }
            ++total;
        }
    }
    for (int i = 0; i < bt.n; ++i) {
        rc.mean_rate[i] /= total;
        rc.mean_inv_gamma[i] /= total;
    }
    return rc;
}

// Pilot collisions are rare (probability 1/tau each), so a plain average
// needs enormous samples to see them. This variant enumerates every
// collision pattern against pair 0 exactly: subsets of the other
// transmitters times which CUE (if any) shares the pilot, weighted by the
// exact pattern probabilities.
struct StratifiedRateCheck {
    double mean_rate = 0.0;
    double mean_inv_gamma = 0.0;
};

inline StratifiedRateCheck stratified_rate_check(const sinr::BetaTable& bt,
                                                 const sinr::PowerAllocation& alloc,
                                                 const LinkDrawConfig& cfg, int draws_per_stratum,
                                                 Rng& rng) {
    const int tau = int(cfg.scheme.tau_pilot());
    const int others = bt.n - 1;
    if (others > 10) throw std::invalid_argument("stratified_rate_check: too many pairs to enumerate");
    if (bt.k + bt.n + 1 > tau)
        throw std::invalid_argument("stratified_rate_check: pilot set too small");
    StratifiedRateCheck out;
    for (int sub = 0; sub < (1 << others); ++sub) {
        for (int cue_case = -1; cue_case < bt.k; ++cue_case) {
            double prob = cue_case < 0 ? 1.0 - double(bt.k) / tau : 1.0 / tau;
            for (int j = 0; j < others; ++j)
                prob *= (sub >> j & 1) ? 1.0 / tau : 1.0 - 1.0 / tau;
            PilotAssignment pil;
            pil.tau = tau;
            pil.cue_pilot.resize(bt.k);
            for (int c = 0; c < bt.k; ++c) pil.cue_pilot[c] = c;
            int ours = cue_case < 0 ? bt.k : cue_case;
            pil.pair_pilot.assign(bt.n, 0);
            pil.pair_pilot[0] = ours;
            for (int j = 0; j < others; ++j)
                pil.pair_pilot[j + 1] = (sub >> j & 1) ? ours : bt.k + 1 + j;
            double si = 0.0, sr = 0.0;
            for (int d = 0; d < draws_per_stratum; ++d) {
                ChannelDraw ch = draw_channels(bt, cfg, rng);
                V2vEstimates est = lmmse_estimate(ch, bt, alloc, pil, cfg, rng);
                SinrTerms t = mrc_sinr_terms(ch, est, bt, alloc, cfg.noise_power, 0);
                si += t.interference / t.desired;
                sr += std::log2(1.0 + t.desired / t.interference);
            }
            out.mean_inv_gamma += prob * si / draws_per_stratum;
            out.mean_rate += prob * sr / draws_per_stratum;
        }
    }
    return out;
}

}  // namespace urllc::linkmc
