#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "urllc/config.hpp"
#include "urllc/frame.hpp"
#include "urllc/geometry.hpp"
#include "urllc/gp.hpp"
#include "urllc/linkmc.hpp"
#include "urllc/oracles.hpp"
#include "urllc/pathloss.hpp"
#include "urllc/scheduler.hpp"
#include "urllc/sinr.hpp"

namespace urllc::exp {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

struct ExperimentSpec {
    std::string id;  // convergence | density_sweep | reliability_sweep |
                     // bandwidth_sweep | cdf | link_validation | schedule_trace
    ScenarioConfig base;
    std::string sweep_axis;
    std::vector<double> sweep_values;
    int num_drops = 1;
    std::uint64_t master_seed = 1;
    pathloss::OmegaOptions omega;

    void validate() const {
        if (num_drops < 1) throw std::invalid_argument("ExperimentSpec: num_drops >= 1");
        for (std::size_t i = 1; i < sweep_values.size(); ++i) {
            if (!(sweep_values[i] > sweep_values[i - 1]))
                throw std::invalid_argument("ExperimentSpec: sweep values must be sorted");
            if (!std::isfinite(sweep_values[i]))
                throw std::invalid_argument("ExperimentSpec: sweep values must be finite");
        }
    }
};

struct ExperimentOutput {
    std::string csv;
    nlohmann::json summary;
};

// ---- figure-style sweeps ----

inline frame::FrameDesign solve_sp_at(const ScenarioConfig& c, const pathloss::OmegaOptions& oo) {
    return frame::solve_frame_sp(c, pathloss::omega_quadrature(c, oo));
}
inline frame::FrameDesign solve_rp_at(const ScenarioConfig& c, const pathloss::OmegaOptions& oo) {
    return frame::solve_frame_rp(c, pathloss::omega_quadrature(c, oo));
}

inline std::string density_sweep_csv(const ScenarioConfig& base, const std::vector<double>& rhos,
                                     const pathloss::OmegaOptions& oo) {
    std::ostringstream os;
    os << "density,num_cues,reliability,zeta_rp,zeta_sp,latency_min_rp_s,latency_min_sp_s\n";
    for (double rho : rhos) {
        ScenarioConfig c = base;
        c.avg_density = {rho, rho, rho, rho};
        auto om = pathloss::omega_quadrature(c, oo);
        auto sp = frame::solve_frame_sp(c, om);
        auto rp = frame::solve_frame_rp(c, om);
        os << fmt(rho) << ',' << c.num_cues << ',' << fmt(c.reliability) << ',' << fmt(rp.zeta)
           << ',' << fmt(sp.zeta) << ',' << fmt(rp.zeta / c.coherence_bandwidth) << ','
           << fmt(sp.zeta / c.coherence_bandwidth) << '\n';
    }
    return os.str();
}

inline std::string reliability_sweep_csv(const ScenarioConfig& base,
                                         const std::vector<double>& epsilons,
                                         const pathloss::OmegaOptions& oo) {
    std::ostringstream os;
    os << "density,num_cues,reliability,zeta_rp,zeta_sp,latency_min_rp_s,latency_min_sp_s\n";
    auto om = pathloss::omega_quadrature(base, oo);
    for (double eps : epsilons) {
        ScenarioConfig c = base;
        c.reliability = eps;
        auto sp = frame::solve_frame_sp(c, om);
        auto rp = frame::solve_frame_rp(c, om);
        os << fmt(c.avg_density[0]) << ',' << c.num_cues << ',' << fmt(eps) << ',' << fmt(rp.zeta)
           << ',' << fmt(sp.zeta) << ',' << fmt(rp.zeta / c.coherence_bandwidth) << ','
           << fmt(sp.zeta / c.coherence_bandwidth) << '\n';
    }
    return os.str();
}

inline std::string bandwidth_sweep_csv(const ScenarioConfig& base,
                                       const std::vector<double>& bandwidths,
                                       const pathloss::OmegaOptions& oo) {
    std::ostringstream os;
    os << "bandwidth_hz,latency_rp_s,latency_sp_s,within_coherence\n";
    auto om = pathloss::omega_quadrature(base, oo);
    auto sp = frame::solve_frame_sp(base, om);
    auto rp = frame::solve_frame_rp(base, om);
    for (double b : bandwidths) {
        os << fmt(b) << ',' << fmt(rp.zeta / b) << ',' << fmt(sp.zeta / b) << ','
           << (b <= base.coherence_bandwidth ? 1 : 0) << '\n';
    }
    return os.str();
}

inline std::string convergence_csv(const ScenarioConfig& base, const pathloss::OmegaOptions& oo) {
    std::ostringstream os;
    auto om = pathloss::omega_quadrature(base, oo);
    auto sp = frame::solve_frame_sp(base, om);
    auto rp = frame::solve_frame_rp(base, om);
    os << "scheme,iteration,zeta,eta_min,eta_max\n";
    for (const auto& row : sp.trace)
        os << "SP," << int(row[0]) << ',' << fmt(row[1]) << ",,\n";
    for (const auto& row : rp.trace)
        os << "RP," << int(row[0]) << ',' << fmt(row[3]) << ',' << fmt(row[1]) << ',' << fmt(row[2])
           << '\n';
    return os.str();
}

// ---- CDF experiment (optimized allocation vs equal-power baseline) ----

struct CdfRow {
    std::uint64_t drop_seed = 0;
    int n_pairs = 0;
    std::string status;
    double min_info_opt = 0.0;
    double min_info_baseline = 0.0;
    std::vector<double> cue_sinr_db;
    std::string error;
};

inline CdfRow run_cdf_drop(const ScenarioConfig& c, const frame::FrameDesign& fd,
                           std::uint64_t seed) {
    CdfRow row;
    row.drop_seed = seed;
    Rng rng(seed);
    try {
        geometry::Topology topo = geometry::sample_topology(c, rng);
        row.n_pairs = topo.num_pairs();
        if (topo.num_pairs() == 0) {
            row.status = "EmptyDrop";
            return row;
        }
        auto bt = sinr::BetaTable::from(topo, pathloss::FadingModel::from(c));
        auto g = gp::build_gp(bt, fd, c.cue_sinr_thresholds.allocation, c.max_power_v,
                              c.power_ratio, c.reliability);
        auto res = gp::solve_gp(g);
        row.status = gp::to_string(res.status);
        auto scheme = fd.pilot_scheme();
        if (res.status == gp::SolveStatus::Optimal) {
            row.min_info_opt = res.phi_bits;
            auto gc = sinr::gamma_c_instance(bt, res.alloc, scheme);
            for (double v : gc) row.cue_sinr_db.push_back(10.0 * std::log10(v));
        }
        auto base = sinr::PowerAllocation::equal_power(bt.n, bt.k, scheme, c.max_power_v,
                                                       c.power_ratio);
        auto gv = sinr::gamma_v_instance(bt, base, scheme);
        double mn = std::numeric_limits<double>::infinity();
        for (double v : gv) mn = std::min(mn, v);
        row.min_info_baseline = fbl::info_bits(mn, fd.lambda(), c.reliability);
    } catch (const std::exception& e) {
        row.status = "Error";
        row.error = e.what();
    }
    return row;
}

inline std::vector<CdfRow> run_cdf(const ScenarioConfig& c, const frame::FrameDesign& fd,
                                   int num_drops, std::uint64_t master_seed) {
    std::vector<CdfRow> rows(num_drops);
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (unsigned w = 0; w < hw; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < num_drops; i = next.fetch_add(1))
                rows[i] = run_cdf_drop(c, fd, derive_seed(master_seed, i));
        });
    for (auto& t : pool) t.join();
    return rows;
}

inline std::string cdf_csv(const std::vector<CdfRow>& rows, const std::string& scheme_name) {
    std::ostringstream os;
    os << "drop_seed,scheme,n_pairs,status,min_info_bits,baseline_min_info_bits,cue_sinr_db\n";
    for (const auto& r : rows) {
        os << r.drop_seed << ',' << scheme_name << ',' << r.n_pairs << ',' << r.status << ','
           << fmt(r.min_info_opt) << ',' << fmt(r.min_info_baseline) << ',';
        for (std::size_t i = 0; i < r.cue_sinr_db.size(); ++i)
            os << (i ? ";" : "") << fmt(r.cue_sinr_db[i]);
        os << '\n';
    }
    return os.str();
}

// ---- schedule trace ----

inline std::string schedule_trace_csv(const ScenarioConfig& base,
                                      const std::vector<sched::TrafficReport>& reports,
                                      const sched::SchedulerOptions& opt,
                                      const pathloss::OmegaOptions& oo) {
    std::ostringstream os;
    os << "t_s,action,zeta,eta,coherence_time_s,elapsed_since_alloc_s\n";
    sched::ScheduleState st;
    frame::FrameDesign current;
    bool have_frame = false;
    for (const auto& rep : reports) {
        auto actions = sched::step(st, rep, opt);
        for (auto a : actions) {
            if (a == sched::Action::RunAlgorithm1) {
                ScenarioConfig c = base;
                c.avg_density = rep.density;
                current = frame::solve_frame_sp(c, pathloss::omega_quadrature(c, oo));
                have_frame = true;
            }
            os << fmt(rep.timestamp) << ',' << sched::to_string(a) << ','
               << (have_frame ? fmt(current.zeta) : "") << ','
               << (have_frame ? fmt(current.eta) : "") << ',' << fmt(st.coherence) << ','
               << fmt(st.elapsed_since_alloc) << '\n';
        }
    }
    return os.str();
}

// ---- link validation report ----

inline nlohmann::json link_validation_report(const ScenarioConfig& c, std::uint64_t seed,
                                             double band = 0.10) {
    nlohmann::json checks = nlohmann::json::array();
    Rng rng(seed);
    ScenarioConfig cc = c;
    cc.num_cues = std::min(c.num_cues, 2);
    std::array<int, 4> counts{1, 1, 0, 0};
    geometry::Topology topo = geometry::sample_topology(cc, counts, rng);
    auto bt = sinr::BetaTable::from(topo, pathloss::FadingModel::from(cc));
    linkmc::LinkDrawConfig lc;
    lc.scheme = sinr::PilotScheme::sp(166.0);
    lc.num_symbol_trials = 300;
    auto pilots = linkmc::assign_pilots(bt.n, bt.k, 166, rng);
    auto es = linkmc::empirical_sinr(bt, sinr::PowerAllocation::equal_power(
                                             bt.n, bt.k, lc.scheme, cc.max_power_v, cc.power_ratio),
                                     pilots, lc, rng);
    double worst = 0.0;
    for (int i = 0; i < bt.n; ++i)
        worst = std::max(worst, std::abs(es.empirical[i] / es.asymptotic[i] - 1.0));
    checks.push_back({{"check", "empirical_vs_asymptotic_sinr"},
                      {"max_rel_dev", worst},
                      {"band", band},
                      {"pass", worst <= band}});
    return {{"suite", "link_validation"}, {"antennas", lc.n_antennas}, {"checks", checks}};
}

// ---- dispatcher ----

inline ExperimentOutput run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    spec.base.validate();
    auto t0 = std::chrono::steady_clock::now();
    ExperimentOutput out;
    if (spec.id == "density_sweep") {
        out.csv = density_sweep_csv(spec.base, spec.sweep_values, spec.omega);
    } else if (spec.id == "reliability_sweep") {
        out.csv = reliability_sweep_csv(spec.base, spec.sweep_values, spec.omega);
    } else if (spec.id == "bandwidth_sweep") {
        out.csv = bandwidth_sweep_csv(spec.base, spec.sweep_values, spec.omega);
    } else if (spec.id == "convergence") {
        out.csv = convergence_csv(spec.base, spec.omega);
    } else if (spec.id == "cdf") {
        auto om = pathloss::omega_quadrature(spec.base, spec.omega);
        auto fd = frame::solve_frame_sp(spec.base, om);
        out.csv = cdf_csv(run_cdf(spec.base, fd, spec.num_drops, spec.master_seed), "SP");
    } else if (spec.id == "link_validation") {
        out.summary["report"] = link_validation_report(spec.base, spec.master_seed);
        out.csv = "check,pass\n";
        for (const auto& ch : out.summary["report"]["checks"])
            out.csv += ch["check"].get<std::string>() + "," +
                       (ch["pass"].get<bool>() ? std::string("1") : std::string("0")) + "\n";
    } else if (spec.id == "schedule_trace") {
        std::vector<sched::TrafficReport> reports;
        Rng rng(spec.master_seed);
        std::array<double, 4> rho = spec.base.avg_density;
        for (int i = 0; i < std::max(spec.num_drops, 16); ++i) {
            sched::TrafficReport r;
            r.timestamp = 1e-3 * (i + 1);
            if (i == 8)
                for (auto& d : rho) d *= 1.5;  // one density epoch mid-stream
            r.density = rho;
            r.refresh = geometry::sample_topology(spec.base, rng);
            reports.push_back(std::move(r));
        }
        out.csv = schedule_trace_csv(spec.base, reports, {}, spec.omega);
    } else {
        throw std::invalid_argument("run_experiment: unknown experiment id '" + spec.id + "'");
    }
    auto t1 = std::chrono::steady_clock::now();
    out.summary["experiment"] = spec.id;
    out.summary["master_seed"] = spec.master_seed;
    out.summary["config_hash"] = spec.base.geometry_hash();
    out.summary["num_drops"] = spec.num_drops;
    out.summary["wall_time_s"] = std::chrono::duration<double>(t1 - t0).count();
    out.summary["columns_units"] = {{"latency", "seconds"}, {"bandwidth", "Hz"},
                                    {"density", "vehicles per square meter"},
                                    {"zeta", "symbols"}, {"info", "bits"}};
    return out;
}

// ---- validation suites (every derived oracle, reported with errors) ----

struct SuiteResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double tolerance = 0.0;
    double seconds = 0.0;
};

inline std::vector<SuiteResult> validate_all(const ScenarioConfig& base, std::uint64_t seed,
                                             const pathloss::OmegaOptions& oo = {}) {
    std::vector<SuiteResult> out;
    auto timed = [&](const std::string& name, double tol, auto&& fn) {
        auto t0 = std::chrono::steady_clock::now();
        double measured = fn();
        auto t1 = std::chrono::steady_clock::now();
        out.push_back({name, measured <= tol, measured, tol,
                       std::chrono::duration<double>(t1 - t0).count()});
    };

    // 1. path-loss moments: quadrature vs 1e7-sample Monte Carlo
    timed("omega_quadrature_vs_montecarlo", 0.01, [&] {
        auto q = pathloss::omega_quadrature(base, oo);
        Rng rng(derive_seed(seed, 1));
        auto mc = pathloss::omega_montecarlo(base, 10000000, rng, oo);
        double worst = 0.0;
        for (int i = 0; i < 8; ++i)
            worst = std::max(worst, std::abs(q.as_array()[i] / mc.mean.as_array()[i] - 1.0));
        return worst;
    });

    // 2. frame-design derivatives vs central finite differences
    timed("frame_derivative_fd", 1e-6, [&] {
        auto om = pathloss::omega_quadrature(base, oo);
        double a_sp = sinr::a_sp(base, om, 1), a_rp = sinr::a_rp(base, om, 1);
        double b = fbl::b_coefficient(base.reliability), th = base.info_threshold;
        Rng rng(derive_seed(seed, 2));
        double worst = 0.0;
        std::vector<double> zs, es;
        for (int i = 0; i < 20; ++i) zs.push_back(rng.uniform(40.0, 400.0));
        for (int i = 0; i < 20; ++i) es.push_back(rng.uniform(0.05, 0.95));
        worst = std::max(worst, oracles::check_derivative(
                                    [&](double z) { return frame::f_sp(z, a_sp, b, th).surplus; },
                                    [&](double z) { return frame::f_sp(z, a_sp, b, th).dzeta; },
                                    zs).max_rel_err);
        worst = std::max(worst,
                         oracles::check_derivative(
                             [&](double z) { return frame::f_rp(0.4, z, a_rp, b, th).surplus; },
                             [&](double z) { return frame::f_rp(0.4, z, a_rp, b, th).dzeta; },
                             zs).max_rel_err);
        worst = std::max(worst,
                         oracles::check_derivative(
                             [&](double e) { return frame::f_rp(e, 250.0, a_rp, b, th).surplus; },
                             [&](double e) { return frame::f_rp(e, 250.0, a_rp, b, th).deta; },
                             es).max_rel_err);
        worst = std::max(worst,
                         oracles::check_derivative(
                             [&](double e) { return frame::f_rp(e, 250.0, a_rp, b, th).deta; },
                             [&](double e) { return frame::f_rp(e, 250.0, a_rp, b, th).deta2; },
                             es).max_rel_err);
        return worst;
    });

    // 3. Algorithm 1 roots confirmed by dense grid scans
    timed("frame_root_grid_confirmation", 0.0, [&] {
        auto om = pathloss::omega_quadrature(base, oo);
        auto sp = frame::solve_frame_sp(base, om);
        auto rp = frame::solve_frame_rp(base, om);
        double b = fbl::b_coefficient(base.reliability);
        double a_min = *std::min_element(sp.a_coeff.begin(), sp.a_coeff.end());
        bool ok = sp.cue_dominated ||
                  oracles::confirm_sp_root(a_min, b, base.info_threshold, sp.zeta);
        double psi2 = base.power_ratio * base.power_ratio;
        double pc = base.cue_sinr_thresholds.frame * sinr::cue_interference_sum(base, om) /
                    (2.0 * psi2);
        double a_rp = *std::min_element(rp.a_coeff.begin(), rp.a_coeff.end());
        ok = ok && oracles::confirm_rp_optimum(a_rp, b, base.info_threshold, pc, rp.eta, rp.zeta);
        return ok ? 0.0 : 1.0;
    });

    // 4. GP solver vs the exhaustive log-grid and bisection-feasibility oracles
    {
        auto t0 = std::chrono::steady_clock::now();
        auto om = pathloss::omega_quadrature(base, oo);
        auto fd = frame::solve_frame_sp(base, om);
        double grid_dev = 0.0, bis_dev = 0.0;
        for (int rep = 0; rep < 6; ++rep) {
            Rng rng(derive_seed(seed, 100 + rep));
            ScenarioConfig c = base;
            c.num_cues = 1;
            std::array<int, 4> counts{1, 1, 0, 0};
            auto topo = geometry::sample_topology(c, counts, rng);
            auto bt = sinr::BetaTable::from(topo, pathloss::FadingModel::from(c));
            auto g = gp::build_gp(bt, fd, c.cue_sinr_thresholds.allocation, c.max_power_v,
                                  c.power_ratio, c.reliability);
            auto res = gp::solve_gp(g);
            if (res.status != gp::SolveStatus::Optimal) {
                grid_dev = bis_dev = 1.0;
                break;
            }
            auto grid = oracles::gp_grid_search(bt, fd.pilot_scheme(),
                                                c.cue_sinr_thresholds.allocation, c.max_power_v,
                                                c.power_ratio, fd.lambda(), c.reliability);
            if (grid.best_min_gamma > 0.0)
                grid_dev = std::max(grid_dev, std::max(0.0, grid.best_min_gamma / res.phi_prime - 1.0));
            auto bis = oracles::gp_bisection(g);
            if (bis.feasible) bis_dev = std::max(bis_dev, std::abs(bis.phi_prime / res.phi_prime - 1.0));
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back({"gp_vs_grid_oracle", grid_dev <= 0.02, grid_dev, 0.02, secs});
        out.push_back({"gp_vs_bisection_oracle", bis_dev <= 0.005, bis_dev, 0.005, 0.0});
    }

    // 5. link-level Monte Carlo vs the asymptotic SINR forms
    timed("link_mc_vs_asymptotic", 0.10, [&] {
        auto rep = link_validation_report(base, derive_seed(seed, 3));
        double worst = 0.0;
        for (const auto& ch : rep["checks"]) worst = std::max(worst, ch["max_rel_dev"].get<double>());
        return worst;
    });

    return out;
}

}  // namespace urllc::exp
