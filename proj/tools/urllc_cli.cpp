// Command-line driver: frame design, power allocation, path-loss moments,
// figure sweeps, link validation and the semi-persistent scheduling trace.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "urllc/config.hpp"
#include "urllc/experiments.hpp"
#include "urllc/frame.hpp"
#include "urllc/geometry.hpp"
#include "urllc/gp.hpp"
#include "urllc/linkmc.hpp"
#include "urllc/oracles.hpp"
#include "urllc/pathloss.hpp"
#include "urllc/scheduler.hpp"
#include "urllc/sinr.hpp"

using nlohmann::json;
using namespace urllc;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    std::string p1_mode = "integral";
    std::string same_road = "slab";
    std::string cache_dir;
    std::optional<double> density;
    std::optional<int> cues;
    std::optional<double> reliability;
};

void add_common(CLI::App* app, CommonOpts& o) {
    app->add_option("--config", o.config_path, "ScenarioConfig JSON file");
    app->add_option("--out", o.out_dir, "output directory");
    app->add_option("--seed", o.seed, "master seed (logged on every run)");
    app->add_option("--omega-p1", o.p1_mode, "own-pair moment mode: integral|fixed");
    app->add_option("--same-road-exclusion", o.same_road, "same-road exclusion: slab|square");
    app->add_option("--cache-dir", o.cache_dir, "path-loss moment cache directory");
    app->add_option("--density", o.density, "override avg_density on all roads");
    app->add_option("--cues", o.cues, "override num_cues");
    app->add_option("--reliability", o.reliability, "override reliability target");
}

ScenarioConfig load_config(const CommonOpts& o) {
    ScenarioConfig c;
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) throw std::runtime_error("cannot open config file " + o.config_path);
        json j;
        in >> j;
        c = j.get<ScenarioConfig>();
    }
    if (o.density) c.avg_density = {*o.density, *o.density, *o.density, *o.density};
    if (o.cues) c.num_cues = *o.cues;
    if (o.reliability) c.reliability = *o.reliability;
    c.validate();
    return c;
}

pathloss::OmegaOptions omega_opts(const CommonOpts& o) {
    pathloss::OmegaOptions opts;
    if (o.p1_mode == "fixed") opts.p1_mode = pathloss::P1Mode::FixedSeparation;
    else if (o.p1_mode != "integral") throw std::runtime_error("--omega-p1 must be integral|fixed");
    if (o.same_road == "square") opts.same_road = pathloss::SameRoadExclusion::ProtectionSquare;
    else if (o.same_road != "slab") throw std::runtime_error("--same-road-exclusion must be slab|square");
    return opts;
}

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir + "/" + name);
    if (!out) throw std::runtime_error("cannot write " + dir + "/" + name);
    out << content;
    std::cerr << "wrote " << dir << "/" << name << "\n";
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"urban V2V URLLC frame design and resource allocation"};
    app.require_subcommand(1);

    CommonOpts o;
    std::string axis = "density", values_csv;
    int drops = 500;
    std::string scheme_name = "sp";
    std::string reports_path;
    std::uint64_t mc_samples = 0;

    auto* cmd_omega = app.add_subcommand("omega", "path-loss moment table");
    add_common(cmd_omega, o);
    cmd_omega->add_option("--mc", mc_samples, "also run the Monte Carlo oracle with this many samples");

    auto* cmd_frame = app.add_subcommand("frame", "optimal frame size for both pilot schemes");
    add_common(cmd_frame, o);

    auto* cmd_alloc = app.add_subcommand("allocate", "max-min power allocation on one sampled drop");
    add_common(cmd_alloc, o);
    cmd_alloc->add_option("--scheme", scheme_name, "sp|rp");

    auto* cmd_sweep = app.add_subcommand("sweep", "figure-style sweeps to CSV");
    add_common(cmd_sweep, o);
    cmd_sweep->add_option("--axis", axis, "density|reliability|bandwidth|convergence");
    cmd_sweep->add_option("--values", values_csv, "comma-separated sweep values");

    auto* cmd_cdf = app.add_subcommand("cdf", "seeded allocation drops to CSV");
    add_common(cmd_cdf, o);
    cmd_cdf->add_option("--drops", drops, "number of drops");

    auto* cmd_vlink = app.add_subcommand("validate-link", "link-level Monte Carlo validation");
    add_common(cmd_vlink, o);

    auto* cmd_sched = app.add_subcommand("schedule", "semi-persistent scheduling trace");
    add_common(cmd_sched, o);
    cmd_sched->add_option("--reports", reports_path, "line-delimited JSON traffic reports");

    auto* cmd_validate = app.add_subcommand("validate", "run every oracle suite");
    add_common(cmd_validate, o);

    CLI11_PARSE(app, argc, argv);

    try {
        ScenarioConfig cfg = load_config(o);
        auto oo = omega_opts(o);
        std::cerr << "seed: " << o.seed << "\n";

        if (cmd_omega->parsed()) {
            auto table = o.cache_dir.empty() ? pathloss::omega_quadrature(cfg, oo)
                                             : pathloss::omega_cached(cfg, oo, o.cache_dir);
            json j = {{"omega", table}, {"seed", o.seed}, {"config_hash", cfg.geometry_hash()}};
            if (mc_samples > 0) {
                Rng rng(o.seed);
                auto mc = pathloss::omega_montecarlo(cfg, mc_samples, rng, oo);
                j["monte_carlo"] = {{"mean", mc.mean}, {"stderr", mc.stderr_}, {"samples", mc_samples}};
            }
            write_file(o.out_dir, "omega.json", j.dump(2) + "\n");
            std::cout << j.dump(2) << "\n";
        } else if (cmd_frame->parsed()) {
            auto table = pathloss::omega_cached(cfg, oo, o.cache_dir);
            auto sp = frame::solve_frame_sp(cfg, table);
            auto rp = frame::solve_frame_rp(cfg, table);
            json j = {{"seed", o.seed},
                      {"sp", {{"design", sp}, {"region", frame::feasible_region(sp, cfg.coherence_bandwidth)}}},
                      {"rp", {{"design", rp}, {"region", frame::feasible_region(rp, cfg.coherence_bandwidth)}}}};
            write_file(o.out_dir, "frame.json", j.dump(2) + "\n");
            std::cout << j.dump(2) << "\n";
        } else if (cmd_alloc->parsed()) {
            auto table = pathloss::omega_cached(cfg, oo, o.cache_dir);
            auto fd = scheme_name == "rp" ? frame::solve_frame_rp(cfg, table)
                                          : frame::solve_frame_sp(cfg, table);
            Rng rng(o.seed);
            auto topo = geometry::sample_topology(cfg, rng);
            if (topo.num_pairs() == 0) throw std::runtime_error("empty drop: no V2V pairs sampled");
            auto bt = sinr::BetaTable::from(topo, pathloss::FadingModel::from(cfg));
            auto g = gp::build_gp(bt, fd, cfg.cue_sinr_thresholds.allocation, cfg.max_power_v,
                                  cfg.power_ratio, cfg.reliability);
            auto res = gp::solve_gp(g);
            json j = {{"seed", o.seed}, {"scheme", scheme_name}, {"frame", fd},
                      {"topology", topo}, {"result", res}};
            write_file(o.out_dir, "allocation.json", j.dump(2) + "\n");
            std::cout << j.dump(2) << "\n";
        } else if (cmd_sweep->parsed()) {
            exp::ExperimentSpec spec;
            spec.base = cfg;
            spec.master_seed = o.seed;
            spec.omega = oo;
            if (axis == "density") {
                spec.id = "density_sweep";
                spec.sweep_values = values_csv.empty()
                                        ? std::vector<double>{0.001, 0.0025, 0.005, 0.0075, 0.01}
                                        : parse_values(values_csv);
            } else if (axis == "reliability") {
                spec.id = "reliability_sweep";
                spec.sweep_values = values_csv.empty()
                                        ? std::vector<double>{1e-7, 1e-6, 1e-5, 1e-4, 1e-3}
                                        : parse_values(values_csv);
            } else if (axis == "bandwidth") {
                spec.id = "bandwidth_sweep";
                spec.sweep_values = values_csv.empty()
                                        ? std::vector<double>{1e5, 2e5, 3e5, 4e5, 5e5}
                                        : parse_values(values_csv);
            } else if (axis == "convergence") {
                spec.id = "convergence";
            } else {
                throw std::runtime_error("unknown sweep axis " + axis);
            }
            auto outp = exp::run_experiment(spec);
            write_file(o.out_dir, spec.id + ".csv", outp.csv);
            write_file(o.out_dir, spec.id + "_summary.json", outp.summary.dump(2) + "\n");
        } else if (cmd_cdf->parsed()) {
            exp::ExperimentSpec spec;
            spec.id = "cdf";
            spec.base = cfg;
            spec.num_drops = drops;
            spec.master_seed = o.seed;
            spec.omega = oo;
            auto outp = exp::run_experiment(spec);
            write_file(o.out_dir, "cdf.csv", outp.csv);
            write_file(o.out_dir, "cdf_summary.json", outp.summary.dump(2) + "\n");
        } else if (cmd_vlink->parsed()) {
            auto report = exp::link_validation_report(cfg, o.seed);
            write_file(o.out_dir, "link_validation.json", report.dump(2) + "\n");
            std::cout << report.dump(2) << "\n";
            for (const auto& ch : report["checks"])
                if (!ch["pass"].get<bool>()) return 2;
        } else if (cmd_sched->parsed()) {
            std::vector<sched::TrafficReport> reports;
            if (!reports_path.empty()) {
                std::ifstream in(reports_path);
                if (!in) throw std::runtime_error("cannot open " + reports_path);
                std::string line;
                while (std::getline(in, line)) {
                    if (line.empty()) continue;
                    reports.push_back(json::parse(line).get<sched::TrafficReport>());
                }
            } else {
                Rng rng(o.seed);
                auto rho = cfg.avg_density;
                for (int i = 0; i < 16; ++i) {
                    sched::TrafficReport r;
                    r.timestamp = 1e-3 * (i + 1);
                    if (i == 8)
                        for (auto& d : rho) d *= 1.5;
                    r.density = rho;
                    r.refresh = geometry::sample_topology(cfg, rng);
                    reports.push_back(std::move(r));
                }
            }
            auto csv = exp::schedule_trace_csv(cfg, reports, {}, oo);
            write_file(o.out_dir, "schedule_trace.csv", csv);
        } else if (cmd_validate->parsed()) {
            auto suites = exp::validate_all(cfg, o.seed, oo);
            bool all_pass = true;
            json j = json::array();
            for (const auto& s : suites) {
                std::cout << (s.pass ? "PASS " : "FAIL ") << s.name << "  measured=" << s.measured
                          << " tolerance=" << s.tolerance << " (" << s.seconds << " s)\n";
                j.push_back({{"name", s.name}, {"pass", s.pass}, {"measured", s.measured},
                             {"tolerance", s.tolerance}, {"seconds", s.seconds}});
                all_pass = all_pass && s.pass;
            }
            write_file(o.out_dir, "validate.json", j.dump(2) + "\n");
            if (!all_pass) return 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
