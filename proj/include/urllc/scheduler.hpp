#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "urllc/frame.hpp"
#include "urllc/geometry.hpp"

namespace urllc::sched {

inline constexpr double kSpeedOfLight = 3e8;  // m/s

// Linear velocity-density closure: v = v_f * (1 - rho/rho_max), clamped at 0.
struct VelocityLaw {
    double free_flow = 60.0 / 3.6;  // m/s
    double rho_max = 0.05;          // veh/m^2

    double operator()(double rho) const {
        return std::max(free_flow * (1.0 - rho / rho_max), 0.0);
    }
};

// Coherence time from the maximum Doppler shift; infinite for a static scene.
inline double coherence_time(double velocity, double carrier_freq_hz) {
    if (!(carrier_freq_hz > 0.0)) throw std::domain_error("coherence_time: carrier must be > 0");
    if (velocity < 0.0) throw std::domain_error("coherence_time: velocity must be >= 0");
    if (velocity == 0.0) return std::numeric_limits<double>::infinity();
    double num = 9.0 * kSpeedOfLight * kSpeedOfLight;
    double den = 16.0 * 3.14159265358979323846 * carrier_freq_hz * carrier_freq_hz * velocity * velocity;
    return std::sqrt(num / den);
}

struct TrafficReport {
    double timestamp = 0.0;                    // s
    std::array<double, 4> density{};           // rho per road
    std::optional<geometry::Topology> refresh; // location refresh, if any
};

inline void to_json(nlohmann::json& j, const TrafficReport& r) {
    j = {{"t", r.timestamp}, {"rho", r.density}};
    if (r.refresh) j["topology"] = *r.refresh;
}
inline void from_json(const nlohmann::json& j, TrafficReport& r) {
    j.at("t").get_to(r.timestamp);
    j.at("rho").get_to(r.density);
    if (j.contains("topology")) r.refresh = j.at("topology").get<geometry::Topology>();
}

enum class Action { RunAlgorithm1, BroadcastPilotAllocation, ReallocatePower, Maintain };

inline const char* to_string(Action a) {
    switch (a) {
        case Action::RunAlgorithm1: return "RunAlgorithm1";
        case Action::BroadcastPilotAllocation: return "BroadcastPilotAllocation";
        case Action::ReallocatePower: return "ReallocatePower";
        default: return "Maintain";
    }
}

struct SchedulerOptions {
    double density_epoch_threshold = 0.10;  // relative change that reopens Algorithm 1
    double carrier_freq_hz = 2e9;
    double alloc_exec_time = 0.0;  // T_RA spent executing an allocation, config constant
    VelocityLaw velocity;
};

struct ScheduleState {
    double last_time = -std::numeric_limits<double>::infinity();
    double elapsed_since_alloc = 0.0;  // running T_RA
    double coherence = std::numeric_limits<double>::infinity();  // current T_C
    std::array<double, 4> density_epoch{};  // densities at the last epoch
    int epoch_counter = 0;
    bool initialized = false;
};

// One step of the semi-persistent loop. A density epoch reruns the frame
// design and rebroadcasts pilots (power follows); a pure location refresh
// reallocates power only once the running time exceeds the coherence time;
// anything else maintains the current policy.
inline std::vector<Action> step(ScheduleState& st, const TrafficReport& report,
                                const SchedulerOptions& opt = {}) {
    if (report.timestamp <= st.last_time)
        throw std::invalid_argument("scheduler: stale report (timestamps must increase)");
    double dt = st.initialized ? report.timestamp - st.last_time : 0.0;
    st.last_time = report.timestamp;
    st.elapsed_since_alloc += dt;

    double rho_mean = 0.0;
    for (double r : report.density) rho_mean += r / 4.0;
    st.coherence = coherence_time(opt.velocity(rho_mean), opt.carrier_freq_hz);

    bool epoch = !st.initialized;
    if (st.initialized) {
        for (int u = 0; u < 4; ++u) {
            double ref = std::max(std::abs(st.density_epoch[u]), 1e-12);
            if (std::abs(report.density[u] - st.density_epoch[u]) / ref > opt.density_epoch_threshold)
                epoch = true;
        }
    }
    st.initialized = true;

    if (epoch) {
        st.density_epoch = report.density;
        st.epoch_counter++;
        st.elapsed_since_alloc = opt.alloc_exec_time;
        return {Action::RunAlgorithm1, Action::BroadcastPilotAllocation, Action::ReallocatePower};
    }
    if (report.refresh && st.elapsed_since_alloc > st.coherence) {
        st.elapsed_since_alloc = opt.alloc_exec_time;
        return {Action::ReallocatePower};
    }
    return {Action::Maintain};
}

}  // namespace urllc::sched
