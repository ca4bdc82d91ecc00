#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace urllc {

// Linear-scale SINR thresholds for the cellular users: `frame` gates the
// frame-size optimization, `allocation` gates the power allocation.
struct CueSinrThresholds {
    double frame = 3.1622776601683795;  // 5 dB
    double allocation = 10.0;           // 10 dB
};

struct Tolerances {
    double zeta = 1e-4;
    double eta = 1e-4;
};

// All static scenario parameters. Defaults are the evaluation setup:
// 200 m x 8 m roads on a square grid, 3 m sidewalk, 12 m pair separation,
// 1 m protection half-length, 32-byte payload at error probability 1e-5.
struct ScenarioConfig {
    double road_length = 200.0;            // A_RL [m]
    double road_width = 8.0;               // A_RW [m]
    double sidewalk_width = 3.0;           // A_SW [m]
    double pair_separation = 12.0;         // r_V [m]
    double protection_half_length = 1.0;   // r_P [m]
    std::array<double, 4> avg_density = {0.0025, 0.0025, 0.0025, 0.0025};  // [veh/m^2]
    int num_cues = 4;                      // K
    double pathloss_const = 1e-3;          // theta
    double pathloss_exp = 3.0;             // alpha
    double max_power_v = 0.2;              // P^V_max [W]
    double power_ratio = 1.0;              // psi = P^C_max / P^V_max
    double reliability = 1e-5;             // target error probability
    double info_threshold = 256.0;         // payload [bits]
    CueSinrThresholds cue_sinr_thresholds;
    double coherence_bandwidth = 500e3;    // B_C [Hz]
    Tolerances tolerances;

    double max_power_c() const { return power_ratio * max_power_v; }
    double road_area() const { return road_length * road_width; }

    void validate() const {
        auto fail = [](const std::string& msg) { throw std::invalid_argument("ScenarioConfig: " + msg); };
        if (!(road_length > road_width && road_width > 0.0)) fail("need road_length > road_width > 0");
        if (!(sidewalk_width > 0.0)) fail("sidewalk_width must be > 0");
        if (!(2.0 * protection_half_length > 0.0 &&
              2.0 * protection_half_length < std::min(road_length, road_width)))
            fail("protection region does not fit the road");
        if (!(pair_separation > 0.0 && pair_separation < road_length)) fail("pair_separation out of range");
        for (double rho : avg_density)
            if (rho < 0.0) fail("densities must be >= 0");
        if (num_cues < 0) fail("num_cues must be >= 0");
        if (!(reliability > 0.0 && reliability < 0.5)) fail("reliability must lie in (0, 0.5)");
        if (!(pathloss_const > 0.0)) fail("pathloss_const must be > 0");
        if (!(pathloss_exp > 2.0)) fail("pathloss_exp must be > 2");
        if (!(max_power_v > 0.0 && power_ratio > 0.0)) fail("powers must be > 0");
        if (!(info_threshold > 0.0)) fail("info_threshold must be > 0");
        if (!(cue_sinr_thresholds.frame > 0.0 && cue_sinr_thresholds.allocation > 0.0))
            fail("CUE thresholds must be > 0");
        if (!(coherence_bandwidth > 0.0)) fail("coherence_bandwidth must be > 0");
        if (!(tolerances.zeta > 0.0 && tolerances.eta > 0.0)) fail("tolerances must be > 0");
    }

    // Hash over the fields that determine the path-loss moment table.
    std::uint64_t geometry_hash() const;
};

inline void to_json(nlohmann::json& j, const CueSinrThresholds& t) {
    j = {{"frame", t.frame}, {"allocation", t.allocation}};
}
inline void from_json(const nlohmann::json& j, CueSinrThresholds& t) {
    j.at("frame").get_to(t.frame);
    j.at("allocation").get_to(t.allocation);
}
inline void to_json(nlohmann::json& j, const Tolerances& t) {
    j = {{"zeta", t.zeta}, {"eta", t.eta}};
}
inline void from_json(const nlohmann::json& j, Tolerances& t) {
    j.at("zeta").get_to(t.zeta);
    j.at("eta").get_to(t.eta);
}

inline void to_json(nlohmann::json& j, const ScenarioConfig& c) {
    j = nlohmann::json{{"road_length", c.road_length},
                       {"road_width", c.road_width},
                       {"sidewalk_width", c.sidewalk_width},
                       {"pair_separation", c.pair_separation},
                       {"protection_half_length", c.protection_half_length},
                       {"avg_density", c.avg_density},
                       {"num_cues", c.num_cues},
                       {"pathloss_const", c.pathloss_const},
                       {"pathloss_exp", c.pathloss_exp},
                       {"max_power_v", c.max_power_v},
                       {"power_ratio", c.power_ratio},
                       {"reliability", c.reliability},
                       {"info_threshold", c.info_threshold},
                       {"cue_sinr_thresholds", c.cue_sinr_thresholds},
                       {"coherence_bandwidth", c.coherence_bandwidth},
                       {"tolerances", c.tolerances}};
}

// Unknown fields are rejected so that typoed keys cannot silently fall back
// to defaults.
inline void from_json(const nlohmann::json& j, ScenarioConfig& c) {
    static const char* known[] = {
        "road_length", "road_width", "sidewalk_width", "pair_separation",
        "protection_half_length", "avg_density", "num_cues", "pathloss_const",
        "pathloss_exp", "max_power_v", "power_ratio", "reliability",
        "info_threshold", "cue_sinr_thresholds", "coherence_bandwidth", "tolerances"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || (it.key() == k);
        if (!ok) throw std::invalid_argument("ScenarioConfig: unknown field '" + it.key() + "'");
    }
    auto get = [&j](const char* key, auto& dst) {
        if (j.contains(key)) j.at(key).get_to(dst);
    };
    get("road_length", c.road_length);
    get("road_width", c.road_width);
    get("sidewalk_width", c.sidewalk_width);
    get("pair_separation", c.pair_separation);
    get("protection_half_length", c.protection_half_length);
    get("avg_density", c.avg_density);
    get("num_cues", c.num_cues);
    get("pathloss_const", c.pathloss_const);
    get("pathloss_exp", c.pathloss_exp);
    get("max_power_v", c.max_power_v);
    get("power_ratio", c.power_ratio);
    get("reliability", c.reliability);
    get("info_threshold", c.info_threshold);
    get("cue_sinr_thresholds", c.cue_sinr_thresholds);
    get("coherence_bandwidth", c.coherence_bandwidth);
    get("tolerances", c.tolerances);
    c.validate();
}

inline std::uint64_t ScenarioConfig::geometry_hash() const {
    nlohmann::json j = {{"road_length", road_length},
                        {"road_width", road_width},
                        {"sidewalk_width", sidewalk_width},
                        {"pair_separation", pair_separation},
                        {"protection_half_length", protection_half_length},
                        {"pathloss_exp", pathloss_exp}};
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : j.dump()) h = (h ^ ch) * 0x100000001b3ULL;  // FNV-1a
    return h;
}

}  // namespace urllc
