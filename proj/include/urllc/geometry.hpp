#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "urllc/config.hpp"
#include "urllc/rng.hpp"

namespace urllc::geometry {

enum class RoadRelation { Same, Perpendicular, Parallel };

// Fixed 4-road grid adjacency: roads 1 and 3 are parallel, 2 and 4 are
// parallel, everything else crosses.
inline RoadRelation road_relation(int u, int j) {
    if (u < 1 || u > 4 || j < 1 || j > 4) throw std::out_of_range("road_relation: road id must be 1..4");
    if (u == j) return RoadRelation::Same;
    if ((u + j) % 2 == 0) return RoadRelation::Parallel;
    return RoadRelation::Perpendicular;
}

struct Rect {
    double x0, x1, y0, y1;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
    bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
    Rect shrunk(double s) const { return {x0 + s, x1 - s, y0 + s, y1 - s}; }
};

struct Point {
    double x = 0.0, y = 0.0;
};

// Pinwheel layout: four A_RL x A_RW rectangles wound around the square
// building block, BS at the origin, sidewalk ring just inside the block.
class RoadGrid {
  public:
    explicit RoadGrid(const ScenarioConfig& c)
        : half_((c.road_length - c.road_width) / 2.0), w_(c.road_width),
          sw_(c.sidewalk_width), rp_(c.protection_half_length) {
        double h = half_, ww = w_;
        roads_[0] = {-h, h + ww, -h - ww, -h};      // bottom
        roads_[1] = {h, h + ww, -h, h + ww};        // right
        roads_[2] = {-h - ww, h, h, h + ww};        // top
        roads_[3] = {-h - ww, -h, -h - ww, h};      // left
        double len = 2.0 * h - sw_;                 // A_RL - A_RW - A_SW
        sidewalks_[0] = {-h, -h + len, -h, -h + sw_};
        sidewalks_[1] = {h - sw_, h, -h, -h + len};
        sidewalks_[2] = {h - len, h, h - sw_, h};
        sidewalks_[3] = {-h, -h + sw_, h - len, h};
    }

    const Rect& road(int u) const { return roads_.at(u - 1); }
    Rect placement(int u) const { return road(u).shrunk(rp_); }  // receiver support
    const std::array<Rect, 4>& sidewalks() const { return sidewalks_; }

  private:
    double half_, w_, sw_, rp_;
    std::array<Rect, 4> roads_;
    std::array<Rect, 4> sidewalks_;
};

struct PairPlacement {
    int road = 1;        // 1..4
    Point receiver;
    Point transmitter;   // exactly pair_separation away from the receiver
};

struct Topology {
    std::vector<PairPlacement> pairs;
    std::vector<Point> cues;
    std::array<int, 4> counts = {0, 0, 0, 0};  // D_u per road

    int num_pairs() const { return static_cast<int>(pairs.size()); }
    int num_cues() const { return static_cast<int>(cues.size()); }
};

// Poisson draw of the per-road pair count with mean rho*A_RL*A_RW/2.
inline int sample_pair_count(double rho, double road_length, double road_width, Rng& rng) {
    if (rho < 0.0) throw std::domain_error("sample_pair_count: rho must be >= 0");
    return rng.poisson(rho * road_length * road_width / 2.0);
}

inline std::array<int, 4> sample_counts(const ScenarioConfig& c, Rng& rng) {
    std::array<int, 4> out{};
    for (int u = 0; u < 4; ++u)
        out[u] = sample_pair_count(c.avg_density[u], c.road_length, c.road_width, rng);
    return out;
}

// One scenario drop. Receivers are uniform over the protection-shrunk road
// rectangle; the transmitter sits at a uniform-random bearing at distance
// r_V, resampled until it lands inside the road rectangle; CUEs are uniform
// over the sidewalk ring (pinwheel split, corners counted once).
inline Topology sample_topology(const ScenarioConfig& c, const std::array<int, 4>& counts, Rng& rng) {
    RoadGrid grid(c);
    for (int u = 1; u <= 4; ++u) {
        Rect p = grid.placement(u);
        if (!(p.width() > 0.0 && p.height() > 0.0))
            throw std::runtime_error("sample_topology: road too narrow for the protection shrink");
    }
    Topology topo;
    topo.counts = counts;
    const double two_pi = 2.0 * 3.14159265358979323846;
    for (int u = 1; u <= 4; ++u) {
        Rect support = grid.placement(u);
        const Rect& road = grid.road(u);
        for (int i = 0; i < counts[u - 1]; ++i) {
            PairPlacement pp;
            pp.road = u;
            pp.receiver = {rng.uniform(support.x0, support.x1), rng.uniform(support.y0, support.y1)};
            bool placed = false;
            for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
                double phi = rng.uniform(0.0, two_pi);
                Point t{pp.receiver.x + c.pair_separation * std::cos(phi),
                        pp.receiver.y + c.pair_separation * std::sin(phi)};
                if (road.contains(t.x, t.y)) {
                    pp.transmitter = t;
                    placed = true;
                }
            }
            if (!placed) {
                // r_V < A_RL guarantees room along the road axis on one side.
                bool horizontal = road.width() >= road.height();
                double sgn;
                if (horizontal)
                    sgn = (pp.receiver.x + c.pair_separation <= road.x1) ? 1.0 : -1.0;
                else
                    sgn = (pp.receiver.y + c.pair_separation <= road.y1) ? 1.0 : -1.0;
                pp.transmitter = horizontal
                    ? Point{pp.receiver.x + sgn * c.pair_separation, pp.receiver.y}
                    : Point{pp.receiver.x, pp.receiver.y + sgn * c.pair_separation};
                if (!road.contains(pp.transmitter.x, pp.transmitter.y))
                    throw std::runtime_error("sample_topology: cannot place transmitter on road");
            }
            topo.pairs.push_back(pp);
        }
    }
    for (int k = 0; k < c.num_cues; ++k) {
        const Rect& s = grid.sidewalks()[rng.uniform_int(4)];
        topo.cues.push_back({rng.uniform(s.x0, s.x1), rng.uniform(s.y0, s.y1)});
    }
    return topo;
}

inline Topology sample_topology(const ScenarioConfig& c, Rng& rng) {
    return sample_topology(c, sample_counts(c, rng), rng);
}

// Invariant audit used by tests and by the validation suites.
inline void audit_topology(const ScenarioConfig& c, const Topology& topo) {
    RoadGrid grid(c);
    std::array<int, 4> seen{};
    for (const auto& p : topo.pairs) {
        seen[p.road - 1]++;
        Rect support = grid.placement(p.road);
        if (!support.contains(p.receiver.x, p.receiver.y))
            throw std::runtime_error("audit: receiver outside shrunk rectangle");
        if (!grid.road(p.road).contains(p.transmitter.x, p.transmitter.y))
            throw std::runtime_error("audit: transmitter off road");
        double dx = p.transmitter.x - p.receiver.x, dy = p.transmitter.y - p.receiver.y;
        if (std::abs(std::hypot(dx, dy) - c.pair_separation) > 1e-9 * c.pair_separation)
            throw std::runtime_error("audit: pair separation mismatch");
    }
    for (int u = 0; u < 4; ++u)
        if (seen[u] != topo.counts[u]) throw std::runtime_error("audit: per-road count mismatch");
    for (const auto& q : topo.cues) {
        bool inside = false;
        for (const auto& s : grid.sidewalks()) inside = inside || s.contains(q.x, q.y);
        if (!inside) throw std::runtime_error("audit: CUE outside sidewalk ring");
    }
}

inline void to_json(nlohmann::json& j, const Topology& t) {
    nlohmann::json rx = nlohmann::json::array(), tx = nlohmann::json::array(),
                   cues = nlohmann::json::array();
    for (const auto& p : t.pairs) {
        rx.push_back({{"road", p.road}, {"x", p.receiver.x}, {"y", p.receiver.y}});
        tx.push_back({{"road", p.road}, {"x", p.transmitter.x}, {"y", p.transmitter.y}});
    }
    for (const auto& q : t.cues) cues.push_back({{"x", q.x}, {"y", q.y}});
    j = {{"v2v_receivers", rx}, {"v2v_transmitters", tx}, {"cues", cues}, {"counts", t.counts}};
}

inline void from_json(const nlohmann::json& j, Topology& t) {
    t.pairs.clear();
    t.cues.clear();
    const auto& rx = j.at("v2v_receivers");
    const auto& tx = j.at("v2v_transmitters");
    if (rx.size() != tx.size())
        throw std::invalid_argument("Topology: receiver/transmitter lists differ in length");
    for (std::size_t i = 0; i < rx.size(); ++i) {
        PairPlacement p;
        p.road = rx[i].at("road").get<int>();
        p.receiver = {rx[i].at("x").get<double>(), rx[i].at("y").get<double>()};
        p.transmitter = {tx[i].at("x").get<double>(), tx[i].at("y").get<double>()};
        t.pairs.push_back(p);
    }
    for (const auto& q : j.at("cues")) t.cues.push_back({q.at("x").get<double>(), q.at("y").get<double>()});
    j.at("counts").get_to(t.counts);
}

}  // namespace urllc::geometry
