#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "urllc/geometry.hpp"

using namespace urllc;
using namespace urllc::geometry;

TEST_CASE("road relations match the fixed grid") {
    CHECK(road_relation(1, 1) == RoadRelation::Same);
    CHECK(road_relation(1, 3) == RoadRelation::Parallel);
    CHECK(road_relation(1, 2) == RoadRelation::Perpendicular);
    CHECK(road_relation(1, 4) == RoadRelation::Perpendicular);
    CHECK(road_relation(2, 4) == RoadRelation::Parallel);
    CHECK_THROWS(road_relation(0, 1));
    CHECK_THROWS(road_relation(1, 5));
}

TEST_CASE("road relations: symmetric, counts per road are 1/2/1") {
    for (int u = 1; u <= 4; ++u) {
        int same = 0, perp = 0, par = 0;
        for (int j = 1; j <= 4; ++j) {
            CHECK(road_relation(u, j) == road_relation(j, u));
            switch (road_relation(u, j)) {
                case RoadRelation::Same: same++; break;
                case RoadRelation::Perpendicular: perp++; break;
                case RoadRelation::Parallel: par++; break;
            }
        }
        CHECK(same == 1);
        CHECK(perp == 2);
        CHECK(par == 1);
    }
}

TEST_CASE("pinwheel rectangles tile the ring without overlap") {
    ScenarioConfig c;
    RoadGrid grid(c);
    double area = 0.0;
    for (int u = 1; u <= 4; ++u) area += grid.road(u).area();
    CHECK(area == doctest::Approx(4.0 * c.road_area()));
    // pairwise disjoint interiors
    for (int u = 1; u <= 4; ++u)
        for (int j = u + 1; j <= 4; ++j) {
            const Rect &a = grid.road(u), &b = grid.road(j);
            double ox = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
            double oy = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
            CHECK((ox <= 1e-12 || oy <= 1e-12));
        }
    double swarea = 0.0;
    for (const auto& s : grid.sidewalks()) swarea += s.area();
    CHECK(swarea == doctest::Approx(4.0 * (c.road_length - c.road_width - c.sidewalk_width) *
                                    c.sidewalk_width));
}

TEST_CASE("poisson pair counts: zero density and calibrated mean") {
    Rng rng(42);
    CHECK(sample_pair_count(0.0, 200.0, 8.0, rng) == 0);

    // mean 4 per road at rho = 0.005 over the 200 x 8 road
    const int n = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        int d = sample_pair_count(0.0025, 200.0, 8.0, rng);
        sum += d;
        sumsq += double(d) * d;
    }
    double mean = sum / n;
    CHECK(mean == doctest::Approx(2.0).epsilon(0.01));
    double var = sumsq / n - mean * mean;
    CHECK(var / mean > 0.97);
    CHECK(var / mean < 1.03);
}

TEST_CASE("sixteen expected pairs at the convergence-figure density") {
    ScenarioConfig c;
    double mean_per_road = 0.005 * c.road_length * c.road_width / 2.0;
    CHECK(mean_per_road == doctest::Approx(4.0));
    CHECK(4.0 * mean_per_road == doctest::Approx(16.0));
}

TEST_CASE("empty drop") {
    ScenarioConfig c;
    c.num_cues = 0;
    Rng rng(1);
    Topology t = sample_topology(c, {0, 0, 0, 0}, rng);
    CHECK(t.num_pairs() == 0);
    CHECK(t.num_cues() == 0);
    CHECK_NOTHROW(audit_topology(c, t));
}

TEST_CASE("sampled drops pass the invariant audit") {
    ScenarioConfig c;
    c.num_cues = 6;
    Rng rng(7);
    for (int rep = 0; rep < 200; ++rep) {
        Topology t = sample_topology(c, rng);
        CHECK_NOTHROW(audit_topology(c, t));
    }
}

TEST_CASE("receiver positions are uniform over the shrunk rectangle") {
    ScenarioConfig c;
    c.num_cues = 0;
    Rng rng(3);
    RoadGrid grid(c);
    Rect support = grid.placement(1);
    double cx = 0.5 * (support.x0 + support.x1), cy = 0.5 * (support.y0 + support.y1);
    double sx = 0.0, sy = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        Topology t = sample_topology(c, {1, 0, 0, 0}, rng);
        sx += t.pairs[0].receiver.x;
        sy += t.pairs[0].receiver.y;
    }
    // empirical mean within 1% of the centroid (scaled by the support extent)
    CHECK(std::abs(sx / n - cx) < 0.01 * support.width());
    CHECK(std::abs(sy / n - cy) < 0.01 * support.height());
}

TEST_CASE("topology JSON round-trip") {
    ScenarioConfig c;
    Rng rng(11);
    Topology t = sample_topology(c, {2, 1, 0, 3}, rng);
    nlohmann::json j = t;
    Topology back = j.get<Topology>();
    CHECK(back.num_pairs() == t.num_pairs());
    CHECK(back.counts == t.counts);
    CHECK(back.pairs[0].receiver.x == doctest::Approx(t.pairs[0].receiver.x));
    CHECK_NOTHROW(audit_topology(c, back));
}

TEST_CASE("narrow road is rejected") {
    ScenarioConfig c;
    c.road_width = 2.0;  // equals the protection square side
    Rng rng(5);
    CHECK_THROWS(sample_topology(c, {1, 0, 0, 0}, rng));
}
