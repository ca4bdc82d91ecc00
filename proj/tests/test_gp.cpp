#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "urllc/gp.hpp"
#include "urllc/oracles.hpp"
#include "urllc/pathloss.hpp"

using namespace urllc;
using namespace urllc::gp;
using geometry::Topology;

namespace {

Topology drop_2p1c() {
    Topology t;
    t.pairs.push_back({1, {10.0, -100.0}, {22.0, -100.0}});
    t.pairs.push_back({1, {60.0, -98.0}, {48.0, -98.0}});
    t.counts = {2, 0, 0, 0};
    t.cues.push_back({-30.0, -94.5});
    return t;
}

frame::FrameDesign sp_frame(double zeta = 166.0) {
    frame::FrameDesign fd;
    fd.scheme = sinr::PilotScheme::Kind::SP;
    fd.zeta = zeta;
    return fd;
}

frame::FrameDesign rp_frame(double eta = 0.37, double zeta = 246.0) {
    frame::FrameDesign fd;
    fd.scheme = sinr::PilotScheme::Kind::RP;
    fd.eta = eta;
    fd.zeta = zeta;
    return fd;
}

double min_pair_info(const sinr::BetaTable& bt, const sinr::PowerAllocation& a,
                     const sinr::PilotScheme& s, double lambda, double eps) {
    auto g = sinr::gamma_v_instance(bt, a, s);
    double mn = std::numeric_limits<double>::infinity();
    for (double v : g) mn = std::min(mn, v);
    return fbl::info_bits(mn, lambda, eps);
}

}  // namespace

TEST_CASE("instance structure: constraint kinds and SP squared terms") {
    auto bt = sinr::BetaTable::from(drop_2p1c(), pathloss::FadingModel{1e-3, 3.0});
    auto grp = build_gp(bt, rp_frame(), 10.0, 0.2, 1.0, 1e-5);
    CHECK(grp.count(ConstraintKind::Pair) == 2);
    CHECK(grp.count(ConstraintKind::Cue) == 1);
    CHECK(grp.count(ConstraintKind::Floor) == 1);
    CHECK(grp.count(ConstraintKind::BoxUpper) == 6);
    CHECK(grp.count(ConstraintKind::BoxLower) == 6);
    CHECK(grp.n_vars == 7);  // 6 powers + phi'

    // RP pair constraint: one term per interfering pair plus one per CUE
    CHECK(grp.constraints[0].terms.size() == 2);
    // SP adds squared own-power monomials from every transmitter
    auto gsp = build_gp(bt, sp_frame(), 10.0, 0.2, 1.0, 1e-5);
    CHECK(gsp.constraints[0].terms.size() == 5);  // 1 pq + 2 p^2(v2v) + 1 pq(cue) + 1 p^2(cue)
    CHECK_THROWS(build_gp(sinr::BetaTable{}, sp_frame(), 10.0, 0.2, 1.0, 1e-5));
}

TEST_CASE("constraint evaluation is consistent with the SINR module") {
    auto bt = sinr::BetaTable::from(drop_2p1c(), pathloss::FadingModel{1e-3, 3.0});
    for (auto fd : {rp_frame(), sp_frame()}) {
        auto g = build_gp(bt, fd, 10.0, 0.2, 1.0, 1e-5);
        auto scheme = fd.pilot_scheme();
        std::vector<double> x(g.n_vars);
        sinr::PowerAllocation a;
        a.p_v = {0.06, 0.03};
        a.q_v = {0.05, 0.08};
        a.p_c = {0.04};
        a.q_c = {0.07};
        double phi_prime = 1.7;
        x = {a.p_v[0], a.p_v[1], a.q_v[0], a.q_v[1], a.p_c[0], a.q_c[0], phi_prime};
        auto gv = sinr::gamma_v_instance(bt, a, scheme);
        auto gc = sinr::gamma_c_instance(bt, a, scheme);
        for (int i = 0; i < 2; ++i)
            CHECK(eval_posynomial(g.constraints[i], x) ==
                  doctest::Approx(phi_prime / gv[i]).epsilon(1e-12));
        CHECK(eval_posynomial(g.constraints[2], x) == doctest::Approx(10.0 / gc[0]).epsilon(1e-12));
    }
}

TEST_CASE("symmetric two-pair instance yields equal powers and equal SINRs") {
    Topology t;
    t.pairs.push_back({1, {-20.0, -100.0}, {-8.0, -100.0}});
    t.pairs.push_back({1, {28.0, -100.0}, {16.0, -100.0}});
    t.counts = {2, 0, 0, 0};
    auto bt = sinr::BetaTable::from(t, pathloss::FadingModel{1e-3, 3.0});
    auto g = build_gp(bt, sp_frame(), 10.0, 0.2, 1.0, 1e-5);
    auto res = solve_gp(g);
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(res.alloc.p_v[0] == doctest::Approx(res.alloc.p_v[1]).epsilon(1e-4));
    CHECK(res.alloc.q_v[0] == doctest::Approx(res.alloc.q_v[1]).epsilon(1e-4));
    auto gv = sinr::gamma_v_instance(bt, res.alloc, g.scheme);
    CHECK(gv[0] == doctest::Approx(gv[1]).epsilon(1e-4));
}

TEST_CASE("optimum against the grid and bisection oracles, activity, KKT") {
    auto bt = sinr::BetaTable::from(drop_2p1c(), pathloss::FadingModel{1e-3, 3.0});
    for (auto fd : {rp_frame(), sp_frame()}) {
        auto g = build_gp(bt, fd, 10.0, 0.2, 1.0, 1e-5);
        auto res = solve_gp(g);
        REQUIRE(res.status == SolveStatus::Optimal);
        CHECK(res.kkt_residual <= 1e-6);
        CHECK(res.alloc.valid_for(g.scheme, 0.2, 1.0));

        // epigraph tightness: phi' equals the minimum pair SINR
        auto gv = sinr::gamma_v_instance(bt, res.alloc, g.scheme);
        double mn = std::min(gv[0], gv[1]);
        CHECK(res.phi_prime == doctest::Approx(mn).epsilon(1e-5));

        // every CUE meets the allocation threshold
        for (double v : sinr::gamma_c_instance(bt, res.alloc, g.scheme))
            CHECK(v >= 10.0 * (1.0 - 1e-6));

        // phi equals the minimum information at the returned allocation
        CHECK(res.phi_bits ==
              doctest::Approx(min_pair_info(bt, res.alloc, g.scheme, g.lambda, 1e-5))
                  .epsilon(1e-5));

        // no point of the exhaustive feasible grid may beat the optimum; the
        // tight two-sided certificate comes from the bisection oracle, which
        // resolves the same supremum the barrier attains
        auto grid = oracles::gp_grid_search(bt, g.scheme, 10.0, 0.2, 1.0, g.lambda, 1e-5);
        REQUIRE(grid.best_min_gamma > 0.0);
        CHECK(grid.best_min_gamma <= res.phi_prime * 1.02);

        auto bis = oracles::gp_bisection(g);
        REQUIRE(bis.feasible);
        CHECK(std::abs(res.phi_prime / bis.phi_prime - 1.0) < 0.005);
    }
}

TEST_CASE("tightening the CUE threshold never helps the pairs") {
    auto bt = sinr::BetaTable::from(drop_2p1c(), pathloss::FadingModel{1e-3, 3.0});
    double prev = std::numeric_limits<double>::infinity();
    for (double th_db : {10.0, 15.0, 20.0}) {
        auto g = build_gp(bt, sp_frame(), std::pow(10.0, th_db / 10.0), 0.2, 1.0, 1e-5);
        auto res = solve_gp(g);
        REQUIRE(res.status == SolveStatus::Optimal);
        CHECK(res.phi_prime <= prev * (1.0 + 1e-9));
        prev = res.phi_prime;
    }
}

TEST_CASE("phi recovery: floor maps to zero information, round trip is exact") {
    auto fd = sp_frame();
    double lambda = fd.lambda();
    double b = fbl::b_coefficient(1e-5);
    AllocationResult r;
    r.phi_prime = std::pow(2.0, b / std::sqrt(lambda)) - 1.0;  // the floor level
    CHECK(recover_phi(r, fd, 1e-5) == doctest::Approx(0.0).epsilon(1e-9));

    for (double phi : {10.0, 256.0, 900.0}) {
        double phi_prime = std::pow(2.0, (phi + b * std::sqrt(lambda)) / lambda) - 1.0;
        AllocationResult rr;
        rr.phi_prime = phi_prime;
        CHECK(recover_phi(rr, fd, 1e-5) == doctest::Approx(phi).epsilon(1e-12));
    }
}

TEST_CASE("unreachable CUE threshold reports infeasible") {
    auto bt = sinr::BetaTable::from(drop_2p1c(), pathloss::FadingModel{1e-3, 3.0});
    auto g = build_gp(bt, sp_frame(), 1e12, 0.2, 1.0, 1e-5);
    auto res = solve_gp(g);
    CHECK(res.status == SolveStatus::Infeasible);
}

TEST_CASE("solver determinism") {
    auto bt = sinr::BetaTable::from(drop_2p1c(), pathloss::FadingModel{1e-3, 3.0});
    auto g = build_gp(bt, sp_frame(), 10.0, 0.2, 1.0, 1e-5);
    auto a = solve_gp(g), b = solve_gp(g);
    CHECK(a.phi_prime == b.phi_prime);
    CHECK(a.alloc.p_v[0] == b.alloc.p_v[0]);
}
