#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "urllc/scheduler.hpp"

using namespace urllc;
using namespace urllc::sched;

TEST_CASE("coherence time formula") {
    double v = 60.0 / 3.6;
    CHECK(coherence_time(v, 2e9) == doctest::Approx(3.808279688947355e-3).epsilon(1e-12));
    CHECK(coherence_time(v, 4e9) == doctest::Approx(0.5 * coherence_time(v, 2e9)).epsilon(1e-12));
    CHECK(std::isinf(coherence_time(0.0, 2e9)));
    CHECK_THROWS(coherence_time(v, 0.0));
    CHECK_THROWS(coherence_time(-1.0, 2e9));
}

TEST_CASE("velocity law endpoints") {
    VelocityLaw law;
    CHECK(law(0.0) == doctest::Approx(law.free_flow));
    CHECK(law(law.rho_max) == doctest::Approx(0.0));
    CHECK(law(2.0 * law.rho_max) == doctest::Approx(0.0));  // clamped
}

namespace {
TrafficReport report(double t, double rho, bool with_topology) {
    TrafficReport r;
    r.timestamp = t;
    r.density = {rho, rho, rho, rho};
    if (with_topology) r.refresh = geometry::Topology{};
    return r;
}
}  // namespace

TEST_CASE("density epochs rerun the frame design; refreshes only reallocate") {
    SchedulerOptions opt;  // 60 km/h free flow at rho=0 -> finite T_C at small rho
    ScheduleState st;
    auto first = step(st, report(0.001, 0.0025, false), opt);
    REQUIRE(first.size() == 3);
    CHECK(first[0] == Action::RunAlgorithm1);
    CHECK(first[1] == Action::BroadcastPilotAllocation);
    CHECK(first[2] == Action::ReallocatePower);
    CHECK(st.epoch_counter == 1);

    // unchanged density inside the coherence window: maintain
    auto second = step(st, report(0.002, 0.0025, false), opt);
    REQUIRE(second.size() == 1);
    CHECK(second[0] == Action::Maintain);

    // a 50 percent density change is an epoch
    auto third = step(st, report(0.003, 0.00375, false), opt);
    CHECK(third[0] == Action::RunAlgorithm1);
    CHECK(st.epoch_counter == 2);

    // stale report rejected
    CHECK_THROWS(step(st, report(0.001, 0.00375, false), opt));
}

TEST_CASE("location refreshes reallocate every fourth report at 1 ms spacing") {
    SchedulerOptions opt;
    opt.velocity.free_flow = 60.0 / 3.6;
    opt.velocity.rho_max = 1e9;  // keep v at 60 km/h so T_C stays 3.81 ms
    ScheduleState st;
    std::vector<int> realloc_reports;
    for (int i = 1; i <= 13; ++i) {
        auto actions = step(st, report(1e-3 * i, 0.0025, true), opt);
        for (auto a : actions)
            if (a == Action::ReallocatePower) realloc_reports.push_back(i);
    }
    // the first report is the initial epoch; afterwards every fourth report
    CHECK(realloc_reports == std::vector<int>{1, 5, 9, 13});
}

TEST_CASE("elapsed time between reallocations exceeds the coherence time") {
    SchedulerOptions opt;
    opt.velocity.rho_max = 1e9;
    ScheduleState st;
    double last_realloc = -1.0, tc_at_last = 0.0;
    for (int i = 1; i <= 40; ++i) {
        double t = 1e-3 * i;
        auto actions = step(st, report(t, 0.0025, true), opt);
        for (auto a : actions)
            if (a == Action::ReallocatePower) {
                if (last_realloc >= 0.0) CHECK(t - last_realloc > tc_at_last);
                last_realloc = t;
                tc_at_last = st.coherence;
            }
    }
}

TEST_CASE("no frame redesign on pure location refreshes") {
    SchedulerOptions opt;
    ScheduleState st;
    int redesigns = 0;
    for (int i = 1; i <= 20; ++i) {
        auto actions = step(st, report(1e-3 * i, 0.0025, true), opt);
        for (auto a : actions)
            if (a == Action::RunAlgorithm1) redesigns++;
    }
    CHECK(redesigns == 1);  // only the initial epoch
    CHECK(st.epoch_counter == 1);
}

TEST_CASE("identical report streams give identical action traces") {
    SchedulerOptions opt;
    auto run = [&] {
        ScheduleState st;
        std::vector<Action> trace;
        for (int i = 1; i <= 15; ++i) {
            double rho = i < 8 ? 0.0025 : 0.004;
            for (auto a : step(st, report(1e-3 * i, rho, i % 2 == 0), opt)) trace.push_back(a);
        }
        return trace;
    };
    CHECK(run() == run());
}

TEST_CASE("unbounded coherence freezes reallocation") {
    SchedulerOptions opt;
    opt.velocity.rho_max = 0.01;  // density at rho_max stops traffic
    ScheduleState st;
    step(st, report(0.001, 0.01, true), opt);
    CHECK(std::isinf(st.coherence));
    for (int i = 2; i <= 10; ++i) {
        auto actions = step(st, report(1e-3 * i, 0.01, true), opt);
        REQUIRE(actions.size() == 1);
        CHECK(actions[0] == Action::Maintain);
    }
}

TEST_CASE("traffic report JSON round trip") {
    TrafficReport r;
    r.timestamp = 0.25;
    r.density = {0.001, 0.002, 0.003, 0.004};
    nlohmann::json j = r;
    auto back = j.get<TrafficReport>();
    CHECK(back.timestamp == r.timestamp);
    CHECK(back.density == r.density);
    CHECK(!back.refresh.has_value());
}
