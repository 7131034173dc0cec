#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "srdetect/detect.hpp"
#include "srdetect/montecarlo.hpp"

using namespace srdetect;

namespace {

// Observation solving lr_step(x, tp) == target.
double obs_for_lr(double target, double tp) {
    return (std::log(target) + 0.5 * tp * tp) / tp;
}

std::vector<double> constant_stream(double value, std::size_t n) {
    return std::vector<double>(n, value);
}

}  // namespace

TEST_CASE("sr_update recursion") {
    CHECK(sr_update({0.0, 0}, 0.5).r == doctest::Approx(0.5));
    CHECK(sr_update({3.0, 7}, 2.0).r == doctest::Approx(8.0));
    CHECK(sr_update({3.0, 7}, 2.0).n == 8);
    CHECK_THROWS_AS(sr_update({0.0, 0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(sr_update({0.0, 0}, -1.0), std::invalid_argument);

    SrState state;
    for (int i = 1; i <= 50; ++i) {
        state = sr_update(state, 1.0);
        CHECK(state.r == static_cast<double>(i));  // exact induction with unit LRs
        CHECK(state.n == i);
    }
}

TEST_CASE("sr statistic is positive after the first update") {
    for (double lr : {1e-12, 0.3, 1.0, 42.0}) CHECK(sr_update({0.0, 0}, lr).r > 0.0);
}

TEST_CASE("cusum_update reflection at zero") {
    CHECK(cusum_update({0.0, 0}, -1.0).w == 0.0);
    CHECK(cusum_update({2.3, 4}, 0.7).w == doctest::Approx(3.0));
    CHECK(cusum_update({0.2, 1}, -0.5).w == 0.0);

    CusumState state;
    for (double step : {0.4, 1.2, -0.3, 2.0}) state = cusum_update(state, step);
    CHECK(state.w > 0.0);
    state = cusum_update(state, -1e6);
    CHECK(state.w == 0.0);  // exact reset
    CHECK(state.n == 5);
}

TEST_CASE("run_to_alarm on a constant stream") {
    const GaussianModel model(0.5, 0.5);
    const double x2 = obs_for_lr(2.0, 0.5);

    SUBCASE("SR crosses at the hand-computed step") {
        ReplayStream stream(constant_stream(x2, 100));
        const auto run = run_to_alarm(stream, Procedure::Sr, 5.0, model);
        REQUIRE(run.crossed());
        CHECK(run.stop_time == 2);  // R_1 = 2, R_2 = 6
        CHECK(run.last_stat == doctest::Approx(6.0));
    }
    SUBCASE("threshold below the first-step statistic stops at 1") {
        ReplayStream stream(constant_stream(x2, 100));
        const auto run = run_to_alarm(stream, Procedure::Sr, 1.5, model);
        REQUIRE(run.crossed());
        CHECK(run.stop_time == 1);
    }
    SUBCASE("CUSUM accumulates log LRs") {
        ReplayStream stream(constant_stream(x2, 100));
        const auto run = run_to_alarm(stream, Procedure::Cusum, 2.0, model);
        REQUIRE(run.crossed());
        CHECK(run.stop_time == 3);  // log 2 per step: 0.693, 1.386, 2.079
    }
}

TEST_CASE("run_to_alarm reports truncation distinctly") {
    const GaussianModel model(0.5, 0.5);
    const double x_half = obs_for_lr(0.5, 0.5);

    SUBCASE("exhausted stream") {
        ReplayStream stream(constant_stream(x_half, 10));
        const auto run = run_to_alarm(stream, Procedure::Sr, 100.0, model);
        CHECK(run.reason == StopReason::StreamExhausted);
        CHECK_FALSE(run.crossed());
        CHECK(run.steps_consumed == 10);
        CHECK(run.last_stat > 0.0);  // partial state carried out
    }
    SUBCASE("step cap") {
        ReplayStream stream(constant_stream(x_half, 1000));
        const auto run = run_to_alarm(stream, Procedure::Sr, 100.0, model, false, 20);
        CHECK(run.reason == StopReason::CapReached);
        CHECK(run.steps_consumed == 20);
    }
    SUBCASE("invalid inputs") {
        ReplayStream stream(constant_stream(x_half, 4));
        CHECK_THROWS_AS(run_to_alarm(stream, Procedure::Sr, 0.0, model), std::invalid_argument);
        CHECK_THROWS_AS(run_to_alarm(stream, Procedure::Sr, 5.0, model, false, 0),
                        std::invalid_argument);
    }
}

TEST_CASE("recorded trajectories satisfy crossing minimality") {
    const GaussianModel model(0.0, 0.5);
    for (std::uint64_t seed : {1u, 7u, 99u}) {
        GaussianStream stream(0.0, std::nullopt, Xoshiro256PlusPlus(substream_seed(seed, 0)));
        const auto run = run_to_alarm(stream, Procedure::Sr, 30.0, model, true);
        REQUIRE(run.crossed());
        REQUIRE(run.trajectory.size() == static_cast<std::size_t>(run.stop_time));
        for (std::size_t i = 0; i + 1 < run.trajectory.size(); ++i)
            CHECK(run.trajectory[i].value < 30.0);
        CHECK(run.trajectory.back().value >= 30.0);
        CHECK(run.trajectory.back().value == run.last_stat);
    }
}

TEST_CASE("identical seeds give bit-identical runs") {
    const GaussianModel model(0.3, 0.4);
    auto run_once = [&] {
        GaussianStream stream(0.3, 50, Xoshiro256PlusPlus(substream_seed(11, 3)));
        return run_to_alarm(stream, Procedure::Sr, 40.0, model, true);
    };
    const auto a = run_once();
    const auto b = run_once();
    REQUIRE(a.crossed());
    CHECK(a.stop_time == b.stop_time);
    REQUIRE(a.trajectory.size() == b.trajectory.size());
    for (std::size_t i = 0; i < a.trajectory.size(); ++i)
        CHECK(a.trajectory[i].value == b.trajectory[i].value);
}

TEST_CASE("multi_cyclic_run semantics") {
    const GaussianModel model(0.5, 0.5);
    const double x2 = obs_for_lr(2.0, 0.5);

    SUBCASE("change point zero reduces to a single run") {
        ReplayStream stream(constant_stream(x2, 100));
        const auto mc = multi_cyclic_run(stream, Procedure::Sr, 5.0, model, 0);
        REQUIRE(mc.reason == StopReason::Crossed);
        CHECK(mc.false_alarms == 0);
        CHECK(mc.delay == 2);  // same as the run_to_alarm stop time
    }
    SUBCASE("alarms at or before the change point restart the statistic") {
        // With A = 5 the statistic alarms every 2 steps; change at 5 means
        // false alarms at n = 2 and 4, detection at n = 6.
        ReplayStream stream(constant_stream(x2, 100));
        const auto mc = multi_cyclic_run(stream, Procedure::Sr, 5.0, model, 5);
        REQUIRE(mc.reason == StopReason::Crossed);
        CHECK(mc.false_alarms == 2);
        CHECK(mc.delay == 1);
    }
    SUBCASE("pre-change-forever stream truncates at the cap") {
        GaussianStream stream(0.5, std::nullopt, Xoshiro256PlusPlus(substream_seed(5, 0)));
        const auto mc = multi_cyclic_run(stream, Procedure::Sr, 1e9, model, 1000, 5000);
        CHECK(mc.reason == StopReason::CapReached);
        CHECK(mc.steps_consumed == 5000);
    }
    SUBCASE("delay is always at least one") {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            GaussianStream stream(0.5, 30, Xoshiro256PlusPlus(substream_seed(seed, 1)));
            const auto mc = multi_cyclic_run(stream, Procedure::Sr, 20.0, model, 30);
            REQUIRE(mc.reason == StopReason::Crossed);
            CHECK(mc.delay >= 1);
        }
    }
}
