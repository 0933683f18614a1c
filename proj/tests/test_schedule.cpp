#include "doctest.h"

#include <cmath>

#include "gvd/schedule.hpp"

using namespace gvd;

TEST_CASE("single-step schedule") {
    DiffusionSchedule s = build_schedule(1, 0.1, 0.1);
    REQUIRE(s.steps == 1);
    REQUIRE(s.alpha_bar.size() == 2);
    CHECK(s.alpha_bar[0] == 1.0);
    CHECK(s.alpha_bar[1] == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("two-step schedule accumulates the product") {
    DiffusionSchedule s = build_schedule(2, 0.1, 0.3);
    REQUIRE(s.alpha_bar.size() == 3);
    CHECK(s.alpha_bar[0] == 1.0);
    CHECK(s.alpha_bar[1] == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(s.alpha_bar[2] == doctest::Approx(0.63).epsilon(1e-15));
}

TEST_CASE("benchmark schedule matches an extended-precision product") {
    const int T = 1000;
    const double bmin = 1e-4, bmax = 2e-2;
    DiffusionSchedule s = build_schedule(T, bmin, bmax);
    REQUIRE(int(s.alpha_bar.size()) == T + 1);

    long double prod = 1.0L;
    for (int t = 1; t <= T; ++t) {
        long double beta = (long double)bmin + ((long double)bmax - (long double)bmin) * (t - 1) / (T - 1);
        prod *= 1.0L - beta;
        CHECK(s.alpha_bar[size_t(t)] == doctest::Approx(double(prod)).epsilon(1e-12));
    }
    CHECK(s.alpha_bar[1000] == doctest::Approx(4.035829765375683e-05).epsilon(1e-12));
}

TEST_CASE("schedule invariants hold") {
    DiffusionSchedule s = build_schedule(500, 1e-4, 2e-2);
    CHECK(s.alpha_bar[0] == 1.0);
    for (int t = 1; t <= s.steps; ++t) {
        CHECK(s.alpha_bar[size_t(t)] < s.alpha_bar[size_t(t) - 1]);
        CHECK(s.alpha_bar[size_t(t)] > 0.0);
        CHECK(s.alpha_bar[size_t(t)] <= 1.0);
    }
    s.validate();
}

TEST_CASE("alpha_bar_at and require_timestep enforce bounds") {
    DiffusionSchedule s = build_schedule(10, 0.01, 0.02);
    CHECK(s.alpha_bar_at(0) == 1.0);
    CHECK(s.alpha_bar_at(10) == s.alpha_bar[10]);
    CHECK_THROWS_AS(s.alpha_bar_at(11), error);
    CHECK_THROWS_AS(s.alpha_bar_at(-1), error);
    CHECK_NOTHROW(s.require_timestep(1));
    CHECK_NOTHROW(s.require_timestep(10));
    CHECK_THROWS_AS(s.require_timestep(0), error);
    CHECK_THROWS_AS(s.require_timestep(11), error);
}

TEST_CASE("invalid schedule parameters are config errors") {
    auto check_config = [](auto fn) {
        try {
            fn();
            FAIL("expected a throw");
        } catch (const error & e) {
            CHECK(e.kind() == error_kind::config);
            CHECK(e.exit_code() == 2);
        }
    };
    check_config([] { build_schedule(0, 0.1, 0.2); });
    check_config([] { build_schedule(10, 0.0, 0.2); });
    check_config([] { build_schedule(10, -0.1, 0.2); });
    check_config([] { build_schedule(10, 0.3, 0.2); });
    check_config([] { build_schedule(10, 0.1, 1.0); });
}

TEST_CASE("tampered schedules fail validation") {
    DiffusionSchedule s = build_schedule(5, 0.01, 0.05);
    s.alpha_bar[0] = 0.99;
    CHECK_THROWS_AS(s.validate(), error);
    s = build_schedule(5, 0.01, 0.05);
    s.alpha_bar[3] = s.alpha_bar[2];
    CHECK_THROWS_AS(s.validate(), error);
    s = build_schedule(5, 0.01, 0.05);
    s.alpha_bar.pop_back();
    CHECK_THROWS_AS(s.validate(), error);
}
