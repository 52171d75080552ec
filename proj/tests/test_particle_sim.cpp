#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ripening/particle_sim.hpp"
#include "ripening/rng.hpp"

using namespace ripening;

namespace {

ScaleParameters testScale() { return ScaleParameters::make(0.1, 4.0); }  // delta^alpha = 1e-4

ScaleParameters zeroCoupling() {
    // alpha large enough that delta^alpha underflows any test tolerance
    return ScaleParameters::make(1e-4, 64.0);
}

}  // namespace

TEST_CASE("integrator config validation") {
    IntegratorConfig config;
    CHECK_NOTHROW(config.validate());
    config.extinction_radius = config.freeze_threshold;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = IntegratorConfig{};
    config.tolerance = 0.0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

TEST_CASE("monodisperse system is stationary") {
    ParticleSystem s = makeSystemRadiiOnly(zeroCoupling(), std::vector<double>(8, 1.0));
    IntegratorConfig config;
    Trajectory traj = simulate(s, 0.5, config, 0.1);
    for (const ParticleSystem& snap : traj.snapshots)
        for (double r : snap.radii) CHECK(r == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(traj.extinction_log.empty());
}

TEST_CASE("two particles: conservation, competition, survivor radius") {
    ParticleSystem s = makeSystemRadiiOnly(zeroCoupling(), {1.0, 2.0});
    IntegratorConfig config;
    Trajectory traj = simulate(s, 2.0, config, 0.02);

    // volume sum R^3 = 9 along the whole trajectory, small shrinks, large grows
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const ParticleSystem& snap = traj.snapshots[k];
        CHECK(snap.totalVolume() == doctest::Approx(9.0).epsilon(1e-9));
        if (snap.active[0]) {
            CHECK(snap.radii[0] <= 1.0 + 1e-12);
            CHECK(snap.radii[1] >= 2.0 - 1e-12);
        }
    }
    // the small particle dies and the survivor equilibrates at 9^(1/3)
    REQUIRE(traj.extinction_log.size() == 1);
    CHECK(traj.extinction_log.front().index == 0);
    const ParticleSystem& last = traj.snapshots.back();
    CHECK(last.activeCount() == 1);
    CHECK(last.radii[1] == doctest::Approx(std::cbrt(9.0)).epsilon(1e-8));
    // once alone, the survivor is a fixed point: u_bar = 1/R
    CHECK(mean_field(last).u_bar == doctest::Approx(1.0 / last.radii[1]).epsilon(1e-12));
}

TEST_CASE("frozen-field extinction time") {
    IntegratorConfig config;
    config.freeze_threshold = 0.2;
    config.extinction_radius = 1e-6;

    SUBCASE("u_bar = 0: tau = (R0^2 - r_ext^2)/2 exactly") {
        const auto tau = detect_extinction(0.1, 0.0, 1.0, config, 0.0);
        REQUIRE(tau.has_value());
        const double expected = 0.5 * (0.01 - 1e-12);
        CHECK(*tau == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("survives a short dt") {
        CHECK_FALSE(detect_extinction(0.1, 0.0, 1e-4, config, 0.0).has_value());
    }
    SUBCASE("positive u_bar slows the collapse but stays within the sandwich") {
        const auto tau = detect_extinction(0.1, 1.0, 1.0, config, 0.0);
        REQUIRE(tau.has_value());
        CHECK(*tau > 0.5 * 0.01 * (1.0 - 1e-9));  // slower than free collapse
        CHECK(*tau < 0.01);                        // and faster than Rdot = -1/(2R)
    }
    SUBCASE("already below the extinction radius") {
        CHECK(detect_extinction(5e-7, 0.0, 1.0, config, 0.0) == 0.0);
    }
    SUBCASE("contract violations") {
        CHECK_THROWS_AS(detect_extinction(0.5, 0.0, 1.0, config, 0.0), std::logic_error);
        CHECK_THROWS_AS(detect_extinction(0.1, 10.0, 1.0, config, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(detect_extinction(-0.1, 0.0, 1.0, config, 0.0), std::domain_error);
    }
}

TEST_CASE("step contract") {
    ParticleSystem s = makeSystemRadiiOnly(testScale(), {1.0, 2.0});
    IntegratorConfig config;
    CHECK_THROWS_AS(step(s, -1.0, config), std::invalid_argument);
    CHECK_THROWS_AS(step(s, 1.0, config), std::invalid_argument);  // above dt_max

    StepResult res = step(s, 0.01, config);
    CHECK(res.accepted);
    CHECK(res.advanced == doctest::Approx(0.01));
    CHECK(res.error_estimate <= config.tolerance);

    ParticleSystem extinct = makeSystemRadiiOnly(testScale(), {1.0});
    extinct.radii[0] = 0.0;
    extinct.active[0] = 0;
    CHECK_THROWS_AS(step(extinct, 0.01, config), ExtinctSystemError);
}

TEST_CASE("polydisperse run keeps its invariants") {
    SplitMix64 rng(2024);
    std::vector<double> radii(300);
    for (double& r : radii) r = rng.uniform(0.5, 1.5);
    ParticleSystem s = makeSystemRadiiOnly(zeroCoupling(), radii);
    IntegratorConfig config;
    Trajectory traj = simulate(s, 0.3, config, 0.01);

    const double v0 = traj.diagnostics_series.front().total_volume;
    double prev_surface = traj.diagnostics_series.front().total_surface;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        if (traj.snapshots[k].activeCount() == 0) break;
        const Diagnostics& d = traj.diagnostics_series[k];
        const double budget =
            traj.extinction_log.size() * std::pow(config.extinction_radius, 3) +
            traj.times[k] * config.tolerance * v0;
        CHECK(std::abs(d.total_volume - v0) <= budget);
        CHECK(d.total_surface <= prev_surface * (1.0 + 1e-12));
        prev_surface = d.total_surface;
        CHECK(d.dissipation <= 1e-10);
    }
    CHECK(traj.extinction_log.size() > 10);  // the horizon kills the small tail

    const UniformBoundReport bound = uniform_bound_monitor(traj);
    CHECK_FALSE(bound.violated);

    const EnvelopeReport env = check_extinction_envelopes(traj);
    CHECK(env.extinctions_checked == traj.extinction_log.size());
    CHECK(env.samples_checked > 0);
    CHECK(env.samples_violating == 0);
    CHECK(env.worst_lower_margin >= 1.0);
    CHECK(env.worst_upper_margin <= 2.0);
}

TEST_CASE("step rejection leaves the system untouched") {
    ParticleSystem s = makeSystemRadiiOnly(zeroCoupling(), {0.4, 1.0, 2.0});
    IntegratorConfig config;
    config.tolerance = 1e-18;  // unattainable for a macroscopic step
    const std::vector<double> before = s.radii;
    StepResult res = step(s, 0.05, config);
    CHECK_FALSE(res.accepted);
    CHECK(s.radii == before);
}
