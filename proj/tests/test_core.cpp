#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ripening/core.hpp"
#include "ripening/rng.hpp"

using namespace ripening;

TEST_CASE("derive_gamma picks the binding exponent") {
    // alpha=2, eps=0.01: min(2, 4-3-0.01) = 0.99
    CHECK(derive_gamma(0.1, 2.0, 0.01) == doctest::Approx(0.99).epsilon(1e-14));
    // alpha=4: min(4, 8-3-0.01) = 4
    CHECK(derive_gamma(0.1, 4.0, 0.01) == doctest::Approx(4.0).epsilon(1e-14));
    // alpha=1.8: min(1.8, 0.59) = 0.59
    CHECK(derive_gamma(0.3, 1.8, 0.01) == doctest::Approx(0.59).epsilon(1e-14));
    CHECK_THROWS_AS(derive_gamma(1.5, 2.0, 0.01), std::invalid_argument);  // delta >= 1
    CHECK_THROWS_AS(derive_gamma(0.1, 2.0, -1.0), std::invalid_argument);

    // the defining property: delta^gamma = max of the three competing powers
    SplitMix64 rng(11);
    for (int k = 0; k < 200; ++k) {
        const double delta = rng.uniform(0.02, 0.9);
        const double eps = rng.uniform(1e-3, 0.2);
        const double alpha = rng.uniform(1.5 + eps + 0.01, 5.0);
        const double g = derive_gamma(delta, alpha, eps);
        const double lhs = std::pow(delta, g);
        const double rhs = std::max({std::pow(delta, alpha), std::pow(delta, 2 * alpha - 3),
                                     std::pow(delta, 2 * alpha - 3 - eps)});
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("scale parameter gate") {
    const ScaleParameters s = ScaleParameters::make(0.1, 2.0, 0.01);
    CHECK(s.gamma == doctest::Approx(0.99));
    CHECK(s.deltaAlpha() == doctest::Approx(0.01));
    CHECK(s.deltaGamma() == doctest::Approx(std::pow(0.1, 0.99)));
    CHECK_THROWS_AS(ScaleParameters::make(0.1, 1.4, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(ScaleParameters::make(0.1, 1.51, 0.01), std::invalid_argument);
    // the boundary-regime constructor admits small alpha and a formal gamma
    const ScaleParameters d = ScaleParameters::makeDiagnosticsOnly(0.1, 1.2, 0.01);
    CHECK(d.gamma == doctest::Approx(2 * 1.2 - 3 - 0.01));
    CHECK(d.gamma < 0.0);
}

TEST_CASE("mean field closes the volume balance") {
    SUBCASE("monodisperse") {
        CHECK(mean_field({1.0, 1.0, 1.0}, 0.0).u_bar == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(mean_field({2.0, 2.0}, 0.3).u_bar == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("two radii, hand-computed") {
        // R = {1,2}, dA = 0: (1+2)/(1+4) = 3/5... careful: 3/5 = 0.6
        CHECK(mean_field({1.0, 2.0}, 0.0).u_bar == doctest::Approx(0.6).epsilon(1e-15));
        // dA = 0.1: (1/1.1 + 2/1.2) / (1/1.1 + 4/1.2) = (30/11)/(55/11)... compute:
        // num = 1/1.1 + 2/1.2 = 10/11 + 5/3 = (30 + 55)/33 = 85/33
        // den = 1/1.1 + 4/1.2 = 10/11 + 10/3 = (30 + 110)/33 = 140/33
        CHECK(mean_field({1.0, 2.0}, 0.1).u_bar == doctest::Approx(85.0 / 140.0).epsilon(1e-15));
    }
    SUBCASE("zero radii are skipped, all-zero throws") {
        CHECK(mean_field({0.0, 1.0, 2.0, 0.0}, 0.0).u_bar ==
              doctest::Approx(0.6).epsilon(1e-15));
        CHECK_THROWS_AS(mean_field({0.0, 0.0}, 0.0), ExtinctSystemError);
        CHECK_THROWS_AS(mean_field({}, 0.0), ExtinctSystemError);
    }
    SUBCASE("exact closure: sum R^2 Rdot = 0 for random systems") {
        SplitMix64 rng(42);
        for (int trial = 0; trial < 300; ++trial) {
            const std::size_t n = 2 + rng.next() % 50;
            std::vector<double> radii(n);
            for (double& r : radii) r = rng.uniform(0.1, 10.0);
            for (double dA : {0.0, 0.01, 0.1}) {
                const double u = mean_field(radii, dA).u_bar;
                double vol = 0.0, scale = 0.0;
                for (double r : radii) {
                    vol += r * r * growth_rate(r, u, dA);
                    scale += r * r * std::abs(growth_rate(r, u, dA));
                }
                CHECK(std::abs(vol) <= 1e-12 * std::max(scale, 1.0));
            }
        }
    }
}

TEST_CASE("growth rate") {
    CHECK(growth_rate(2.0, 0.6, 0.0) == doctest::Approx(0.1).epsilon(1e-15));
    // (17/28 - 1/2) / (1 + 0.2) with u = 85/140 = 17/28: (17/28 - 14/28)/1.2 = (3/28)/1.2 = 5/56
    CHECK(growth_rate(2.0, 85.0 / 140.0, 0.1) == doctest::Approx(5.0 / 56.0).epsilon(1e-14));
    CHECK(growth_rate(1.0, 1.0, 0.5) == doctest::Approx(0.0));
    CHECK_THROWS_AS(growth_rate(0.0, 1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(growth_rate(-1.0, 1.0, 0.0), std::domain_error);
}

TEST_CASE("sandwich: surface decreases, dissipation nonpositive") {
    SplitMix64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.next() % 30;
        std::vector<double> radii(n);
        for (double& r : radii) r = rng.uniform(0.1, 10.0);
        for (double dA : {0.0, 0.1}) {
            const double u = mean_field(radii, dA).u_bar;
            double surf = 0.0;
            for (double r : radii) surf += r * growth_rate(r, u, dA);
            CHECK(surf <= 1e-12);  // Cauchy-Schwarz makes this a true inequality
        }
    }
}

TEST_CASE("system construction and diagnostics") {
    auto scale = ScaleParameters::make(0.1, 2.0);
    ParticleSystem s = makeSystemRadiiOnly(scale, {1.0, 2.0, 3.0});
    CHECK(s.activeCount() == 3);
    CHECK(s.activeFraction() == doctest::Approx(1.0));
    CHECK(s.totalVolume() == doctest::Approx(36.0));
    CHECK(s.totalSurface() == doctest::Approx(14.0));
    CHECK(s.maxActiveRadius() == doctest::Approx(3.0));
    CHECK(s.minActiveRadius() == doctest::Approx(1.0));
    CHECK_NOTHROW(s.checkConsistent());

    const Diagnostics d = diagnostics(s);
    CHECK(d.u_bar == doctest::Approx(mean_field(s).u_bar));
    CHECK(d.dissipation <= 1e-12);

    // at delta^alpha = 0 the dissipation relation is an exact equality
    SplitMix64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> radii(2 + rng.next() % 20);
        for (double& r : radii) r = rng.uniform(0.1, 10.0);
        const double u = mean_field(radii, 0.0).u_bar;
        double acc = 0.0;
        for (double r : radii) {
            const double v = growth_rate(r, u, 0.0);
            acc += r * v + r * r * v * v;
        }
        CHECK(std::abs(acc) <= 1e-11 * radii.size());
    }

    CHECK_THROWS_AS(makeSystemRadiiOnly(scale, {1.0, -2.0}), std::invalid_argument);
}
