#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "ripening/monopole_field.hpp"
#include "ripening/rng.hpp"

using namespace ripening;

TEST_CASE("lattice placement") {
    SUBCASE("delta = 1/2 gives the 8 cell midpoints") {
        LatticeConfig config;
        config.delta = 0.5;
        const auto centers = place_lattice(config, 1);
        REQUIRE(centers.size() == 8);
        for (const Vec3& c : centers)
            for (double x : c) CHECK((x == doctest::Approx(0.25) || x == doctest::Approx(0.75)));
    }
    SUBCASE("delta = 1/10 gives 1000 points in the open cube") {
        LatticeConfig config;
        config.delta = 0.1;
        const auto centers = place_lattice(config, 1);
        REQUIRE(centers.size() == 1000);
        for (const Vec3& c : centers)
            for (double x : c) {
                CHECK(x > 0.0);
                CHECK(x < 1.0);
            }
    }
    SUBCASE("jitter keeps neighbors separated") {
        LatticeConfig config;
        config.delta = 0.1;
        config.jitter = 0.2;  // displacement < 0.02 per axis, so spacing > 0.05 stays safe
        const auto centers = place_lattice(config, 99);
        double min_dist = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < centers.size(); ++i)
            for (std::size_t j = i + 1; j < centers.size(); ++j) {
                const double dx = centers[i][0] - centers[j][0];
                const double dy = centers[i][1] - centers[j][1];
                const double dz = centers[i][2] - centers[j][2];
                min_dist = std::min(min_dist, std::sqrt(dx * dx + dy * dy + dz * dz));
            }
        CHECK(min_dist >= 0.05);
        // deterministic per seed
        CHECK(place_lattice(config, 99) == centers);
        CHECK(place_lattice(config, 100) != centers);
    }
    SUBCASE("budget") {
        LatticeConfig config;
        config.delta = 0.005;  // 200^3 = 8e6 centers
        CHECK_THROWS_AS(place_lattice(config, 1), std::length_error);
        CHECK_THROWS_AS(place_lattice(LatticeConfig{1.5, 0.0}, 1), std::invalid_argument);
    }
}

namespace {

ParticleSystem twoParticleSystem() {
    auto scale = ScaleParameters::make(0.5, 2.0);  // delta^alpha = 1/4
    return makeSystem(scale, {1.0, 2.0},
                      {Vec3{0.25, 0.5, 0.5}, Vec3{0.75, 0.5, 0.5}});
}

}  // namespace

TEST_CASE("zeta: hand-computed two-particle value") {
    const ParticleSystem s = twoParticleSystem();
    // point equidistant (0.75) from both centers
    const Vec3 p{0.5, 0.0, 0.0};
    const double u = 0.6;
    // coeff_1 = (0.25/1.25)(1 - 0.6)(0.25) = 0.02
    // coeff_2 = (0.5/1.5)(1 - 1.2)(0.25) = -1/60
    // zeta = 0.6 + (0.02 - 1/60)/0.75 = 0.6 + 1/225
    CHECK(evaluate_zeta(s, u, p) == doctest::Approx(0.6 + 1.0 / 225.0).epsilon(1e-14));
    // inside the second ball (radius 1/2)
    CHECK_THROWS_AS(evaluate_zeta(s, u, Vec3{0.75, 0.5, 0.6}), std::domain_error);
}

TEST_CASE("zeta is identically u_bar for a monodisperse system") {
    auto scale = ScaleParameters::make(0.5, 2.0);
    ParticleSystem s = makeSystem(scale, {2.0, 2.0, 2.0, 2.0},
                                  {Vec3{0.2, 0.2, 0.2}, Vec3{0.8, 0.2, 0.2},
                                   Vec3{0.2, 0.8, 0.2}, Vec3{0.2, 0.2, 0.8}});
    const double u = mean_field(s).u_bar;  // = 1/2, so 1 - u R = 0 for every particle
    CHECK(u == doctest::Approx(0.5));
    for (const Vec3 p : {Vec3{0.5, 0.5, 0.5}, Vec3{0.9, 0.9, 0.9}, Vec3{0.5, 0.9, 0.9}})
        CHECK(evaluate_zeta(s, u, p) == doctest::Approx(u).epsilon(1e-15));
}

TEST_CASE("zeta is discretely harmonic away from the particles") {
    const ParticleSystem s = twoParticleSystem();
    const double u = mean_field(s).u_bar;
    const Vec3 p{0.1, 0.9, 0.3};
    auto discrete_laplacian = [&](double h) {
        double acc = -6.0 * evaluate_zeta(s, u, p);
        for (int d = 0; d < 3; ++d)
            for (double sgn : {-1.0, 1.0}) {
                Vec3 q = p;
                q[d] += sgn * h;
                acc += evaluate_zeta(s, u, q);
            }
        return acc / (h * h);
    };
    // truncation error is O(h^2): quartering h should cut it ~16x
    const double coarse = std::abs(discrete_laplacian(0.04));
    const double fine = std::abs(discrete_laplacian(0.01));
    CHECK(fine <= coarse / 8.0 + 1e-8);
}

TEST_CASE("boundary defect") {
    const ParticleSystem s = twoParticleSystem();
    const double u = mean_field(s).u_bar;
    // neighbor sum at particle 1's boundary: single neighbor with coeff_2,
    // distances range over [0.5 - dA R_1, 0.5 + dA R_1] = [0.25, 0.75]
    const double coeff2 = (0.5 / 1.5) * (1.0 - u * 2.0) * 0.25;
    const double defect = boundary_defect(s, u, 0, 500);
    CHECK(defect <= std::abs(coeff2) / 0.25 * (1.0 + 1e-12));
    CHECK(defect >= std::abs(coeff2) / 0.75 * (1.0 - 1e-12));
    CHECK_THROWS_AS(boundary_defect(s, u, 7), std::invalid_argument);
    CHECK_THROWS_AS(boundary_defect(s, u, 0, 0), std::invalid_argument);
}

TEST_CASE("deviation survey stays under the envelope in the admissible regime") {
    LatticeConfig lattice;
    lattice.delta = 0.1;
    auto scale = ScaleParameters::make(0.1, 2.0);
    auto centers = place_lattice(lattice, 5);
    SplitMix64 rng(17);
    std::vector<double> radii(centers.size());
    for (double& r : radii) r = rng.uniform(0.5, 1.5);
    ParticleSystem s = makeSystem(scale, radii, centers);

    const double u = mean_field(s).u_bar;
    const DeviationSurvey survey = deviation_survey(s, u, 500, 7);
    CHECK(survey.sample_count == 500);
    CHECK(survey.max_deviation > 0.0);
    CHECK(survey.mean_deviation <= survey.max_deviation);
    CHECK(survey.max_deviation <= survey.envelope);
    // deterministic per seed
    CHECK(deviation_survey(s, u, 500, 7).max_deviation == survey.max_deviation);

    CHECK_THROWS_AS(deviation_survey(s, u, 0, 7), std::invalid_argument);
    for (std::size_t i = 0; i < s.radii.size(); ++i) {
        s.radii[i] = 0.0;
        s.active[i] = 0;
    }
    CHECK_THROWS_AS(deviation_survey(s, u, 10, 7), ExtinctSystemError);
}
