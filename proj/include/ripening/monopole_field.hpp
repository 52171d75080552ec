#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ripening/core.hpp"

namespace ripening {

struct LatticeConfig {
    double delta = 0.1;
    double jitter = 0.0;  // fraction of delta, must be < 1/2
    std::size_t max_centers = 2'000'000;
};

// All lattice points (k + 1/2) * delta inside the unit cube, optionally
// displaced by jitter * delta * uniform[-1,1]^3. Deterministic per seed.
std::vector<Vec3> place_lattice(const LatticeConfig& config, std::uint64_t seed);

// Monopole approximation at an exterior point:
//   zeta = u_bar + sum_j [dA R_j/(1+dA R_j)] (1 - u_bar R_j) dA / |x - x_j|
// over active particles. Throws if the point lies inside a particle ball.
double evaluate_zeta(const ParticleSystem& system, double u_bar, const Vec3& point);

// Sup over sample directions on the boundary of particle i of the absolute
// neighbor sum (the j != i part of zeta - u_bar); this is the residual of the
// Robin boundary relation at particle i.
double boundary_defect(const ParticleSystem& system, double u_bar, std::size_t particle,
                       std::size_t direction_count = 26);

struct DeviationSurvey {
    double max_deviation = 0.0;
    double mean_deviation = 0.0;
    double envelope = 0.0;  // delta^gamma (1 + 2 sup R)(1 + u_bar sup R)
    std::size_t sample_count = 0;
};

// |zeta - u_bar| at quasi-random exterior points, against the theoretical
// envelope. Rejection-samples outside all particle balls.
DeviationSurvey deviation_survey(const ParticleSystem& system, double u_bar,
                                 std::size_t sample_count, std::uint64_t seed);

}  // namespace ripening
