#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "ripening/core.hpp"
#include "ripening/lsw_pde.hpp"
#include "ripening/particle_sim.hpp"

namespace ripening {

struct EmpiricalMeasure {
    // (radius, weight); weights are equal (1/N_i) by construction
    std::vector<std::pair<double, double>> atoms;
    double total_weight = 0.0;  // N(t)/N_i
};

EmpiricalMeasure empirical_from_snapshot(const ParticleSystem& system);

// L1 distance between the CDFs of the probability-normalized inputs. Exact
// for atoms (sorted merge); grid densities use the piecewise-linear CDF.
double wasserstein1(const EmpiricalMeasure& a, const EmpiricalMeasure& b);
double wasserstein1(const EmpiricalMeasure& a, const RadiusDensity& b);
double wasserstein1(const RadiusDensity& a, const RadiusDensity& b);

// phi(t,R) = b(t) c(R) built from (1 - s^2)^3 bump kernels: b supported on
// [0, t_end), c on (r_lo, r_hi); both C^2 with vanishing boundary values.
class BumpTestFunction {
public:
    BumpTestFunction(double t_end, double r_lo, double r_hi);

    double value(double t, double r) const;
    double dt(double t, double r) const;
    double dr(double t, double r) const;

    double timeSupportEnd() const { return t_end_; }

private:
    double timeBump(double t) const;
    double timeBumpPrime(double t) const;
    double radiusBump(double r) const;
    double radiusBumpPrime(double r) const;

    double t_end_, r_lo_, r_hi_, r_center_, r_width_;
};

// | int { d_t phi + (u_bar - 1/R) d_R phi } a(t) dnu_t dt + int phi(0,.) dnu_0 |
// with trapezoidal time quadrature over stored snapshots.
double weak_form_residual(const Trajectory& trajectory, const BumpTestFunction& phi);
double weak_form_residual(const DensityTrajectory& trajectory, const BumpTestFunction& phi);

std::vector<std::pair<double, double>> active_fraction_series(const Trajectory& trajectory);
std::vector<std::pair<double, double>> active_fraction_series(const DensityTrajectory& trajectory);

}  // namespace ripening
