#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "ripening/core.hpp"

namespace ripening {

enum class KineticRegime { Reaction, Diffusion };

// growth velocity v(R, u_bar) of the transport equation
double regime_velocity(KineticRegime regime, double radius, double u_bar);

struct RadiusGrid {
    double r_min = 1e-3;
    double r_max = 1.0;
    std::size_t cell_count = 0;
    std::vector<double> edges;    // cell_count + 1, uniform
    std::vector<double> centers;  // cell_count

    static RadiusGrid make(double r_min, double r_max, std::size_t cell_count);
    double dr() const { return (r_max - r_min) / static_cast<double>(cell_count); }
};

struct RadiusDensity {
    RadiusGrid grid;
    std::vector<double> values;  // cell averages of n(t, R), >= 0
    double active_mass = 0.0;    // current zeroth moment
    double escaped_mass = 0.0;   // cumulative outflow through r_min

    double moment(int order) const;
    void refreshActiveMass();
};

RadiusDensity make_uniform_density(const RadiusGrid& grid, double lo, double hi);
// C^2 polynomial bump (1 - s^2)^3 on |s| < 1, s = (R - center)/width
RadiusDensity make_bump_density(const RadiusGrid& grid, double center, double width);
// normalized histogram (total mass 1) of a radius sample
RadiusDensity density_from_radii(const RadiusGrid& grid, const std::vector<double>& radii);

// reaction: int R n / int R^2 n; diffusion: int n / int R n (midpoint quadrature)
double closure_mean_field(const RadiusDensity& density, KineticRegime regime);

struct CflViolation : std::runtime_error {
    explicit CflViolation(double admissible)
        : std::runtime_error("advect_step: dt violates the CFL condition"),
          admissible_dt(admissible) {}
    double admissible_dt;
};

// One first-order upwind step with edge velocities at frozen u_bar.
// u_bar_override disables the self-consistent closure (test mode).
RadiusDensity advect_step(const RadiusDensity& density, KineticRegime regime, double dt,
                          std::optional<double> u_bar_override = std::nullopt,
                          double cfl_limit = 0.9);

struct DensityStats {
    double time = 0.0;
    double u_bar = 0.0;
    double moment0 = 0.0, moment1 = 0.0, moment2 = 0.0, moment3 = 0.0;
    double active_mass = 0.0;
    double escaped_mass = 0.0;
};

struct DensityTrajectory {
    std::vector<double> times;
    std::vector<RadiusDensity> snapshots;
    std::vector<DensityStats> stats;
};

struct PdeSolveOptions {
    double cfl = 0.9;
    double snapshot_interval = 0.05;
    std::optional<double> u_bar_override;  // frozen mean field (test mode)
};

DensityTrajectory solve(const RadiusDensity& initial, KineticRegime regime, double horizon,
                        const PdeSolveOptions& options);

}  // namespace ripening
