#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "ripening/core.hpp"

namespace ripening {

struct NumericalFailure : std::runtime_error {
    explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

struct InvariantViolation : std::runtime_error {
    explicit InvariantViolation(const std::string& what) : std::runtime_error(what) {}
};

struct IntegratorConfig {
    double dt_max = 0.05;
    double tolerance = 1e-10;          // local error target; also the relative volume-drift rate
    double extinction_radius = 1e-6;   // particle declared extinct below this
    double freeze_threshold = 3e-4;    // below this, frozen-u_bar analytic substepping

    void validate() const;
};

struct ExtinctionRecord {
    std::size_t index = 0;
    double time = 0.0;
    // (t, R) samples from the accepted steps approaching extinction.
    std::vector<std::pair<double, double>> approach_samples;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<ParticleSystem> snapshots;
    std::vector<Diagnostics> diagnostics_series;
    std::vector<ExtinctionRecord> extinction_log;
    double max_u_bar = 0.0;  // sup over all accepted steps, not just snapshots
    IntegratorConfig config;
};

// With u_bar frozen, time for a shrinking particle to reach extinction_radius,
// or nullopt if it survives the next dt. Requires radius <= freeze_threshold
// and, when u_bar > 0, radius <= 1/(4 u_bar) so the particle is strictly
// shrinking (Rdot <= -1/(2R)).
std::optional<double> detect_extinction(double radius, double u_bar, double dt,
                                        const IntegratorConfig& config, double delta_alpha);

struct StepResult {
    bool accepted = false;
    double advanced = 0.0;        // may be < dt when split at an extinction
    double error_estimate = 0.0;  // scaled local error of the accepted substep
    double removed_volume = 0.0;  // sum R^3 dropped by extinctions in this step
    // (particle index, time offset within the step) for extinctions realized here.
    std::vector<std::pair<std::size_t, double>> extinctions;
};

// One explicit step of the coupled system (RK4 with step doubling, u_bar
// recomputed at every stage). Mutates `system` only when accepted.
StepResult step(ParticleSystem& system, double dt, const IntegratorConfig& config);

Trajectory simulate(const ParticleSystem& initial, double horizon,
                    const IntegratorConfig& config, double snapshot_interval);

struct UniformBoundReport {
    double max_u_bar = 0.0;
    double max_radius = 0.0;
    double initial_u_bar = 0.0;
    double initial_max_radius = 0.0;
    double bound_factor = 10.0;
    bool violated = false;
};

UniformBoundReport uniform_bound_monitor(const Trajectory& trajectory, double bound_factor = 10.0);

struct EnvelopeReport {
    std::size_t extinctions_checked = 0;
    std::size_t samples_checked = 0;
    std::size_t samples_violating = 0;
    double worst_lower_margin = 1e300;  // min of R/sqrt(t_i - t), should stay >= 1
    double worst_upper_margin = 0.0;    // max of R/sqrt(t_i - t), should stay <= 2
};

// Checks sqrt(t_i - t) <= R(t) <= 2 sqrt(t_i - t) on the approach samples
// that lie in the small-radius regime R <= 1/(4 max u_bar).
EnvelopeReport check_extinction_envelopes(const Trajectory& trajectory);

}  // namespace ripening
