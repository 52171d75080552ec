#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ripening/core.hpp"
#include "ripening/lsw_pde.hpp"
#include "ripening/measures.hpp"
#include "ripening/monopole_field.hpp"
#include "ripening/particle_sim.hpp"

namespace ripening::harness {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class DistributionKind { Uniform, LogNormal, Explicit };
enum class RadiusProfile { Random, Modulated };  // modulated: radius varies with position

struct RunConfig {
    // scale
    double delta = 0.1;
    double alpha = 2.0;
    double epsilon = 0.01;
    bool diagnostics_only = false;

    // initial radii
    DistributionKind distribution = DistributionKind::Uniform;
    double lo = 0.5, hi = 1.5;          // uniform
    double mu = 0.0, sigma = 0.25;      // lognormal (truncated at trunc_max)
    double trunc_max = 3.0;
    std::vector<double> explicit_radii;
    std::uint64_t seed = 1;

    double horizon = 0.3;
    IntegratorConfig integrator;

    // PDE
    double grid_r_min = 3e-3;
    double grid_r_max = 3.0;
    std::size_t grid_cells = 600;
    KineticRegime regime = KineticRegime::Reaction;
    double cfl = 0.9;
    std::optional<double> u_bar_override;

    double cadence = 0.01;  // snapshot interval

    // field survey
    double jitter = 0.0;
    std::size_t survey_samples = 2000;
    std::uint64_t survey_seed = 7;
    RadiusProfile radius_profile = RadiusProfile::Random;

    ScaleParameters scaleParameters() const;
};

RunConfig load_config(const std::filesystem::path& file);
RunConfig parse_config(const std::string& json_text);
std::string canonical_config(const RunConfig& config);
std::uint64_t config_hash(const RunConfig& config);

// initial radii for `count` particles at the given centers
std::vector<double> draw_initial_radii(const RunConfig& config, const std::vector<Vec3>& centers);
ParticleSystem build_system(const RunConfig& config);

// exit codes: 0 ok, 1 invariant violation, 2 config error, 3 numerical failure
int run_particles(const RunConfig& config, const std::filesystem::path& out_dir);
int run_pde(const RunConfig& config, const std::filesystem::path& out_dir);
int run_field_survey(const RunConfig& config, const std::filesystem::path& out_dir);

struct SweepCell {
    double delta = 0.0;
    std::uint64_t seed = 0;
    std::size_t particle_count = 0;
    double residual = 0.0;
    std::vector<double> w1;  // at the checkpoint times
    double survey_max_deviation = 0.0;
    bool failed = false;
    std::string error;
};

struct SweepSummary {
    std::vector<double> checkpoints;
    std::vector<SweepCell> cells;
    double residual_slope = 0.0;
    double deviation_slope = 0.0;
    double gamma = 0.0;
    bool w1_decreasing = false;  // within 20% per-step slack at every checkpoint
};

SweepSummary run_convergence_sweep(const RunConfig& base, const std::vector<double>& deltas,
                                   const std::vector<std::uint64_t>& seeds,
                                   const std::filesystem::path& out_dir, std::size_t workers = 1);

// particle run + matched PDE run from one config; W1 at snapshot checkpoints
int run_compare(const RunConfig& config, const std::filesystem::path& out_dir);

// least-squares slope of log(y) against log(x)
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

void write_trajectory_csv(const Trajectory& traj, std::uint64_t hash,
                          const std::filesystem::path& out_dir);
void write_density_csv(const DensityTrajectory& traj, std::uint64_t hash,
                       const std::filesystem::path& out_dir);

}  // namespace ripening::harness
