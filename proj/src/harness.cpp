#include "ripening/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <sstream>

#include "ripening/rng.hpp"
#include <json.hpp>

namespace ripening::harness {

using nlohmann::json;

namespace {

void rejectUnknownKeys(const json& obj, const std::string& section,
                       std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* key : allowed)
            if (it.key() == key) ok = true;
        if (!ok)
            throw ConfigError("unknown key '" +
                              (section.empty() ? it.key() : section + "." + it.key()) + "'");
    }
}

double requirePositive(const json& obj, const char* key, double fallback,
                       const std::string& section) {
    const double v = obj.value(key, fallback);
    if (!(v > 0.0)) throw ConfigError(section + "." + key + " must be positive");
    return v;
}

}  // namespace

ScaleParameters RunConfig::scaleParameters() const {
    if (diagnostics_only) return ScaleParameters::makeDiagnosticsOnly(delta, alpha, epsilon);
    return ScaleParameters::make(delta, alpha, epsilon);
}

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be an object");
    rejectUnknownKeys(j, "",
                      {"scale", "initial", "horizon", "integrator", "grid", "regime", "pde",
                       "output", "field"});

    RunConfig c;
    if (j.contains("scale")) {
        const json& s = j["scale"];
        rejectUnknownKeys(s, "scale", {"delta", "alpha", "epsilon", "diagnostics_only"});
        c.delta = requirePositive(s, "delta", c.delta, "scale");
        c.alpha = s.value("alpha", c.alpha);
        c.epsilon = requirePositive(s, "epsilon", c.epsilon, "scale");
        c.diagnostics_only = s.value("diagnostics_only", false);
        if (!(c.delta < 1.0)) throw ConfigError("scale.delta must be < 1");
        if (!c.diagnostics_only && !(c.alpha > 1.5 + c.epsilon))
            throw ConfigError("scale.alpha must exceed 3/2 + epsilon "
                              "(set diagnostics_only for regime-boundary experiments)");
    }
    if (j.contains("initial")) {
        const json& s = j["initial"];
        rejectUnknownKeys(s, "initial",
                          {"kind", "lo", "hi", "mu", "sigma", "max", "radii", "seed"});
        const std::string kind = s.value("kind", "uniform");
        if (kind == "uniform") c.distribution = DistributionKind::Uniform;
        else if (kind == "lognormal") c.distribution = DistributionKind::LogNormal;
        else if (kind == "explicit") c.distribution = DistributionKind::Explicit;
        else throw ConfigError("initial.kind must be uniform, lognormal, or explicit");
        c.lo = s.value("lo", c.lo);
        c.hi = s.value("hi", c.hi);
        c.mu = s.value("mu", c.mu);
        c.sigma = s.value("sigma", c.sigma);
        c.trunc_max = s.value("max", c.trunc_max);
        c.seed = s.value("seed", c.seed);
        if (s.contains("radii")) c.explicit_radii = s["radii"].get<std::vector<double>>();
        if (c.distribution == DistributionKind::Uniform && !(0.0 < c.lo && c.lo < c.hi))
            throw ConfigError("initial: need 0 < lo < hi");
        if (c.distribution == DistributionKind::Explicit && c.explicit_radii.empty())
            throw ConfigError("initial: explicit kind requires a nonempty radii list");
    }
    c.horizon = j.value("horizon", c.horizon);
    if (!(c.horizon > 0.0)) throw ConfigError("horizon must be positive");
    if (j.contains("integrator")) {
        const json& s = j["integrator"];
        rejectUnknownKeys(s, "integrator",
                          {"dt_max", "tolerance", "extinction_radius", "freeze_threshold"});
        c.integrator.dt_max = requirePositive(s, "dt_max", c.integrator.dt_max, "integrator");
        c.integrator.tolerance =
            requirePositive(s, "tolerance", c.integrator.tolerance, "integrator");
        c.integrator.extinction_radius =
            requirePositive(s, "extinction_radius", c.integrator.extinction_radius, "integrator");
        c.integrator.freeze_threshold =
            requirePositive(s, "freeze_threshold", c.integrator.freeze_threshold, "integrator");
        try {
            c.integrator.validate();
        } catch (const std::exception& e) {
            throw ConfigError(std::string("integrator: ") + e.what());
        }
    }
    if (j.contains("grid")) {
        const json& s = j["grid"];
        rejectUnknownKeys(s, "grid", {"r_min", "r_max", "cells"});
        c.grid_r_min = requirePositive(s, "r_min", c.grid_r_min, "grid");
        c.grid_r_max = requirePositive(s, "r_max", c.grid_r_max, "grid");
        c.grid_cells = s.value("cells", c.grid_cells);
        if (!(c.grid_r_min < c.grid_r_max)) throw ConfigError("grid: need r_min < r_max");
        if (c.grid_cells < 2) throw ConfigError("grid.cells must be >= 2");
    }
    if (j.contains("regime")) {
        const std::string r = j["regime"].get<std::string>();
        if (r == "reaction") c.regime = KineticRegime::Reaction;
        else if (r == "diffusion") c.regime = KineticRegime::Diffusion;
        else throw ConfigError("regime must be reaction or diffusion");
    }
    if (j.contains("pde")) {
        const json& s = j["pde"];
        rejectUnknownKeys(s, "pde", {"cfl", "u_bar_override"});
        c.cfl = requirePositive(s, "cfl", c.cfl, "pde");
        if (c.cfl > 1.0) throw ConfigError("pde.cfl must be <= 1");
        if (s.contains("u_bar_override") && !s["u_bar_override"].is_null())
            c.u_bar_override = s["u_bar_override"].get<double>();
    }
    if (j.contains("output")) {
        const json& s = j["output"];
        rejectUnknownKeys(s, "output", {"cadence"});
        c.cadence = requirePositive(s, "cadence", c.cadence, "output");
    }
    if (j.contains("field")) {
        const json& s = j["field"];
        rejectUnknownKeys(s, "field", {"jitter", "samples", "seed", "radius_profile"});
        c.jitter = s.value("jitter", c.jitter);
        if (!(c.jitter >= 0.0 && c.jitter < 0.5)) throw ConfigError("field.jitter must lie in [0, 1/2)");
        c.survey_samples = s.value("samples", c.survey_samples);
        c.survey_seed = s.value("seed", c.survey_seed);
        const std::string p = s.value("radius_profile", "random");
        if (p == "random") c.radius_profile = RadiusProfile::Random;
        else if (p == "modulated") c.radius_profile = RadiusProfile::Modulated;
        else throw ConfigError("field.radius_profile must be random or modulated");
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string canonical_config(const RunConfig& c) {
    json j;
    j["scale"] = {{"delta", c.delta}, {"alpha", c.alpha}, {"epsilon", c.epsilon},
                  {"diagnostics_only", c.diagnostics_only}};
    j["initial"] = {{"kind", static_cast<int>(c.distribution)}, {"lo", c.lo}, {"hi", c.hi},
                    {"mu", c.mu}, {"sigma", c.sigma}, {"max", c.trunc_max},
                    {"seed", c.seed}, {"radii", c.explicit_radii}};
    j["horizon"] = c.horizon;
    j["integrator"] = {{"dt_max", c.integrator.dt_max}, {"tolerance", c.integrator.tolerance},
                       {"extinction_radius", c.integrator.extinction_radius},
                       {"freeze_threshold", c.integrator.freeze_threshold}};
    j["grid"] = {{"r_min", c.grid_r_min}, {"r_max", c.grid_r_max}, {"cells", c.grid_cells}};
    j["regime"] = c.regime == KineticRegime::Reaction ? "reaction" : "diffusion";
    j["pde"] = {{"cfl", c.cfl},
                {"u_bar_override", c.u_bar_override ? json(*c.u_bar_override) : json()}};
    j["output"] = {{"cadence", c.cadence}};
    j["field"] = {{"jitter", c.jitter}, {"samples", c.survey_samples},
                  {"seed", c.survey_seed}, {"profile", static_cast<int>(c.radius_profile)}};
    return j.dump();
}

std::uint64_t config_hash(const RunConfig& config) {
    // FNV-1a 64
    const std::string s = canonical_config(config);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<double> draw_initial_radii(const RunConfig& config, const std::vector<Vec3>& centers) {
    std::vector<double> radii(centers.size());
    if (config.radius_profile == RadiusProfile::Modulated) {
        // radius as a smooth function of position; the same field at every
        // delta, so defect sweeps see a genuine collective monopole signal
        const double mid = 0.5 * (config.lo + config.hi);
        const double amp = 0.5 * (config.hi - config.lo);
        for (std::size_t i = 0; i < centers.size(); ++i)
            radii[i] = mid + amp * std::sin(2.0 * M_PI * centers[i][0]) *
                                 std::cos(2.0 * M_PI * centers[i][1]);
        return radii;
    }
    switch (config.distribution) {
        case DistributionKind::Uniform: {
            SplitMix64 rng(config.seed);
            for (double& r : radii) r = rng.uniform(config.lo, config.hi);
            return radii;
        }
        case DistributionKind::LogNormal: {
            SplitMix64 rng(config.seed);
            for (double& r : radii) {
                double v;
                do {
                    const double u1 = std::max(rng.uniform(), 1e-300);
                    const double u2 = rng.uniform();
                    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
                    v = std::exp(config.mu + config.sigma * z);
                } while (v >= config.trunc_max || v <= 0.0);
                r = v;
            }
            return radii;
        }
        case DistributionKind::Explicit: {
            if (config.explicit_radii.size() != centers.size())
                throw ConfigError("explicit radii list has " +
                                  std::to_string(config.explicit_radii.size()) +
                                  " entries but the lattice has " + std::to_string(centers.size()));
            return config.explicit_radii;
        }
    }
    throw ConfigError("unknown distribution kind");
}

ParticleSystem build_system(const RunConfig& config) {
    LatticeConfig lattice;
    lattice.delta = config.delta;
    lattice.jitter = config.jitter;
    std::vector<Vec3> centers = place_lattice(lattice, config.seed ^ 0x9e3779b9ULL);
    std::vector<double> radii = draw_initial_radii(config, centers);
    return makeSystem(config.scaleParameters(), std::move(radii), std::move(centers));
}

/* ----------------- CSV output ----------------- */

namespace {

std::ofstream openCsv(const std::filesystem::path& path, std::uint64_t hash) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file " + path.string());
    out << std::setprecision(17);
    out << "# config_hash=" << std::hex << hash << std::dec << "\n";
    return out;
}

}  // namespace

void write_trajectory_csv(const Trajectory& traj, std::uint64_t hash,
                          const std::filesystem::path& out_dir) {
    auto out = openCsv(out_dir / "trajectory.csv", hash);
    out << "time,active_count,volume,surface,u_bar,min_radius,max_radius\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const Diagnostics& d = traj.diagnostics_series[k];
        out << traj.times[k] << ',' << traj.snapshots[k].activeCount() << ',' << d.total_volume
            << ',' << d.total_surface << ',' << d.u_bar << ',' << d.min_radius << ','
            << d.max_radius << "\n";
    }
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
        std::ostringstream name;
        name << "radii_" << std::setw(4) << std::setfill('0') << k << ".csv";
        auto rout = openCsv(out_dir / name.str(), hash);
        rout << "index,radius\n";
        const ParticleSystem& s = traj.snapshots[k];
        for (std::size_t i = 0; i < s.radii.size(); ++i)
            rout << i << ',' << s.radii[i] << "\n";
    }
}

void write_density_csv(const DensityTrajectory& traj, std::uint64_t hash,
                       const std::filesystem::path& out_dir) {
    auto out = openCsv(out_dir / "density_trajectory.csv", hash);
    out << "time,u_bar,moment0,moment1,moment2,moment3,active_mass,escaped_mass\n";
    for (const DensityStats& s : traj.stats)
        out << s.time << ',' << s.u_bar << ',' << s.moment0 << ',' << s.moment1 << ','
            << s.moment2 << ',' << s.moment3 << ',' << s.active_mass << ',' << s.escaped_mass
            << "\n";
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
        std::ostringstream name;
        name << "profile_" << std::setw(4) << std::setfill('0') << k << ".csv";
        auto pout = openCsv(out_dir / name.str(), hash);
        pout << "r_center,n\n";
        const RadiusDensity& d = traj.snapshots[k];
        for (std::size_t c = 0; c < d.values.size(); ++c)
            pout << d.grid.centers[c] << ',' << d.values[c] << "\n";
    }
}

/* ----------------- runners ----------------- */

namespace {

// returns empty string when the invariants hold, else a description
std::string checkTrajectoryInvariants(const Trajectory& traj) {
    const Diagnostics& first = traj.diagnostics_series.front();
    const double budget_base = static_cast<double>(traj.extinction_log.size()) *
                               std::pow(traj.config.extinction_radius, 3);
    double prev_surface = first.total_surface;
    // tolerance acts as a relative volume-drift rate here
    const double volume_scale = std::max(1.0, first.total_volume);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const Diagnostics& d = traj.diagnostics_series[k];
        if (traj.snapshots[k].activeCount() == 0) break;
        const double budget =
            budget_base + traj.times[k] * traj.config.tolerance * volume_scale;
        if (std::abs(d.total_volume - first.total_volume) > budget)
            return "volume drift " + std::to_string(d.total_volume - first.total_volume) +
                   " exceeds budget " + std::to_string(budget) + " at t=" +
                   std::to_string(traj.times[k]);
        if (d.total_surface > prev_surface * (1.0 + 1e-12))
            return "surface increased at t=" + std::to_string(traj.times[k]);
        prev_surface = d.total_surface;
    }
    return {};
}

}  // namespace

int run_particles(const RunConfig& config, const std::filesystem::path& out_dir) {
    try {
        ParticleSystem system = build_system(config);
        Trajectory traj = simulate(system, config.horizon, config.integrator, config.cadence);
        write_trajectory_csv(traj, config_hash(config), out_dir);
        const std::string failure = checkTrajectoryInvariants(traj);
        if (!failure.empty()) {
            std::ofstream(out_dir / "invariant_failure.txt") << failure << "\n";
            return 1;
        }
        return 0;
    } catch (const ConfigError&) {
        throw;
    } catch (const InvariantViolation& e) {
        std::filesystem::create_directories(out_dir);
        std::ofstream(out_dir / "invariant_failure.txt") << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::filesystem::create_directories(out_dir);
        std::ofstream(out_dir / "numerical_failure.txt") << e.what() << "\n";
        return 3;
    }
}

namespace {

RadiusDensity initialDensity(const RunConfig& config) {
    const RadiusGrid grid = RadiusGrid::make(config.grid_r_min, config.grid_r_max,
                                             config.grid_cells);
    switch (config.distribution) {
        case DistributionKind::Uniform:
            return make_uniform_density(grid, config.lo, config.hi);
        case DistributionKind::LogNormal: {
            // histogram of a deterministic sample
            LatticeConfig lattice;
            lattice.delta = config.delta;
            auto centers = place_lattice(lattice, config.seed);
            return density_from_radii(grid, draw_initial_radii(config, centers));
        }
        case DistributionKind::Explicit:
            return density_from_radii(grid, config.explicit_radii);
    }
    throw ConfigError("unknown distribution kind");
}

}  // namespace

int run_pde(const RunConfig& config, const std::filesystem::path& out_dir) {
    try {
        RadiusDensity initial = initialDensity(config);
        if (!(initial.active_mass > 0.0)) throw ConfigError("extinct input: initial density is zero");
        PdeSolveOptions options;
        options.cfl = config.cfl;
        options.snapshot_interval = config.cadence;
        options.u_bar_override = config.u_bar_override;
        DensityTrajectory traj = solve(initial, config.regime, config.horizon, options);
        write_density_csv(traj, config_hash(config), out_dir);
        // mass ledger
        for (const DensityStats& s : traj.stats) {
            const double total = s.active_mass + s.escaped_mass;
            const double expected = traj.stats.front().active_mass;
            if (std::abs(total - expected) > 1e-10 * std::max(1.0, expected)) {
                std::ofstream(out_dir / "invariant_failure.txt")
                    << "mass ledger broken at t=" << s.time << "\n";
                return 1;
            }
        }
        return 0;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        std::filesystem::create_directories(out_dir);
        std::ofstream(out_dir / "numerical_failure.txt") << e.what() << "\n";
        return 3;
    }
}

int run_field_survey(const RunConfig& config, const std::filesystem::path& out_dir) {
    try {
        ParticleSystem system = build_system(config);
        const MeanFieldState mf = mean_field(system);
        const DeviationSurvey survey =
            deviation_survey(system, mf.u_bar, config.survey_samples, config.survey_seed);
        double defect_max = 0.0;
        const std::size_t n = system.radii.size();
        const std::size_t stride = std::max<std::size_t>(1, n / 64);
        for (std::size_t i = 0; i < n; i += stride)
            defect_max = std::max(defect_max, boundary_defect(system, mf.u_bar, i));
        auto out = openCsv(out_dir / "survey.csv", config_hash(config));
        out << "delta,alpha,gamma,max_deviation,mean_deviation,envelope,defect_max\n";
        out << config.delta << ',' << config.alpha << ',' << system.scale.gamma << ','
            << survey.max_deviation << ',' << survey.mean_deviation << ',' << survey.envelope
            << ',' << defect_max << "\n";
        return 0;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        std::filesystem::create_directories(out_dir);
        std::ofstream(out_dir / "numerical_failure.txt") << e.what() << "\n";
        return 3;
    }
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("log_log_slope: need at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(std::max(y[i], 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/* ----------------- sweep and compare ----------------- */

namespace {

std::size_t nearestSnapshot(const std::vector<double>& times, double t) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < times.size(); ++k)
        if (std::abs(times[k] - t) < std::abs(times[best] - t)) best = k;
    return best;
}

struct CellOutput {
    SweepCell cell;
    Trajectory trajectory;
};

}  // namespace

SweepSummary run_convergence_sweep(const RunConfig& base, const std::vector<double>& deltas,
                                   const std::vector<std::uint64_t>& seeds,
                                   const std::filesystem::path& out_dir, std::size_t workers) {
    if (deltas.size() < 3)
        throw ConfigError("sweep requires >= 3 delta values for a slope fit");
    std::vector<double> sorted = deltas;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const double finest = sorted.back();
    std::vector<std::uint64_t> seed_list = seeds.empty() ? std::vector<std::uint64_t>{base.seed}
                                                         : seeds;

    SweepSummary summary;
    summary.checkpoints = {base.horizon / 3.0, 2.0 * base.horizon / 3.0, base.horizon};
    const BumpTestFunction phi(0.9 * base.horizon, 0.3, 2.5);

    for (std::uint64_t seed : seed_list) {
        // matched initial data: PDE density from the finest run's initial radii
        RunConfig finest_cfg = base;
        finest_cfg.delta = finest;
        finest_cfg.seed = seed;
        ParticleSystem finest_system = build_system(finest_cfg);
        const RadiusGrid grid =
            RadiusGrid::make(base.grid_r_min, base.grid_r_max, base.grid_cells);
        RadiusDensity pde_initial = density_from_radii(grid, finest_system.radii);
        PdeSolveOptions options;
        options.cfl = base.cfl;
        options.snapshot_interval = base.cadence;
        DensityTrajectory pde = solve(pde_initial, base.regime, base.horizon, options);

        auto run_cell = [&, seed](double delta) {
            CellOutput out;
            out.cell.delta = delta;
            out.cell.seed = seed;
            try {
                RunConfig cfg = base;
                cfg.delta = delta;
                cfg.seed = seed;
                ParticleSystem system = build_system(cfg);
                out.cell.particle_count = system.radii.size();
                {
                    const MeanFieldState mf = mean_field(system);
                    out.cell.survey_max_deviation =
                        deviation_survey(system, mf.u_bar, cfg.survey_samples, cfg.survey_seed)
                            .max_deviation;
                }
                out.trajectory = simulate(system, cfg.horizon, cfg.integrator, cfg.cadence);
                out.cell.residual = weak_form_residual(out.trajectory, phi);
                for (double t : summary.checkpoints) {
                    const std::size_t kp = nearestSnapshot(out.trajectory.times, t);
                    const std::size_t kq = nearestSnapshot(pde.times, t);
                    out.cell.w1.push_back(wasserstein1(
                        empirical_from_snapshot(out.trajectory.snapshots[kp]), pde.snapshots[kq]));
                }
            } catch (const std::exception& e) {
                out.cell.failed = true;
                out.cell.error = e.what();
            }
            return out;
        };

        std::vector<CellOutput> outputs;
        if (workers > 1) {
            std::vector<std::future<CellOutput>> futures;
            for (double d : sorted)
                futures.push_back(std::async(std::launch::async, run_cell, d));
            for (auto& f : futures) outputs.push_back(f.get());
        } else {
            for (double d : sorted) outputs.push_back(run_cell(d));
        }
        for (auto& o : outputs) summary.cells.push_back(o.cell);

        if (!out_dir.empty()) {
            write_density_csv(pde, config_hash(finest_cfg),
                              out_dir / ("pde_seed" + std::to_string(seed)));
            for (auto& o : outputs) {
                if (o.cell.failed) continue;
                std::ostringstream name;
                name << "particles_delta" << o.cell.delta << "_seed" << seed;
                write_trajectory_csv(o.trajectory, config_hash(base), out_dir / name.str());
            }
        }
    }

    // slope fits over the successful cells (averaged over seeds per delta)
    std::vector<double> xs, residuals, deviations;
    summary.w1_decreasing = true;
    std::vector<double> prev_w1;
    for (double d : sorted) {
        double res = 0.0, dev = 0.0;
        std::vector<double> w1_mean(summary.checkpoints.size(), 0.0);
        std::size_t count = 0;
        for (const SweepCell& cell : summary.cells) {
            if (cell.failed || cell.delta != d) continue;
            res += cell.residual;
            dev += cell.survey_max_deviation;
            for (std::size_t k = 0; k < w1_mean.size() && k < cell.w1.size(); ++k)
                w1_mean[k] += cell.w1[k];
            ++count;
        }
        if (count == 0) continue;
        xs.push_back(d);
        residuals.push_back(res / count);
        deviations.push_back(dev / count);
        for (double& w : w1_mean) w /= static_cast<double>(count);
        if (!prev_w1.empty()) {
            for (std::size_t k = 0; k < w1_mean.size(); ++k)
                if (w1_mean[k] > 1.2 * prev_w1[k]) summary.w1_decreasing = false;
        }
        prev_w1 = w1_mean;
    }
    if (xs.size() >= 2) {
        summary.residual_slope = log_log_slope(xs, residuals);
        summary.deviation_slope = log_log_slope(xs, deviations);
    }
    summary.gamma = base.scaleParameters().gamma;

    if (!out_dir.empty()) {
        auto out = openCsv(out_dir / "summary.csv", config_hash(base));
        out << "delta,seed,particle_count,residual,survey_max_deviation";
        for (std::size_t k = 0; k < summary.checkpoints.size(); ++k)
            out << ",w1_t" << summary.checkpoints[k];
        out << ",failed\n";
        for (const SweepCell& cell : summary.cells) {
            out << cell.delta << ',' << cell.seed << ',' << cell.particle_count << ','
                << cell.residual << ',' << cell.survey_max_deviation;
            for (std::size_t k = 0; k < summary.checkpoints.size(); ++k)
                out << ',' << (k < cell.w1.size() ? cell.w1[k] : std::nan(""));
            out << ',' << (cell.failed ? 1 : 0) << "\n";
        }
        auto slopes = openCsv(out_dir / "slopes.csv", config_hash(base));
        slopes << "residual_slope,deviation_slope,gamma,w1_decreasing\n";
        slopes << summary.residual_slope << ',' << summary.deviation_slope << ','
               << summary.gamma << ',' << (summary.w1_decreasing ? 1 : 0) << "\n";
    }
    return summary;
}

int run_compare(const RunConfig& config, const std::filesystem::path& out_dir) {
    try {
        ParticleSystem system = build_system(config);
        Trajectory traj = simulate(system, config.horizon, config.integrator, config.cadence);
        const RadiusGrid grid =
            RadiusGrid::make(config.grid_r_min, config.grid_r_max, config.grid_cells);
        RadiusDensity initial = density_from_radii(grid, traj.snapshots.front().radii);
        PdeSolveOptions options;
        options.cfl = config.cfl;
        options.snapshot_interval = config.cadence;
        DensityTrajectory pde = solve(initial, config.regime, config.horizon, options);

        auto out = openCsv(out_dir / "compare.csv", config_hash(config));
        out << "time,w1,particle_active_fraction,pde_active_fraction\n";
        const auto pde_fraction = active_fraction_series(pde);
        for (std::size_t k = 0; k < traj.times.size(); ++k) {
            const std::size_t kq = nearestSnapshot(pde.times, traj.times[k]);
            const EmpiricalMeasure emp = empirical_from_snapshot(traj.snapshots[k]);
            if (!(emp.total_weight > 0.0)) break;
            out << traj.times[k] << ',' << wasserstein1(emp, pde.snapshots[kq]) << ','
                << traj.snapshots[k].activeFraction() << ',' << pde_fraction[kq].second << "\n";
        }
        return 0;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        std::filesystem::create_directories(out_dir);
        std::ofstream(out_dir / "numerical_failure.txt") << e.what() << "\n";
        return 3;
    }
}

}  // namespace ripening::harness
