#include "ripening/particle_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ripening {

void IntegratorConfig::validate() const {
    if (!(dt_max > 0.0)) throw std::invalid_argument("IntegratorConfig: dt_max must be positive");
    if (!(tolerance > 0.0)) throw std::invalid_argument("IntegratorConfig: tolerance must be positive");
    if (!(extinction_radius > 0.0 && extinction_radius < freeze_threshold))
        throw std::invalid_argument("IntegratorConfig: need 0 < extinction_radius < freeze_threshold");
}

std::optional<double> detect_extinction(double radius, double u_bar, double dt,
                                        const IntegratorConfig& config, double delta_alpha) {
    config.validate();
    if (!(radius > 0.0)) throw std::domain_error("detect_extinction: radius must be positive");
    if (radius > config.freeze_threshold)
        throw std::logic_error("detect_extinction: radius above freeze_threshold");
    if (u_bar > 0.0 && radius > 0.25 / u_bar)
        throw std::invalid_argument("detect_extinction: radius above 1/(4 u_bar)");
    if (radius <= config.extinction_radius) return 0.0;

    // Frozen u_bar: separable ODE, tau = int_{r_ext}^{R0} R(1+aR)/(1-u R) dR.
    // The precondition guarantees 1 - u R >= 3/4 on the whole range.
    const double a = delta_alpha;
    const double lo = config.extinction_radius;
    const double hi = radius;
    auto f = [&](double r) { return r * (1.0 + a * r) / (1.0 - u_bar * r); };
    const int n = 256;  // composite Simpson, integrand is smooth
    const double h = (hi - lo) / n;
    double sum = f(lo) + f(hi);
    for (int k = 1; k < n; ++k) sum += (k % 2 ? 4.0 : 2.0) * f(lo + k * h);
    const double tau = sum * h / 3.0;
    if (tau > dt) return std::nullopt;
    return tau;
}

namespace {

// RK4 on y = R^2; ydot = 2 (u_bar sqrt(y) - 1) / (1 + dA sqrt(y)) with u_bar
// recomputed from the stage radii of all integrated particles.
void computeRhs(const std::vector<double>& y, double dA, std::vector<double>& dy) {
    double w1 = 0.0, w2 = 0.0;
    const std::size_t n = y.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double r = std::sqrt(std::max(y[i], 0.0));
        const double w = 1.0 / (1.0 + dA * r);
        w1 += r * w;
        w2 += r * r * w;
    }
    if (!(w2 > 0.0)) throw ExtinctSystemError{};
    const double u = w1 / w2;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = std::sqrt(std::max(y[i], 0.0));
        dy[i] = 2.0 * (u * r - 1.0) / (1.0 + dA * r);
    }
}

void rk4(std::vector<double>& y, double dt, double dA, std::vector<double>& k1,
         std::vector<double>& k2, std::vector<double>& k3, std::vector<double>& k4,
         std::vector<double>& tmp) {
    const std::size_t n = y.size();
    computeRhs(y, dA, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
    computeRhs(tmp, dA, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
    computeRhs(tmp, dA, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * k3[i];
    computeRhs(tmp, dA, k4);
    for (std::size_t i = 0; i < n; ++i)
        y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

}  // namespace

StepResult step(ParticleSystem& system, double dt, const IntegratorConfig& config) {
    config.validate();
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
    if (dt > config.dt_max) throw std::invalid_argument("step: dt exceeds dt_max");

    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < system.radii.size(); ++i)
        if (system.active[i]) idx.push_back(i);
    if (idx.empty()) throw ExtinctSystemError{};

    const double dA = system.scale.deltaAlpha();
    const std::size_t n = idx.size();
    std::vector<double> y(n);
    for (std::size_t k = 0; k < n; ++k) y[k] = system.radii[idx[k]] * system.radii[idx[k]];

    // Localize extinctions of small particles with the frozen-u_bar substep,
    // then cut the step at the earliest offset.
    const MeanFieldState mf = mean_field(system.radii, dA);
    double dt_cut = dt;
    std::vector<std::pair<std::size_t, double>> pending;  // (slot k, tau)
    for (std::size_t k = 0; k < n; ++k) {
        const double r = system.radii[idx[k]];
        if (r <= config.freeze_threshold && (mf.u_bar <= 0.0 || r <= 0.25 / mf.u_bar)) {
            auto tau = detect_extinction(r, mf.u_bar, dt, config, dA);
            if (tau) {
                pending.emplace_back(k, *tau);
                dt_cut = std::min(dt_cut, *tau);
            }
        }
    }

    StepResult result;
    if (dt_cut <= 0.0) {
        // a particle is already at or below the extinction radius
        for (auto& [k, tau] : pending) {
            if (tau <= 0.0) {
                const double r = system.radii[idx[k]];
                result.removed_volume += r * r * r;
                system.radii[idx[k]] = 0.0;
                system.active[idx[k]] = 0;
                result.extinctions.emplace_back(idx[k], 0.0);
            }
        }
        result.accepted = true;
        result.advanced = 0.0;
        return result;
    }

    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    std::vector<double> yFull(n), yHalf(n);
    const double y_ext = config.extinction_radius * config.extinction_radius;
    for (int attempt = 0; attempt < 4; ++attempt) {
        yFull = y;
        yHalf = y;
        rk4(yFull, dt_cut, dA, k1, k2, k3, k4, tmp);
        rk4(yHalf, 0.5 * dt_cut, dA, k1, k2, k3, k4, tmp);
        rk4(yHalf, 0.5 * dt_cut, dA, k1, k2, k3, k4, tmp);
        if (attempt == 3) break;
        // Event handling: if a particle not already scheduled by the frozen
        // substep would cross zero inside this step, stop just short of the
        // crossing so its removal happens at the extinction radius instead
        // (that keeps the volume ledger at r_ext^3 per extinction).
        double cut = dt_cut;
        for (std::size_t k = 0; k < n; ++k) {
            if (yHalf[k] > y_ext || y[k] <= yHalf[k]) continue;
            bool scheduled = false;
            for (auto& [kp, tau] : pending)
                if (kp == k && tau <= dt_cut * (1.0 + 1e-12)) scheduled = true;
            if (scheduled) continue;
            const double crossing = dt_cut * (y[k] - y_ext) / (y[k] - yHalf[k]);
            cut = std::min(cut, 0.95 * crossing);
        }
        if (cut >= dt_cut * (1.0 - 1e-12) || cut <= 0.0) break;
        dt_cut = cut;
    }

    double err = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        err = std::max(err, std::abs(yFull[k] - yHalf[k]) / (15.0 * (1.0 + std::abs(yHalf[k]))));
    result.error_estimate = err;
    if (err > config.tolerance) return result;  // rejected, system untouched

    result.accepted = true;
    result.advanced = dt_cut;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = idx[k];
        // local extrapolation: the committed state is 5th order
        const double y_new = yHalf[k] + (yHalf[k] - yFull[k]) / 15.0;
        double offset = dt_cut;
        bool gone = y_new <= y_ext;
        if (gone && y[k] > y_new) {
            // linear crossing estimate; ydot is smooth (-> -2) through zero
            offset = dt_cut * (y[k] - y_ext) / (y[k] - y_new);
            offset = std::clamp(offset, 0.0, dt_cut);
        }
        for (auto& [kp, tau] : pending)
            if (kp == k && tau <= dt_cut * (1.0 + 1e-12)) {
                gone = true;
                offset = std::min(offset, tau);
            }
        if (gone) {
            result.removed_volume += std::pow(std::max(y_new, 0.0), 1.5);
            system.radii[i] = 0.0;
            system.active[i] = 0;
            system.extinction_times[i] = offset;  // offset; caller rebases
            result.extinctions.emplace_back(i, offset);
        } else {
            system.radii[i] = std::sqrt(std::max(y_new, 0.0));
        }
    }
    return result;
}

namespace {

double minPairwiseDistance(const std::vector<Vec3>& centers) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < centers.size(); ++i) {
        for (std::size_t j = i + 1; j < centers.size(); ++j) {
            const double dx = centers[i][0] - centers[j][0];
            const double dy = centers[i][1] - centers[j][1];
            const double dz = centers[i][2] - centers[j][2];
            best = std::min(best, std::sqrt(dx * dx + dy * dy + dz * dz));
        }
    }
    return best;
}

}  // namespace

Trajectory simulate(const ParticleSystem& initial, double horizon,
                    const IntegratorConfig& config, double snapshot_interval) {
    config.validate();
    if (!(horizon > 0.0)) throw std::invalid_argument("simulate: horizon must be positive");
    if (!(snapshot_interval > 0.0))
        throw std::invalid_argument("simulate: snapshot_interval must be positive");
    initial.checkConsistent();
    if (initial.activeCount() == 0) throw ExtinctSystemError{};

    ParticleSystem system = initial;
    const double dA = system.scale.deltaAlpha();
    double min_center_dist = std::numeric_limits<double>::infinity();
    if (dA > 0.0 && system.centers.size() > 1) min_center_dist = minPairwiseDistance(system.centers);

    Trajectory traj;
    traj.config = config;
    traj.times.push_back(0.0);
    traj.snapshots.push_back(system);
    traj.diagnostics_series.push_back(diagnostics(system));
    traj.max_u_bar = traj.diagnostics_series.back().u_bar;

    // ring buffers of (t, R) for particles approaching extinction
    constexpr double kWatchRadius = 0.5;
    constexpr std::size_t kWatchCapacity = 64;
    std::vector<std::vector<std::pair<double, double>>> watch(system.radii.size());

    double t = 0.0;
    double volume_target = system.totalVolume();
    double dt = std::min({config.dt_max, snapshot_interval * 0.25, horizon * 0.01});
    double next_out = std::min(snapshot_interval, horizon);
    const double t_eps = 1e-12 * horizon;

    while (t < horizon - t_eps && system.activeCount() > 0) {
        const double dt_try = std::min({dt, config.dt_max, next_out - t});
        StepResult res = step(system, std::max(dt_try, 1e-300), config);
        if (!res.accepted) {
            dt = 0.5 * dt_try;
            if (dt < 1e-14 * horizon)
                throw NumericalFailure("simulate: time step underflow below 1e-14 * horizon");
            continue;
        }
        t += res.advanced;
        // Volume projection: sum R^3 over active particles is an exact
        // invariant of the flow (that is how u_bar is defined), so pull the
        // committed state back onto it. The correction absorbs the truncation
        // error of dying particles and is tiny per step.
        volume_target -= res.removed_volume;
        if (system.activeCount() > 0) {
            const double volume_now = system.totalVolume();
            if (volume_now > 0.0) {
                const double scale_cubed = volume_target / volume_now;
                if (!(scale_cubed > 0.0) || std::abs(scale_cubed - 1.0) > 1e-5)
                    throw NumericalFailure(
                        "simulate: volume projection correction exceeds 1e-5");
                const double scale = std::cbrt(scale_cubed);
                for (std::size_t i = 0; i < system.radii.size(); ++i)
                    if (system.active[i]) system.radii[i] *= scale;
            }
        }
        for (auto& [i, offset] : res.extinctions) {
            const double t_ext = t - res.advanced + offset;
            system.extinction_times[i] = t_ext;
            ExtinctionRecord rec;
            rec.index = i;
            rec.time = t_ext;
            rec.approach_samples = std::move(watch[i]);
            traj.extinction_log.push_back(std::move(rec));
        }
        if (system.activeCount() > 0) {
            const MeanFieldState mf = mean_field(system.radii, dA);
            traj.max_u_bar = std::max(traj.max_u_bar, mf.u_bar);
            for (std::size_t i = 0; i < system.radii.size(); ++i) {
                if (!system.active[i] || system.radii[i] > kWatchRadius) continue;
                auto& buf = watch[i];
                if (buf.size() >= kWatchCapacity) buf.erase(buf.begin());
                buf.emplace_back(t, system.radii[i]);
            }
            if (dA > 0.0 && 2.0 * dA * system.maxActiveRadius() >= min_center_dist)
                throw InvariantViolation("simulate: adjacent particles collide (delta too large)");
        }
        if (res.advanced >= dt_try * (1.0 - 1e-12)) {
            // grow/shrink dt from the error estimate of a full step
            const double e = std::max(res.error_estimate, 1e-300);
            double factor = 0.9 * std::pow(config.tolerance / e, 0.2);
            factor = std::clamp(factor, 0.2, 5.0);
            dt = std::min(dt_try * factor, config.dt_max);
        }
        if (t >= next_out - t_eps) {
            traj.times.push_back(t);
            traj.snapshots.push_back(system);
            if (system.activeCount() > 0) {
                traj.diagnostics_series.push_back(diagnostics(system));
            } else {
                Diagnostics d;
                traj.diagnostics_series.push_back(d);
            }
            next_out = std::min(next_out + snapshot_interval, horizon);
            if (next_out <= t + t_eps) next_out = horizon;
        }
    }
    if (traj.times.back() < t - t_eps) {
        traj.times.push_back(t);
        traj.snapshots.push_back(system);
        Diagnostics d;
        if (system.activeCount() > 0) d = diagnostics(system);
        traj.diagnostics_series.push_back(d);
    }
    return traj;
}

UniformBoundReport uniform_bound_monitor(const Trajectory& trajectory, double bound_factor) {
    if (trajectory.snapshots.empty())
        throw std::invalid_argument("uniform_bound_monitor: empty trajectory");
    UniformBoundReport rep;
    rep.bound_factor = bound_factor;
    rep.initial_u_bar = trajectory.diagnostics_series.front().u_bar;
    rep.initial_max_radius = trajectory.diagnostics_series.front().max_radius;
    rep.max_u_bar = trajectory.max_u_bar;
    for (const auto& d : trajectory.diagnostics_series) {
        rep.max_u_bar = std::max(rep.max_u_bar, d.u_bar);
        rep.max_radius = std::max(rep.max_radius, d.max_radius);
    }
    rep.violated = rep.max_u_bar > bound_factor * rep.initial_u_bar ||
                   rep.max_radius > bound_factor * rep.initial_max_radius;
    return rep;
}

EnvelopeReport check_extinction_envelopes(const Trajectory& trajectory) {
    EnvelopeReport rep;
    const double u_sup = trajectory.max_u_bar;
    const double small_regime = u_sup > 0.0 ? 0.25 / u_sup : std::numeric_limits<double>::infinity();
    for (const auto& rec : trajectory.extinction_log) {
        ++rep.extinctions_checked;
        for (const auto& [t, r] : rec.approach_samples) {
            if (r > small_regime || t >= rec.time) continue;
            const double s = r / std::sqrt(rec.time - t);
            ++rep.samples_checked;
            rep.worst_lower_margin = std::min(rep.worst_lower_margin, s);
            rep.worst_upper_margin = std::max(rep.worst_upper_margin, s);
            if (s < 1.0 - 1e-9 || s > 2.0 + 1e-9) ++rep.samples_violating;
        }
    }
    return rep;
}

}  // namespace ripening
