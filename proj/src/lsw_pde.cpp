#include "ripening/lsw_pde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ripening {

double regime_velocity(KineticRegime regime, double radius, double u_bar) {
    switch (regime) {
        case KineticRegime::Reaction:
            return u_bar - 1.0 / radius;
        case KineticRegime::Diffusion:
            return (radius * u_bar - 1.0) / (radius * radius);
    }
    throw std::logic_error("regime_velocity: unknown regime");
}

RadiusGrid RadiusGrid::make(double r_min, double r_max, std::size_t cell_count) {
    if (!(r_min > 0.0 && r_min < r_max))
        throw std::invalid_argument("RadiusGrid: need 0 < r_min < r_max");
    if (cell_count < 2) throw std::invalid_argument("RadiusGrid: need at least two cells");
    RadiusGrid g;
    g.r_min = r_min;
    g.r_max = r_max;
    g.cell_count = cell_count;
    g.edges.resize(cell_count + 1);
    g.centers.resize(cell_count);
    const double dr = (r_max - r_min) / static_cast<double>(cell_count);
    for (std::size_t i = 0; i <= cell_count; ++i) g.edges[i] = r_min + dr * static_cast<double>(i);
    g.edges.back() = r_max;
    for (std::size_t i = 0; i < cell_count; ++i)
        g.centers[i] = r_min + dr * (static_cast<double>(i) + 0.5);
    return g;
}

double RadiusDensity::moment(int order) const {
    double m = 0.0;
    const double dr = grid.dr();
    for (std::size_t i = 0; i < values.size(); ++i)
        m += std::pow(grid.centers[i], order) * values[i] * dr;
    return m;
}

void RadiusDensity::refreshActiveMass() { active_mass = moment(0); }

RadiusDensity make_uniform_density(const RadiusGrid& grid, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("make_uniform_density: need lo < hi");
    RadiusDensity d;
    d.grid = grid;
    d.values.assign(grid.cell_count, 0.0);
    for (std::size_t i = 0; i < grid.cell_count; ++i) {
        const double a = std::max(grid.edges[i], lo);
        const double b = std::min(grid.edges[i + 1], hi);
        if (b > a) d.values[i] = (b - a) / grid.dr();
    }
    d.refreshActiveMass();
    return d;
}

RadiusDensity make_bump_density(const RadiusGrid& grid, double center, double width) {
    RadiusDensity d;
    d.grid = grid;
    d.values.assign(grid.cell_count, 0.0);
    for (std::size_t i = 0; i < grid.cell_count; ++i) {
        const double s = (grid.centers[i] - center) / width;
        if (std::abs(s) < 1.0) {
            const double q = 1.0 - s * s;
            d.values[i] = q * q * q;
        }
    }
    d.refreshActiveMass();
    return d;
}

RadiusDensity density_from_radii(const RadiusGrid& grid, const std::vector<double>& radii) {
    RadiusDensity d;
    d.grid = grid;
    d.values.assign(grid.cell_count, 0.0);
    std::size_t inside = 0;
    for (double r : radii) {
        if (r < grid.r_min || r >= grid.r_max) continue;
        const auto cell = static_cast<std::size_t>((r - grid.r_min) / grid.dr());
        d.values[std::min(cell, grid.cell_count - 1)] += 1.0;
        ++inside;
    }
    if (inside == 0) throw std::invalid_argument("density_from_radii: no radii inside the grid");
    const double norm = static_cast<double>(inside) * grid.dr();
    for (double& v : d.values) v /= norm;
    d.refreshActiveMass();
    return d;
}

double closure_mean_field(const RadiusDensity& density, KineticRegime regime) {
    double numer = 0.0, denom = 0.0;
    const double dr = density.grid.dr();
    for (std::size_t i = 0; i < density.values.size(); ++i) {
        const double r = density.grid.centers[i];
        const double m = density.values[i] * dr;
        if (regime == KineticRegime::Reaction) {
            numer += r * m;
            denom += r * r * m;
        } else {
            numer += m;
            denom += r * m;
        }
    }
    if (!(denom > 0.0)) throw ExtinctSystemError{};
    return numer / denom;
}

RadiusDensity advect_step(const RadiusDensity& density, KineticRegime regime, double dt,
                          std::optional<double> u_bar_override, double cfl_limit) {
    if (!(dt > 0.0)) throw std::invalid_argument("advect_step: dt must be positive");
    const RadiusGrid& grid = density.grid;
    const double dr = grid.dr();
    const std::size_t m = grid.cell_count;

    const double u_bar =
        u_bar_override ? *u_bar_override : closure_mean_field(density, regime);

    std::vector<double> v(m + 1);
    double vmax = 0.0;
    for (std::size_t e = 0; e <= m; ++e) {
        v[e] = regime_velocity(regime, grid.edges[e], u_bar);
        vmax = std::max(vmax, std::abs(v[e]));
    }
    if (vmax > 0.0 && dt > cfl_limit * dr / vmax) throw CflViolation(cfl_limit * dr / vmax);

    // support must stay away from r_max
    const double support_tol = 1e-12 * (1.0 + density.active_mass / (grid.r_max - grid.r_min));
    if (density.values[m - 1] > support_tol && v[m] > 0.0)
        throw std::runtime_error("advect_step: density reaches r_max (domain too small)");

    std::vector<double> flux(m + 1, 0.0);
    // r_min edge: outflow only (no inflow from below zero radius)
    flux[0] = v[0] < 0.0 ? v[0] * density.values[0] : 0.0;
    for (std::size_t e = 1; e < m; ++e)
        flux[e] = v[e] > 0.0 ? v[e] * density.values[e - 1] : v[e] * density.values[e];
    flux[m] = 0.0;

    RadiusDensity out = density;
    for (std::size_t c = 0; c < m; ++c) {
        out.values[c] = density.values[c] - dt / dr * (flux[c + 1] - flux[c]);
        if (out.values[c] < 0.0 && out.values[c] > -1e-15) out.values[c] = 0.0;
    }
    out.escaped_mass = density.escaped_mass - flux[0] * dt;
    out.refreshActiveMass();
    return out;
}

DensityTrajectory solve(const RadiusDensity& initial, KineticRegime regime, double horizon,
                        const PdeSolveOptions& options) {
    if (!(horizon > 0.0)) throw std::invalid_argument("solve: horizon must be positive");
    for (double vv : initial.values)
        if (vv < 0.0) throw std::invalid_argument("solve: initial density must be nonnegative");

    auto stats_of = [&](const RadiusDensity& d, double t) {
        DensityStats s;
        s.time = t;
        if (options.u_bar_override) {
            s.u_bar = *options.u_bar_override;
        } else {
            try {
                s.u_bar = closure_mean_field(d, regime);
            } catch (const ExtinctSystemError&) {
                s.u_bar = 0.0;
            }
        }
        s.moment0 = d.moment(0);
        s.moment1 = d.moment(1);
        s.moment2 = d.moment(2);
        s.moment3 = d.moment(3);
        s.active_mass = d.active_mass;
        s.escaped_mass = d.escaped_mass;
        return s;
    };

    DensityTrajectory traj;
    RadiusDensity state = initial;
    state.refreshActiveMass();
    if (!(state.active_mass > 0.0)) throw ExtinctSystemError{};

    double t = 0.0;
    traj.times.push_back(t);
    traj.snapshots.push_back(state);
    traj.stats.push_back(stats_of(state, t));

    const double dr = state.grid.dr();
    double next_out = std::min(options.snapshot_interval, horizon);
    const double t_eps = 1e-12 * horizon;

    while (t < horizon - t_eps && state.active_mass > 1e-14) {
        const double u_bar = options.u_bar_override ? *options.u_bar_override
                                                    : closure_mean_field(state, regime);
        double vmax = 0.0;
        for (double e : state.grid.edges)
            vmax = std::max(vmax, std::abs(regime_velocity(regime, e, u_bar)));
        double dt = vmax > 0.0 ? options.cfl * dr / vmax : next_out - t;
        dt = std::min({dt, next_out - t, horizon - t});
        state = advect_step(state, regime, dt, options.u_bar_override, options.cfl + 1e-12);
        t += dt;
        if (t >= next_out - t_eps) {
            traj.times.push_back(t);
            traj.snapshots.push_back(state);
            traj.stats.push_back(stats_of(state, t));
            next_out = std::min(next_out + options.snapshot_interval, horizon);
            if (next_out <= t + t_eps) next_out = horizon;
        }
    }
    if (traj.times.back() < t - t_eps) {
        traj.times.push_back(t);
        traj.snapshots.push_back(state);
        traj.stats.push_back(stats_of(state, t));
    }
    return traj;
}

}  // namespace ripening
