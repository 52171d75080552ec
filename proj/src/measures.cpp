#include "ripening/measures.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>

namespace ripening {

EmpiricalMeasure empirical_from_snapshot(const ParticleSystem& system) {
    EmpiricalMeasure m;
    if (system.initial_count == 0) return m;
    const double w = 1.0 / static_cast<double>(system.initial_count);
    for (std::size_t i = 0; i < system.radii.size(); ++i) {
        if (!system.active[i]) continue;
        m.atoms.emplace_back(system.radii[i], w);
        m.total_weight += w;
    }
    return m;
}

namespace {

// normalized CDF with separate left/right limits (atoms jump, grids do not)
struct PiecewiseCdf {
    std::vector<double> breakpoints;
    std::function<double(double)> left;
    std::function<double(double)> right;
};

PiecewiseCdf cdfOfAtoms(const EmpiricalMeasure& m) {
    if (!(m.total_weight > 0.0))
        throw std::invalid_argument("wasserstein1: zero-mass atomic measure");
    std::vector<std::pair<double, double>> atoms = m.atoms;
    std::sort(atoms.begin(), atoms.end());
    auto positions = std::make_shared<std::vector<double>>();
    auto cumulative = std::make_shared<std::vector<double>>();
    double acc = 0.0;
    for (auto& [pos, w] : atoms) {
        acc += w / m.total_weight;
        if (!positions->empty() && positions->back() == pos) {
            cumulative->back() = acc;
        } else {
            positions->push_back(pos);
            cumulative->push_back(acc);
        }
    }
    PiecewiseCdf cdf;
    cdf.breakpoints = *positions;
    cdf.right = [=](double x) {
        const auto it = std::upper_bound(positions->begin(), positions->end(), x);
        return it == positions->begin() ? 0.0 : (*cumulative)[it - positions->begin() - 1];
    };
    cdf.left = [=](double x) {
        const auto it = std::lower_bound(positions->begin(), positions->end(), x);
        return it == positions->begin() ? 0.0 : (*cumulative)[it - positions->begin() - 1];
    };
    return cdf;
}

PiecewiseCdf cdfOfDensity(const RadiusDensity& d) {
    const double mass = d.moment(0);
    if (!(mass > 0.0)) throw std::invalid_argument("wasserstein1: zero-mass density");
    const auto grid = std::make_shared<RadiusGrid>(d.grid);
    auto cum = std::make_shared<std::vector<double>>(d.grid.cell_count + 1, 0.0);
    const double dr = d.grid.dr();
    for (std::size_t i = 0; i < d.grid.cell_count; ++i)
        (*cum)[i + 1] = (*cum)[i] + d.values[i] * dr / mass;
    cum->back() = 1.0;
    PiecewiseCdf cdf;
    cdf.breakpoints = d.grid.edges;
    auto eval = [=](double x) {
        if (x <= grid->r_min) return 0.0;
        if (x >= grid->r_max) return 1.0;
        const double s = (x - grid->r_min) / dr;
        auto cell = static_cast<std::size_t>(s);
        cell = std::min(cell, grid->cell_count - 1);
        const double frac = s - static_cast<double>(cell);
        return (*cum)[cell] + frac * ((*cum)[cell + 1] - (*cum)[cell]);
    };
    cdf.left = eval;
    cdf.right = eval;
    return cdf;
}

double cdfL1Distance(const PiecewiseCdf& a, const PiecewiseCdf& b) {
    std::vector<double> bp;
    bp.reserve(a.breakpoints.size() + b.breakpoints.size());
    bp.insert(bp.end(), a.breakpoints.begin(), a.breakpoints.end());
    bp.insert(bp.end(), b.breakpoints.begin(), b.breakpoints.end());
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());

    double total = 0.0;
    for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
        const double lo = bp[k], hi = bp[k + 1];
        const double width = hi - lo;
        if (!(width > 0.0)) continue;
        // both CDFs are linear on the open interval
        const double ga = a.right(lo) - b.right(lo);
        const double gb = a.left(hi) - b.left(hi);
        if (ga * gb >= 0.0) {
            total += 0.5 * (std::abs(ga) + std::abs(gb)) * width;
        } else {
            const double split = width * std::abs(ga) / (std::abs(ga) + std::abs(gb));
            total += 0.5 * (std::abs(ga) * split + std::abs(gb) * (width - split));
        }
    }
    return total;
}

}  // namespace

double wasserstein1(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    return cdfL1Distance(cdfOfAtoms(a), cdfOfAtoms(b));
}

double wasserstein1(const EmpiricalMeasure& a, const RadiusDensity& b) {
    return cdfL1Distance(cdfOfAtoms(a), cdfOfDensity(b));
}

double wasserstein1(const RadiusDensity& a, const RadiusDensity& b) {
    return cdfL1Distance(cdfOfDensity(a), cdfOfDensity(b));
}

/* ----------------- test functions and the weak form ----------------- */

namespace {

double bumpKernel(double s) {
    if (std::abs(s) >= 1.0) return 0.0;
    const double q = 1.0 - s * s;
    return q * q * q;
}

double bumpKernelPrime(double s) {
    if (std::abs(s) >= 1.0) return 0.0;
    const double q = 1.0 - s * s;
    return -6.0 * s * q * q;
}

}  // namespace

BumpTestFunction::BumpTestFunction(double t_end, double r_lo, double r_hi)
    : t_end_(t_end), r_lo_(r_lo), r_hi_(r_hi) {
    if (!(t_end > 0.0)) throw std::invalid_argument("BumpTestFunction: t_end must be positive");
    if (!(r_lo > 0.0 && r_lo < r_hi))
        throw std::invalid_argument("BumpTestFunction: need 0 < r_lo < r_hi");
    r_center_ = 0.5 * (r_lo + r_hi);
    r_width_ = 0.5 * (r_hi - r_lo);
}

double BumpTestFunction::timeBump(double t) const {
    if (t < 0.0) return 0.0;
    return bumpKernel(t / t_end_);
}

double BumpTestFunction::timeBumpPrime(double t) const {
    if (t < 0.0) return 0.0;
    return bumpKernelPrime(t / t_end_) / t_end_;
}

double BumpTestFunction::radiusBump(double r) const {
    return bumpKernel((r - r_center_) / r_width_);
}

double BumpTestFunction::radiusBumpPrime(double r) const {
    return bumpKernelPrime((r - r_center_) / r_width_) / r_width_;
}

double BumpTestFunction::value(double t, double r) const { return timeBump(t) * radiusBump(r); }
double BumpTestFunction::dt(double t, double r) const { return timeBumpPrime(t) * radiusBump(r); }
double BumpTestFunction::dr(double t, double r) const { return timeBump(t) * radiusBumpPrime(r); }

namespace {

double trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < t.size(); ++k)
        s += 0.5 * (f[k] + f[k + 1]) * (t[k + 1] - t[k]);
    return s;
}

}  // namespace

double weak_form_residual(const Trajectory& trajectory, const BumpTestFunction& phi) {
    if (trajectory.times.empty()) throw std::invalid_argument("weak_form_residual: empty trajectory");
    if (phi.timeSupportEnd() > trajectory.times.back() * (1.0 + 1e-12))
        throw std::invalid_argument("weak_form_residual: phi support exceeds trajectory horizon");

    const double inv_n = 1.0 / static_cast<double>(trajectory.snapshots.front().initial_count);
    std::vector<double> integrand(trajectory.times.size(), 0.0);
    for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
        const double t = trajectory.times[k];
        const ParticleSystem& snap = trajectory.snapshots[k];
        const double u_bar = trajectory.diagnostics_series[k].u_bar;
        double acc = 0.0;
        for (std::size_t i = 0; i < snap.radii.size(); ++i) {
            if (!snap.active[i]) continue;
            const double r = snap.radii[i];
            acc += phi.dt(t, r) + (u_bar - 1.0 / r) * phi.dr(t, r);
        }
        integrand[k] = acc * inv_n;
    }
    double initial_term = 0.0;
    const ParticleSystem& first = trajectory.snapshots.front();
    for (std::size_t i = 0; i < first.radii.size(); ++i)
        if (first.active[i]) initial_term += phi.value(0.0, first.radii[i]);
    initial_term *= inv_n;
    return std::abs(trapezoid(trajectory.times, integrand) + initial_term);
}

double weak_form_residual(const DensityTrajectory& trajectory, const BumpTestFunction& phi) {
    if (trajectory.times.empty()) throw std::invalid_argument("weak_form_residual: empty trajectory");
    if (phi.timeSupportEnd() > trajectory.times.back() * (1.0 + 1e-12))
        throw std::invalid_argument("weak_form_residual: phi support exceeds trajectory horizon");

    const double m0 = trajectory.stats.front().moment0;
    if (!(m0 > 0.0)) throw std::invalid_argument("weak_form_residual: empty initial density");
    std::vector<double> integrand(trajectory.times.size(), 0.0);
    for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
        const double t = trajectory.times[k];
        const RadiusDensity& d = trajectory.snapshots[k];
        const double u_bar = trajectory.stats[k].u_bar;
        const double dr = d.grid.dr();
        double acc = 0.0;
        for (std::size_t c = 0; c < d.values.size(); ++c) {
            if (d.values[c] == 0.0) continue;
            const double r = d.grid.centers[c];
            acc += (phi.dt(t, r) + (u_bar - 1.0 / r) * phi.dr(t, r)) * d.values[c] * dr;
        }
        integrand[k] = acc / m0;
    }
    double initial_term = 0.0;
    const RadiusDensity& first = trajectory.snapshots.front();
    for (std::size_t c = 0; c < first.values.size(); ++c)
        initial_term += phi.value(0.0, first.grid.centers[c]) * first.values[c] * first.grid.dr();
    initial_term /= m0;
    return std::abs(trapezoid(trajectory.times, integrand) + initial_term);
}

std::vector<std::pair<double, double>> active_fraction_series(const Trajectory& trajectory) {
    std::vector<std::pair<double, double>> out;
    out.reserve(trajectory.times.size());
    for (std::size_t k = 0; k < trajectory.times.size(); ++k)
        out.emplace_back(trajectory.times[k], trajectory.snapshots[k].activeFraction());
    return out;
}

std::vector<std::pair<double, double>> active_fraction_series(const DensityTrajectory& trajectory) {
    std::vector<std::pair<double, double>> out;
    out.reserve(trajectory.times.size());
    const double m0 = trajectory.stats.empty() ? 0.0 : trajectory.stats.front().active_mass;
    for (std::size_t k = 0; k < trajectory.times.size(); ++k)
        out.emplace_back(trajectory.times[k],
                         m0 > 0.0 ? trajectory.stats[k].active_mass / m0 : 0.0);
    return out;
}

}  // namespace ripening
