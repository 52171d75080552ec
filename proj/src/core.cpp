#include "ripening/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ripening {

double derive_gamma(double delta, double alpha, double epsilon) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("derive_gamma: delta must lie in (0,1)");
    if (!(epsilon > 0.0))
        throw std::invalid_argument("derive_gamma: epsilon must be positive");
    if (!(alpha > 1.5 + epsilon))
        throw std::invalid_argument("derive_gamma: alpha must exceed 3/2 + epsilon");
    // For delta < 1 the largest of delta^a, delta^{2a-3}, delta^{2a-3-eps}
    // is the one with the smallest exponent.
    return std::min(alpha, 2.0 * alpha - 3.0 - epsilon);
}

ScaleParameters ScaleParameters::make(double delta, double alpha, double epsilon) {
    ScaleParameters p;
    p.delta = delta;
    p.alpha = alpha;
    p.epsilon = epsilon;
    p.gamma = derive_gamma(delta, alpha, epsilon);
    return p;
}

ScaleParameters ScaleParameters::makeDiagnosticsOnly(double delta, double alpha, double epsilon) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("ScaleParameters: delta must lie in (0,1)");
    if (!(epsilon > 0.0))
        throw std::invalid_argument("ScaleParameters: epsilon must be positive");
    ScaleParameters p;
    p.delta = delta;
    p.alpha = alpha;
    p.epsilon = epsilon;
    p.gamma = std::min(alpha, 2.0 * alpha - 3.0 - epsilon);
    return p;
}

double ScaleParameters::deltaAlpha() const { return std::pow(delta, alpha); }
double ScaleParameters::deltaGamma() const { return std::pow(delta, gamma); }

std::size_t ParticleSystem::activeCount() const {
    return static_cast<std::size_t>(std::count(active.begin(), active.end(), char(1)));
}

double ParticleSystem::activeFraction() const {
    if (initial_count == 0) return 0.0;
    return static_cast<double>(activeCount()) / static_cast<double>(initial_count);
}

double ParticleSystem::maxActiveRadius() const {
    double m = 0.0;
    for (std::size_t i = 0; i < radii.size(); ++i)
        if (active[i]) m = std::max(m, radii[i]);
    return m;
}

double ParticleSystem::minActiveRadius() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < radii.size(); ++i)
        if (active[i]) m = std::min(m, radii[i]);
    return std::isfinite(m) ? m : 0.0;
}

double ParticleSystem::totalVolume() const {
    double v = 0.0;
    for (std::size_t i = 0; i < radii.size(); ++i)
        if (active[i]) v += radii[i] * radii[i] * radii[i];
    return v;
}

double ParticleSystem::totalSurface() const {
    double s = 0.0;
    for (std::size_t i = 0; i < radii.size(); ++i)
        if (active[i]) s += radii[i] * radii[i];
    return s;
}

void ParticleSystem::checkConsistent() const {
    const std::size_t n = radii.size();
    if (centers.size() != n || active.size() != n || extinction_times.size() != n)
        throw std::logic_error("ParticleSystem: field sizes disagree");
    for (std::size_t i = 0; i < n; ++i) {
        const bool pos = radii[i] > 0.0;
        if (pos != static_cast<bool>(active[i]))
            throw std::logic_error("ParticleSystem: radius positivity disagrees with active flag");
    }
}

ParticleSystem makeSystem(ScaleParameters scale, std::vector<double> radii,
                          std::vector<Vec3> centers) {
    if (radii.size() != centers.size())
        throw std::invalid_argument("makeSystem: radii and centers must have equal length");
    ParticleSystem s;
    s.scale = scale;
    s.initial_count = radii.size();
    s.radii = std::move(radii);
    s.centers = std::move(centers);
    s.active.assign(s.radii.size(), char(1));
    s.extinction_times.assign(s.radii.size(), std::nullopt);
    for (std::size_t i = 0; i < s.radii.size(); ++i) {
        if (!(s.radii[i] > 0.0))
            throw std::invalid_argument("makeSystem: initial radii must be positive");
    }
    return s;
}

ParticleSystem makeSystemRadiiOnly(ScaleParameters scale, std::vector<double> radii) {
    std::vector<Vec3> centers(radii.size());
    for (std::size_t i = 0; i < centers.size(); ++i) {
        const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(centers.size());
        centers[i] = {x, 0.5, 0.5};
    }
    return makeSystem(scale, std::move(radii), std::move(centers));
}

MeanFieldState mean_field(const std::vector<double>& radii, double delta_alpha) {
    if (delta_alpha < 0.0)
        throw std::invalid_argument("mean_field: delta_alpha must be nonnegative");
    MeanFieldState st;
    for (double r : radii) {
        if (r <= 0.0) continue;
        const double w = 1.0 / (1.0 + delta_alpha * r);
        st.weighted_first_moment += r * w;
        st.weighted_second_moment += r * r * w;
    }
    if (st.weighted_second_moment <= 0.0) throw ExtinctSystemError{};
    st.u_bar = st.weighted_first_moment / st.weighted_second_moment;
    return st;
}

double growth_rate(double radius, double u_bar, double delta_alpha) {
    if (!(radius > 0.0))
        throw std::domain_error("growth_rate: radius must be positive (extinct particle queried)");
    return (u_bar - 1.0 / radius) / (1.0 + delta_alpha * radius);
}

Diagnostics diagnostics(const ParticleSystem& system) {
    if (system.activeCount() == 0) throw ExtinctSystemError{};
    const double dA = system.scale.deltaAlpha();
    const MeanFieldState mf = mean_field(system.radii, dA);
    Diagnostics d;
    d.u_bar = mf.u_bar;
    d.active_fraction = system.activeFraction();
    d.min_radius = system.minActiveRadius();
    d.max_radius = system.maxActiveRadius();
    for (std::size_t i = 0; i < system.radii.size(); ++i) {
        if (!system.active[i]) continue;
        const double r = system.radii[i];
        const double rdot = growth_rate(r, mf.u_bar, dA);
        d.total_volume += r * r * r;
        d.total_surface += r * r;
        d.dissipation += r * rdot + r * r * rdot * rdot;
    }
    return d;
}

}  // namespace ripening
