#include "ripening/monopole_field.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ripening/rng.hpp"

namespace ripening {

namespace {

double distance(const Vec3& a, const Vec3& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double halton(std::uint64_t index, std::uint64_t base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= static_cast<double>(base);
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

// monopole coefficient of particle j (without the 1/|x - x_j| factor)
double monopoleCoefficient(double radius, double u_bar, double dA) {
    return dA * radius / (1.0 + dA * radius) * (1.0 - u_bar * radius) * dA;
}

}  // namespace

std::vector<Vec3> place_lattice(const LatticeConfig& config, std::uint64_t seed) {
    if (!(config.delta > 0.0 && config.delta < 1.0))
        throw std::invalid_argument("place_lattice: delta must lie in (0,1)");
    if (!(config.jitter >= 0.0 && config.jitter < 0.5))
        throw std::invalid_argument("place_lattice: jitter must lie in [0, 1/2)");
    const auto per_axis =
        static_cast<std::size_t>(std::floor(1.0 / config.delta + 0.5 + 1e-12));
    const std::size_t count = per_axis * per_axis * per_axis;
    if (count > config.max_centers)
        throw std::length_error("place_lattice: lattice would need " + std::to_string(count) +
                                " centers, exceeding the budget of " +
                                std::to_string(config.max_centers));
    SplitMix64 rng(seed);
    std::vector<Vec3> centers;
    centers.reserve(count);
    for (std::size_t i = 0; i < per_axis; ++i) {
        for (std::size_t j = 0; j < per_axis; ++j) {
            for (std::size_t k = 0; k < per_axis; ++k) {
                Vec3 p = {(static_cast<double>(i) + 0.5) * config.delta,
                          (static_cast<double>(j) + 0.5) * config.delta,
                          (static_cast<double>(k) + 0.5) * config.delta};
                if (config.jitter > 0.0) {
                    for (int d = 0; d < 3; ++d)
                        p[d] += config.jitter * config.delta * rng.uniform(-1.0, 1.0);
                }
                centers.push_back(p);
            }
        }
    }
    return centers;
}

double evaluate_zeta(const ParticleSystem& system, double u_bar, const Vec3& point) {
    const double dA = system.scale.deltaAlpha();
    double sum = 0.0;
    for (std::size_t j = 0; j < system.radii.size(); ++j) {
        if (!system.active[j]) continue;
        const double d = distance(point, system.centers[j]);
        if (d < dA * system.radii[j] * (1.0 - 1e-12))
            throw std::domain_error("evaluate_zeta: point lies inside a particle ball");
        sum += monopoleCoefficient(system.radii[j], u_bar, dA) / d;
    }
    return u_bar + sum;
}

double boundary_defect(const ParticleSystem& system, double u_bar, std::size_t particle,
                       std::size_t direction_count) {
    if (particle >= system.radii.size() || !system.active[particle])
        throw std::invalid_argument("boundary_defect: inactive particle index");
    if (direction_count == 0)
        throw std::invalid_argument("boundary_defect: need at least one direction");

    std::vector<Vec3> dirs;
    dirs.reserve(direction_count);
    if (direction_count <= 26) {
        // axis/diagonal unit vectors from {-1,0,1}^3 \ {0}
        for (int a = -1; a <= 1 && dirs.size() < direction_count; ++a)
            for (int b = -1; b <= 1 && dirs.size() < direction_count; ++b)
                for (int c = -1; c <= 1 && dirs.size() < direction_count; ++c) {
                    if (a == 0 && b == 0 && c == 0) continue;
                    const double norm = std::sqrt(double(a * a + b * b + c * c));
                    dirs.push_back({a / norm, b / norm, c / norm});
                }
    } else {
        // Fibonacci sphere for larger direction counts
        const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
        for (std::size_t k = 0; k < direction_count; ++k) {
            const double z = 1.0 - 2.0 * (k + 0.5) / direction_count;
            const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double phi = 2.0 * M_PI * static_cast<double>(k) / golden;
            dirs.push_back({rho * std::cos(phi), rho * std::sin(phi), z});
        }
    }

    const double dA = system.scale.deltaAlpha();
    const double ball_radius = dA * system.radii[particle];
    const Vec3& xi = system.centers[particle];
    double worst = 0.0;
    for (const Vec3& d : dirs) {
        const Vec3 x = {xi[0] + ball_radius * d[0], xi[1] + ball_radius * d[1],
                        xi[2] + ball_radius * d[2]};
        double sum = 0.0;
        for (std::size_t j = 0; j < system.radii.size(); ++j) {
            if (!system.active[j] || j == particle) continue;
            sum += monopoleCoefficient(system.radii[j], u_bar, dA) /
                   distance(x, system.centers[j]);
        }
        worst = std::max(worst, std::abs(sum));
    }
    return worst;
}

DeviationSurvey deviation_survey(const ParticleSystem& system, double u_bar,
                                 std::size_t sample_count, std::uint64_t seed) {
    if (sample_count == 0)
        throw std::invalid_argument("deviation_survey: sample_count must be >= 1");
    if (system.activeCount() == 0) throw ExtinctSystemError{};

    const double dA = system.scale.deltaAlpha();
    DeviationSurvey survey;
    const double sup_r = system.maxActiveRadius();
    survey.envelope = system.scale.deltaGamma() * (1.0 + 2.0 * sup_r) * (1.0 + u_bar * sup_r);

    std::uint64_t index = 1 + (seed % 8191) * 64;
    const std::uint64_t max_tries = 100 * static_cast<std::uint64_t>(sample_count);
    std::uint64_t tries = 0;
    double total = 0.0;
    std::size_t accepted = 0;
    while (accepted < sample_count) {
        if (++tries > max_tries)
            throw std::runtime_error(
                "deviation_survey: rejection sampling failed to find exterior points "
                "(particle volume fraction too high)");
        const Vec3 p = {halton(index, 2), halton(index, 3), halton(index, 5)};
        ++index;
        bool exterior = true;
        for (std::size_t j = 0; j < system.radii.size() && exterior; ++j)
            if (system.active[j] && distance(p, system.centers[j]) <= dA * system.radii[j])
                exterior = false;
        if (!exterior) continue;
        const double dev = std::abs(evaluate_zeta(system, u_bar, p) - u_bar);
        survey.max_deviation = std::max(survey.max_deviation, dev);
        total += dev;
        ++accepted;
    }
    survey.sample_count = accepted;
    survey.mean_deviation = total / static_cast<double>(accepted);
    return survey;
}

}  // namespace ripening
