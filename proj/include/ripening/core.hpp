#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace ripening {

using Vec3 = std::array<double, 3>;

/// Thrown when an operation is requested on a system with no active particles.
struct ExtinctSystemError : std::runtime_error {
    ExtinctSystemError() : std::runtime_error("system extinct: no active particles") {}
};

/* ----------------- scaling bookkeeping ----------------- */

// Small-parameter bookkeeping: delta is the typical particle distance,
// alpha the size exponent (particle size delta^alpha), and gamma the
// derived rate exponent min(alpha, 2*alpha - 3 - epsilon) for delta < 1.
struct ScaleParameters {
    double delta = 0.1;
    double alpha = 2.0;
    double epsilon = 0.01;
    double gamma = 0.0;

    // Validated constructor for the admissible regime alpha > 3/2 + epsilon.
    static ScaleParameters make(double delta, double alpha, double epsilon = 0.01);

    // Skips the alpha > 3/2 + epsilon gate; gamma is still computed formally
    // (and may be negative). Used for regime-boundary experiments only.
    static ScaleParameters makeDiagnosticsOnly(double delta, double alpha, double epsilon = 0.01);

    double deltaAlpha() const;  // delta^alpha, the unscaled particle-size factor
    double deltaGamma() const;
};

// gamma with delta^gamma = max(delta^alpha, delta^{2a-3}, delta^{2a-3-eps}).
double derive_gamma(double delta, double alpha, double epsilon);

/* ----------------- particle state ----------------- */

struct ParticleSystem {
    ScaleParameters scale;
    std::vector<double> radii;    // rescaled radii, zero once extinct
    std::vector<Vec3> centers;    // lattice points in [0,1]^3
    std::vector<char> active;
    std::vector<std::optional<double>> extinction_times;
    std::size_t initial_count = 0;

    std::size_t activeCount() const;
    double activeFraction() const;
    double maxActiveRadius() const;
    double minActiveRadius() const;
    double totalVolume() const;   // sum R^3 (constant 4pi/3 omitted)
    double totalSurface() const;  // sum R^2 (constant 4pi omitted)

    void checkConsistent() const;  // radii[i] > 0 iff active[i], sizes match
};

// Builds a system from radii and centers (all particles active).
ParticleSystem makeSystem(ScaleParameters scale, std::vector<double> radii,
                          std::vector<Vec3> centers);

// Convenience for tests: centers on a fallback line, positions unused.
ParticleSystem makeSystemRadiiOnly(ScaleParameters scale, std::vector<double> radii);

/* ----------------- mean field and growth law ----------------- */

struct MeanFieldState {
    double u_bar = 0.0;
    double weighted_first_moment = 0.0;   // sum R/(1 + delta^alpha R)
    double weighted_second_moment = 0.0;  // sum R^2/(1 + delta^alpha R)
};

// u_bar = sum R/(1+dA*R) / sum R^2/(1+dA*R) over positive radii.
// Zero radii contribute nothing. Throws ExtinctSystemError if all are zero.
MeanFieldState mean_field(const std::vector<double>& radii, double delta_alpha);

inline MeanFieldState mean_field(const ParticleSystem& s) {
    return mean_field(s.radii, s.scale.deltaAlpha());
}

// dR/dt = (u_bar - 1/R) / (1 + delta_alpha * R).  Requires R > 0.
double growth_rate(double radius, double u_bar, double delta_alpha);

/* ----------------- diagnostics ----------------- */

struct Diagnostics {
    double total_volume = 0.0;
    double total_surface = 0.0;
    double dissipation = 0.0;  // sum (R*Rdot + R^2*Rdot^2), <= 0
    double u_bar = 0.0;
    double active_fraction = 0.0;
    double min_radius = 0.0;
    double max_radius = 0.0;
};

Diagnostics diagnostics(const ParticleSystem& system);

}  // namespace ripening
