#pragma once

#include "birkhoff/flow.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace birkhoff {

enum class Stability { Attracting, Repelling, Saddle, Marginal };

std::string to_string(Stability s);

struct EquilibriumRecord {
    Vec point;
    double residual = 0.0;
    std::vector<double> eigen_real;  // sorted ascending
    Stability stability = Stability::Marginal;
    bool singular = false;
};

struct NewtonOptions {
    double tol = 1e-10;             // accept when |f(p)| < tol
    int max_iter = 100;
    double dedup_radius = 1e-6;
    double stability_margin = 1e-7;
    double domain_slack = 0.5;      // keep roots inside valid_domain inflated by this fraction
};

/// per_axis points per coordinate spanning `box` (corners included).
PointSet seed_grid(const Box& box, int per_axis);

/// Default seeds for a scenario: the valid domain, extended down to the
/// coordinate faces for Kolmogorov fields so boundary equilibria are found.
PointSet default_equilibrium_seeds(const Scenario& s, int per_axis = 7);

std::vector<EquilibriumRecord> find_equilibria(const Scenario& s, const PointSet& seeds,
                                               const NewtonOptions& opts = {});

/// Index of the equilibrium nearest to x within `radius`, if any.
std::optional<std::size_t> nearest_equilibrium(const std::vector<EquilibriumRecord>& eq, const Vec& x,
                                               double radius);

struct AttractorBounds {
    Box box;
    Vec x_star;   // inf of the box in the cone order
    Vec x_sup;    // sup of the box in the cone order
    bool dissipative = true;
    PointSet escaped_samples;
};

/// Bounding box of forward tails over [0.8, 1] * t_settle from uniform
/// samples of the valid domain, inflated by 5% per axis.
AttractorBounds attractor_bounds(const Scenario& s, const ConeSpec& cone, std::size_t sample_count,
                                 double t_settle, std::uint64_t seed, const IntegratorConfig& cfg = {});

enum class AlphaKind { ConvergesTo, EscapesAboveXStar, EscapesBelowXSup, EscapesMixed, BoundedNonconvergent, Unknown };

std::string to_string(AlphaKind k);

struct AlphaOptions {
    double capture_radius = 1e-6;
    double side_radius = 1e-2;   // order side judged on the approach inside this ball
    double dwell = 2.0;          // time the backward orbit must stay captured
    double sample_dt = 0.05;
    double escape_margin = 0.0;  // extra margin for the x_star / x_sup comparisons
};

/// Backward-orbit evidence. For ConvergesTo, `above` records that inside
/// side_radius of p the direction (state - p)/|state - p| was once in Int C+
/// and never in Int C- or Int K (`below` symmetrically). Directions are
/// normalized because approaches along a slow axis leave the other
/// coordinates far below eta long before capture.
struct AlphaResult {
    AlphaKind kind = AlphaKind::Unknown;
    std::optional<std::size_t> equilibrium;
    Vec last_state;
    double time = 0.0;
    bool above = false;
    bool below = false;
};

AlphaResult alpha_limit_classify(const Scenario& s, const ConeSpec& cone, const Vec& x, double t_max,
                                 const std::vector<EquilibriumRecord>& equilibria, const AttractorBounds& bounds,
                                 const IntegratorConfig& cfg = {}, const AlphaOptions& opts = {});

}  // namespace birkhoff
