#pragma once

#include "birkhoff/config.hpp"
#include "birkhoff/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <iosfwd>
#include <string>
#include <vector>

namespace birkhoff::run_support {

IntegratorConfig integrator_of(const RunConfig& cfg);
RecurrenceOptions recurrence_options(const RunConfig& cfg);
Setup setup_of(const RunConfig& cfg);

/// Opens `dir/name` for writing with full double precision; throws on failure.
std::ofstream artifact(const std::filesystem::path& dir, const std::string& name);

/// Hyperplane orthogonal to the cone direction through the domain center.
Hyperplane cell_plane(const Setup& setup);

/// Grid over the bounding box of the points' hyperplane coordinates, each
/// half width scaled by `inflate`.
GridSpec grid_around(const Hyperplane& plane, const PointSet& points, double inflate, int nodes);

/// Census equilibrium strictly inside the valid domain, if exactly one.
std::optional<std::size_t> interior_equilibrium(const Setup& setup);

/// Equilibrium the orbit of the domain center settles on, or a certified
/// periodic point (close return with error below 1e-6) near its tail.
struct AttractorWitness {
    Vec z;
    double period = 0.0;                 // 0 for an equilibrium
    std::optional<std::size_t> equilibrium;
};
std::optional<AttractorWitness> attractor_witness(const Setup& setup, double window, double theta);

/// `count` states spaced evenly over one period starting at z.
PointSet orbit_samples(const Setup& setup, const Vec& z, double period, int count);

/// Periodic point of the component with the most certified samples.
std::optional<CloseReturn> periodic_point(const RecurrenceAnalysis& analysis, std::size_t* component = nullptr);

struct A1Trial {
    double tau = 0.0;
    double eps = 0.0;
    A1Witness witness;
};

/// `count` seeded trials with tau in [0.5, 50] and eps = tau * U[0.01, 0.1].
std::vector<A1Trial> a1_trials(const Setup& setup, const RecurrentTimeSet& rts, std::uint64_t seed, int count);
void write_a1_csv(std::ostream& os, const std::vector<A1Trial>& trials);

double ip_theta(const RunConfig& cfg, const Setup& setup);

/// The full acceptance pipeline behind the `verify` subcommand.
int run_verify(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);

}  // namespace birkhoff::run_support
