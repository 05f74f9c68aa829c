#pragma once

#include "birkhoff/scenario.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace birkhoff {

struct IntegratorConfig {
    double rel_tol = 1e-9;
    double abs_tol = 1e-11;
    double max_step = 0.5;
    double min_step = 1e-12;
    double escape_radius = 0.0;  // 0 means the scenario default
    double max_time = 1e5;

    void validate() const;
    double escape_for(const Scenario& s) const { return escape_radius > 0.0 ? escape_radius : s.escape_radius(); }
};

enum class TerminalStatus { Completed, Escaped, BlowupSuspected };

std::string to_string(TerminalStatus status);

struct FlowResult {
    Vec state;            // last finite state reached
    double time = 0.0;    // signed time actually reached
    TerminalStatus status = TerminalStatus::Completed;

    bool ok() const { return status == TerminalStatus::Completed; }
};

/// Phi_t(x). Negative t integrates the reversed field.
FlowResult flow_map(const Scenario& s, const Vec& x, double t, const IntegratorConfig& cfg = {});

struct Trajectory {
    std::vector<double> times;  // signed, strictly monotone in |t|
    PointSet states;
    TerminalStatus status = TerminalStatus::Completed;
    double terminal_time = 0.0;
};

/// Samples Phi_t(x) at t = k*dt for k = 0..floor(|t_end|/dt) (sign of t_end),
/// using dense output of a single integration.
Trajectory sample_trajectory(const Scenario& s, const Vec& x, double t_end, double dt,
                             const IntegratorConfig& cfg = {});

/// Calls `visit(t, state)` at t = 0 and each sample time k*dt (signed);
/// returning false stops early. The result holds the last visited state, or
/// the state at which the integration terminated.
template <typename Visit>
FlowResult integrate_visit(const Scenario& s, const Vec& x, double t_end, double dt, const IntegratorConfig& cfg,
                           Visit&& visit);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// |Phi_t(Phi_s(x)) - Phi_{s+t}(x)|. Throws std::runtime_error on escape.
double semigroup_residual(const Scenario& s, const Vec& x, double s_time, double t_time,
                          const IntegratorConfig& cfg = {});

struct CompetitivenessReport {
    double max_offdiagonal = 0.0;   // over all samples, in cone coordinates
    bool nonpositive = false;       // every sampled off-diagonal <= 0
    bool irreducible = false;       // strict-negativity graph strongly connected
    std::size_t samples = 0;
};

/// Samples the Jacobian over the valid domain. In cone coordinates the
/// competitive condition reads: off-diagonals of G^-1 J G are <= 0.
CompetitivenessReport check_strong_competitiveness(const Scenario& s, const ConeSpec& cone,
                                                   std::size_t sample_count, std::uint64_t seed);

}  // namespace birkhoff

#include "birkhoff/detail/flow_impl.hpp"
