#include "birkhoff/flow.hpp"
#include "birkhoff/parallel.hpp"

#include <ostream>
#include <random>
#include <stdexcept>

namespace birkhoff {

void IntegratorConfig::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw std::invalid_argument("integrator tolerances must be positive");
    if (!(max_step > 0.0) || !(min_step > 0.0)) throw std::invalid_argument("integrator step bounds must be positive");
    if (escape_radius < 0.0) throw std::invalid_argument("escape radius override must be nonnegative");
    if (!(max_time > 0.0)) throw std::invalid_argument("integrator max_time must be positive");
}

std::string to_string(TerminalStatus status) {
    switch (status) {
        case TerminalStatus::Completed: return "Completed";
        case TerminalStatus::Escaped: return "Escaped";
        case TerminalStatus::BlowupSuspected: return "BlowupSuspected";
    }
    return "?";
}

FlowResult flow_map(const Scenario& s, const Vec& x, double t, const IntegratorConfig& cfg) {
    const double span = std::abs(t);
    return integrate_visit(s, x, t, span > 0.0 ? span : 1.0, cfg, [](double, const Vec&) { return true; });
}

Trajectory sample_trajectory(const Scenario& s, const Vec& x, double t_end, double dt, const IntegratorConfig& cfg) {
    Trajectory traj;
    const FlowResult end = integrate_visit(s, x, t_end, dt, cfg, [&](double t, const Vec& state) {
        traj.times.push_back(t);
        traj.states.push_back(state);
        return true;
    });
    traj.status = end.status;
    traj.terminal_time = end.time;
    return traj;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states.front().size());
    os << "t";
    for (int i = 1; i <= n; ++i) os << ",x" << i;
    os << '\n';
    os.precision(17);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        os << traj.times[k];
        for (int i = 0; i < n; ++i) os << ',' << traj.states[k][i];
        os << '\n';
    }
}

double semigroup_residual(const Scenario& s, const Vec& x, double s_time, double t_time, const IntegratorConfig& cfg) {
    if (s_time < 0.0 || t_time < 0.0) throw std::invalid_argument("semigroup_residual: times must be nonnegative");
    const FlowResult first = flow_map(s, x, s_time, cfg);
    if (!first.ok()) throw std::runtime_error("semigroup_residual: escape during Phi_s");
    const FlowResult composed = flow_map(s, first.state, t_time, cfg);
    const FlowResult direct = flow_map(s, x, s_time + t_time, cfg);
    if (!composed.ok() || !direct.ok()) throw std::runtime_error("semigroup_residual: escape during Phi_t");
    return (composed.state - direct.state).norm();
}

namespace {

bool strongly_connected(const std::vector<std::vector<bool>>& adj) {
    const std::size_t n = adj.size();
    auto reach_all = [&](bool transpose) {
        std::vector<bool> seen(n, false);
        std::vector<std::size_t> stack{0};
        seen[0] = true;
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            for (std::size_t v = 0; v < n; ++v) {
                const bool edge = transpose ? adj[v][u] : adj[u][v];
                if (edge && !seen[v]) {
                    seen[v] = true;
                    stack.push_back(v);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
    };
    return n <= 1 || (reach_all(false) && reach_all(true));
}

}  // namespace

CompetitivenessReport check_strong_competitiveness(const Scenario& s, const ConeSpec& cone, std::size_t sample_count,
                                                   std::uint64_t seed) {
    const int n = s.dimension();
    if (cone.dimension() != n) throw std::invalid_argument("cone and scenario dimensions differ");
    const Box& box = s.valid_domain();
    if ((s.kind() == FieldKind::LotkaVolterra || s.kind() == FieldKind::MayLeonard) && box.lo.minCoeff() <= 0.0) {
        throw std::invalid_argument("sample outside the open positive orthant");
    }
    std::mt19937_64 rng(item_seed(seed, 0));
    CompetitivenessReport report;
    report.max_offdiagonal = -std::numeric_limits<double>::infinity();
    // strict[i][j]: J_ij < 0 at every sample; aggregated over the domain.
    std::vector<std::vector<bool>> strict(n, std::vector<bool>(n, true));
    bool nonpositive = true;
    for (std::size_t k = 0; k < sample_count; ++k) {
        Vec x(n);
        for (int i = 0; i < n; ++i) x[i] = box.lo[i] + unit_uniform(rng) * (box.hi[i] - box.lo[i]);
        const Mat j = cone.inverse() * s.jacobian(x) * cone.generators();
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                if (a == b) continue;
                report.max_offdiagonal = std::max(report.max_offdiagonal, j(a, b));
                if (j(a, b) > 0.0) nonpositive = false;
                if (!(j(a, b) < 0.0)) strict[a][b] = false;
            }
        }
    }
    report.samples = sample_count;
    report.nonpositive = nonpositive;
    report.irreducible = sample_count > 0 && strongly_connected(strict);
    if (n == 1) report.max_offdiagonal = 0.0;
    return report;
}

}  // namespace birkhoff
