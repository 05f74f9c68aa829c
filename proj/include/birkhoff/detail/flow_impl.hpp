#pragma once

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace birkhoff {

namespace detail {

using OdeState = std::vector<double>;

struct SignedField {
    const Scenario* scenario;
    double sign;

    void operator()(const OdeState& x, OdeState& dx, double /*t*/) const {
        scenario->field(x.data(), dx.data());
        if (sign < 0.0) {
            for (double& v : dx) v = -v;
        }
    }
};

inline bool outside_radius(const OdeState& x, double radius) {
    double sq = 0.0;
    for (double v : x) {
        if (!std::isfinite(v)) return true;
        sq += v * v;
    }
    return sq > radius * radius;
}

inline Vec to_vec(const OdeState& x) { return Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(x.size())); }

}  // namespace detail

template <typename Target, typename Visit>
FlowResult integrate_targets(const Scenario& s, const Vec& x, double sign, std::size_t count, Target&& target,
                             const IntegratorConfig& cfg, Visit&& visit) {
    namespace odeint = boost::numeric::odeint;
    cfg.validate();
    const int n = s.dimension();
    if (x.size() != n) throw std::invalid_argument("flow: state has wrong dimension");
    if (!x.allFinite()) throw std::invalid_argument("flow: initial state is not finite");
    const double radius = cfg.escape_for(s);

    FlowResult out;
    out.state = x;
    if (count == 0) return out;

    detail::SignedField rhs{&s, sign};
    detail::OdeState state(x.data(), x.data() + n);
    detail::OdeState at(n);

    using Dopri = odeint::runge_kutta_dopri5<detail::OdeState>;
    auto stepper = odeint::make_dense_output(cfg.abs_tol, cfg.rel_tol, cfg.max_step, Dopri());
    stepper.initialize(state, 0.0, std::min(cfg.max_step, 1e-2));

    for (std::size_t k = 0; k < count; ++k) {
        const double goal = target(k);
        if (goal > cfg.max_time) throw std::invalid_argument("flow: requested time exceeds max_time");
        while (stepper.current_time() < goal) {
            try {
                stepper.do_step(rhs);
            } catch (const std::exception&) {
                out.state = detail::to_vec(stepper.current_state());
                out.time = sign * stepper.current_time();
                out.status = TerminalStatus::BlowupSuspected;
                return out;
            }
            const auto& cur = stepper.current_state();
            if (detail::outside_radius(cur, radius)) {
                out.time = sign * stepper.current_time();
                if (std::all_of(cur.begin(), cur.end(), [](double v) { return std::isfinite(v); })) {
                    out.state = detail::to_vec(cur);
                    out.status = TerminalStatus::Escaped;
                } else {
                    out.status = TerminalStatus::BlowupSuspected;
                }
                return out;
            }
            if (stepper.current_time() < goal && stepper.current_time_step() < cfg.min_step) {
                out.state = detail::to_vec(cur);
                out.time = sign * stepper.current_time();
                out.status = TerminalStatus::BlowupSuspected;
                return out;
            }
        }
        if (goal == 0.0) {
            out.state = x;
        } else {
            stepper.calc_state(goal, at);
            out.state = detail::to_vec(at);
        }
        out.time = sign * goal;
        if (!visit(k, sign * goal, static_cast<const Vec&>(out.state))) return out;
    }
    return out;
}

template <typename Visit>
FlowResult integrate_visit(const Scenario& s, const Vec& x, double t_end, double dt, const IntegratorConfig& cfg,
                           Visit&& visit) {
    if (!(dt > 0.0)) throw std::invalid_argument("flow: sample spacing must be positive");
    const double sign = t_end < 0.0 ? -1.0 : 1.0;
    const double horizon = std::abs(t_end);
    const auto steps = static_cast<std::size_t>(std::floor(horizon / dt * (1.0 + 1e-12)));
    return integrate_targets(
        s, x, sign, steps + 1,
        [&](std::size_t k) { return std::min(horizon, static_cast<double>(k) * dt); }, cfg,
        [&](std::size_t, double t, const Vec& state) { return visit(t, state); });
}

}  // namespace birkhoff
