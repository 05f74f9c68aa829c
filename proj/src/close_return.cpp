#include "birkhoff/recurrence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace birkhoff {

namespace {

struct Sample {
    double t;
    double d;
};

// Gauss-Newton on F(z, t) = Phi_t(z) - z with a min-norm step; z stays
// within max_shift of x0 and t above t_min.
std::optional<CloseReturn> gauss_newton(const Scenario& s, const Vec& x0, double t0, double t_min, double max_shift,
                                        int iterations, const IntegratorConfig& cfg) {
    const int n = s.dimension();
    Vec z = x0;
    double t = t0;
    FlowResult img = flow_map(s, z, t, cfg);
    if (!img.ok()) return std::nullopt;
    Vec F = img.state - z;
    CloseReturn best{z, t, F.norm()};
    for (int it = 0; it < iterations && best.error > 1e-13; ++it) {
        Mat J(n, n + 1);
        for (int i = 0; i < n; ++i) {
            const double h = 1e-7 * std::max(1.0, std::abs(z[i]));
            Vec zp = z;
            zp[i] += h;
            const FlowResult fp = flow_map(s, zp, t, cfg);
            if (!fp.ok()) return best;
            J.col(i) = (fp.state - img.state) / h;
            J(i, i) -= 1.0;
        }
        J.col(n) = s.field(img.state);
        const Vec step = J.completeOrthogonalDecomposition().solve(-F);
        if (!step.allFinite()) break;
        double lambda = 1.0;
        bool improved = false;
        for (int h = 0; h < 20; ++h, lambda *= 0.5) {
            const Vec zn = z + lambda * step.head(n);
            const double tn = t + lambda * step[n];
            if (tn < t_min || (zn - x0).norm() > max_shift) continue;
            const FlowResult fn = flow_map(s, zn, tn, cfg);
            if (!fn.ok()) continue;
            const Vec Fn = fn.state - zn;
            if (Fn.norm() < F.norm()) {
                z = zn;
                t = tn;
                img = fn;
                F = Fn;
                improved = true;
                break;
            }
        }
        if (!improved) break;
        if (F.norm() < best.error) best = {z, t, F.norm()};
    }
    return best;
}

}  // namespace

std::optional<CloseReturn> refine_close_return(const Scenario& s, const Vec& x0, double t_lo, double t_hi,
                                               double theta, const IntegratorConfig& cfg,
                                               const CloseReturnOptions& opts) {
    if (!(theta > 0.0)) throw std::invalid_argument("refine_close_return: theta must be positive");
    const double t_start = std::max(t_lo, opts.t_min);
    if (!(t_hi > t_start)) throw std::invalid_argument("refine_close_return: empty time window");
    const double shift = opts.max_shift < 0.0 ? theta : opts.max_shift;

    std::vector<Sample> scan;
    const FlowResult end = integrate_visit(s, x0, t_hi, opts.dt, cfg, [&](double t, const Vec& state) {
        if (t >= t_start) scan.push_back({t, (state - x0).norm()});
        return true;
    });
    if (!end.ok() || scan.empty()) return std::nullopt;

    std::vector<std::size_t> minima;
    for (std::size_t k = 0; k < scan.size(); ++k) {
        const bool left = k == 0 || scan[k].d <= scan[k - 1].d;
        const bool right = k + 1 == scan.size() || scan[k].d <= scan[k + 1].d;
        if (left && right) minima.push_back(k);
    }
    std::stable_sort(minima.begin(), minima.end(), [&](std::size_t a, std::size_t b) { return scan[a].d < scan[b].d; });
    if (minima.size() > static_cast<std::size_t>(std::max(1, opts.candidates))) minima.resize(std::max(1, opts.candidates));

    std::optional<CloseReturn> best;
    for (std::size_t k : minima) {
        CloseReturn cand{x0, scan[k].t, scan[k].d};
        if (cand.error > 1e-13 && opts.refine_iterations > 0) {
            if (auto refined = gauss_newton(s, x0, scan[k].t, opts.t_min, shift, opts.refine_iterations, cfg)) {
                if (refined->error < cand.error) cand = *refined;
            }
        }
        if (!best || cand.error < best->error) best = cand;
        if (best->error <= 1e-13) break;
    }
    if (!best || !(best->error < theta)) return std::nullopt;
    return best;
}

bool RecurrentTimeSet::contains(double t) const {
    for (const auto& [lo, hi] : intervals) {
        if (lo < t && (t < hi || (t == hi && hi == horizon))) return true;
    }
    return false;
}

RecurrentTimeSet recurrent_times(const Scenario& s, const Vec& z, double theta, double horizon, double dt,
                                 const IntegratorConfig& cfg) {
    if (!(theta > 0.0) || !(horizon > 0.0) || !(dt > 0.0)) {
        throw std::invalid_argument("recurrent_times: theta, horizon and dt must be positive");
    }
    RecurrentTimeSet rts;
    rts.z = z;
    rts.theta = theta;
    rts.horizon = horizon;

    bool inside = true;
    double open_start = 0.0;
    double prev_t = 0.0;
    Vec prev_state = z;
    double last_t = 0.0;

    auto crossing = [&](double t) {
        double lo = 0.0, hi = t - prev_t;
        while (hi - lo > dt / 100.0) {
            const double mid = 0.5 * (lo + hi);
            const FlowResult f = flow_map(s, prev_state, mid, cfg);
            const bool in = f.ok() && (f.state - z).norm() < theta;
            if (in == inside) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return prev_t + 0.5 * (lo + hi);
    };

    const FlowResult end = integrate_visit(s, z, horizon, dt, cfg, [&](double t, const Vec& state) {
        if (t == 0.0) return true;
        const bool now = (state - z).norm() < theta;
        if (now != inside) {
            const double c = crossing(t);
            if (inside) {
                rts.intervals.emplace_back(open_start, c);
            } else {
                open_start = c;
            }
            inside = now;
        }
        prev_t = t;
        prev_state = state;
        last_t = t;
        return true;
    });
    if (!end.ok()) {
        rts.truncated = true;
        rts.horizon = last_t;
    }
    if (inside && last_t > open_start) rts.intervals.emplace_back(open_start, last_t);
    return rts;
}

void write_intervals_csv(std::ostream& os, const RecurrentTimeSet& rts) {
    os << "t_lo,t_hi\n";
    os.precision(17);
    for (const auto& [lo, hi] : rts.intervals) os << lo << ',' << hi << '\n';
}

A1Witness verify_A1(const Scenario& s, const RecurrentTimeSet& rts, double tau, double eps,
                    const IntegratorConfig& cfg) {
    if (!(tau > 0.0) || !(eps > 0.0) || !(eps < tau / 2.0)) {
        throw std::invalid_argument("verify_A1: need tau > 0 and 0 < eps < tau/2");
    }
    const auto& iv = rts.intervals;
    for (long n = 1; static_cast<double>(n) * tau <= rts.horizon; ++n) {
        const double center = static_cast<double>(n) * tau;
        const double a = center - eps, b = center + eps;
        auto it = std::lower_bound(iv.begin(), iv.end(), a,
                                   [](const std::pair<double, double>& p, double v) { return p.second <= v; });
        for (; it != iv.end() && it->first < b; ++it) {
            const double lo = std::max(a, it->first), hi = std::min(b, it->second);
            if (!(hi > lo)) continue;
            std::vector<double> picks;
            if (center > lo && center < hi) picks.push_back(center);
            picks.push_back(0.5 * (lo + hi));
            for (double sval : picks) {
                if (!(sval > a && sval < b) || sval <= 0.0) continue;
                const FlowResult f = flow_map(s, rts.z, sval, cfg);
                if (!f.ok()) continue;
                const double err = (f.state - rts.z).norm();
                if (err < rts.theta) return {true, n, sval - center, sval, err};
            }
        }
    }
    return {};
}

}  // namespace birkhoff
