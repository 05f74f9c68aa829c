#include "birkhoff/parallel.hpp"
#include "birkhoff/recurrence.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace birkhoff {

std::vector<std::pair<double, std::uint32_t>> subset_sums(const std::vector<double>& generators) {
    if (generators.size() > 20) throw std::invalid_argument("subset_sums: at most 20 generators");
    const std::uint32_t count = (std::uint32_t{1} << generators.size()) - 1;
    std::vector<std::pair<double, std::uint32_t>> out;
    out.reserve(count);
    for (std::uint32_t mask = 1; mask <= count; ++mask) {
        double sum = 0.0;
        for (std::size_t i = 0; i < generators.size(); ++i) {
            if (mask & (std::uint32_t{1} << i)) sum += generators[i];
        }
        out.emplace_back(sum, mask);
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

namespace {

struct SumCheck {
    double worst = 0.0;
    double worst_sum = 0.0;
    bool escaped = false;
};

// max over the sorted times of |Phi_t(y) - z| in a single integration.
SumCheck check_sums(const Scenario& s, const Vec& y, const Vec& z, const std::vector<double>& times,
                    const IntegratorConfig& cfg) {
    SumCheck out;
    const FlowResult end = integrate_targets(
        s, y, 1.0, times.size(), [&](std::size_t k) { return times[k]; }, cfg,
        [&](std::size_t k, double, const Vec& state) {
            const double e = (state - z).norm();
            if (e > out.worst) {
                out.worst = e;
                out.worst_sum = times[k];
            }
            return true;
        });
    if (!end.ok()) {
        out.escaped = true;
        out.worst = std::numeric_limits<double>::infinity();
        out.worst_sum = std::abs(end.time);
    }
    return out;
}

// First local minimum of |Phi_t(z) - z| below `bound` on [t_min, horizon],
// sharpened by golden-section search.
std::optional<double> next_return(const Scenario& s, const Vec& z, double bound, double t_min, double horizon,
                                  double dt, const IntegratorConfig& cfg) {
    std::vector<std::pair<double, double>> scan;
    std::optional<double> hit;
    integrate_visit(s, z, horizon, dt, cfg, [&](double t, const Vec& state) {
        if (t + 1e-12 < t_min) return true;
        scan.emplace_back(t, (state - z).norm());
        const std::size_t k = scan.size();
        if (k >= 2) {
            const auto& mid = scan[k - 2];
            const bool left = k == 2 || mid.second <= scan[k - 3].second;
            if (left && mid.second <= scan[k - 1].second && mid.second < bound) {
                hit = mid.first;
                return false;
            }
        }
        return true;
    });
    if (!hit) return std::nullopt;
    const auto dist = [&](double t) {
        const FlowResult f = flow_map(s, z, t, cfg);
        return f.ok() ? (f.state - z).norm() : std::numeric_limits<double>::infinity();
    };
    const double base = dist(*hit);
    if (base == 0.0) return hit;
    double a = std::max(t_min, *hit - dt), b = *hit + dt;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = dist(c), fd = dist(d);
    for (int it = 0; it < 40 && b - a > 1e-10; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = dist(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = dist(d);
        }
    }
    const double t = 0.5 * (a + b);
    return dist(t) < base ? t : *hit;
}

}  // namespace

IPSet ip_generate(const Scenario& s, const Vec& z, double theta, int k, double horizon, const IntegratorConfig& cfg,
                  const IPOptions& opts) {
    if (!(theta > 0.0) || k < 1 || k > 12) throw std::invalid_argument("ip_generate: need theta > 0 and 1 <= k <= 12");
    const int n = s.dimension();
    IPSet ip;
    ip.z = z;
    ip.theta = theta;
    double modulus = theta;
    std::vector<double> sums;

    // Perturbation directions: coordinate axes first, then seeded random units.
    PointSet directions;
    for (int i = 0; i < n && static_cast<int>(directions.size()) < opts.perturbations; ++i) {
        for (double sgn : {1.0, -1.0}) {
            if (static_cast<int>(directions.size()) >= opts.perturbations) break;
            Vec u = Vec::Zero(n);
            u[i] = sgn;
            directions.push_back(u);
        }
    }
    std::mt19937_64 rng(item_seed(opts.seed, 0));
    while (static_cast<int>(directions.size()) < opts.perturbations) {
        Vec u(n);
        for (int i = 0; i < n; ++i) {
            // Box-Muller
            const double u1 = std::max(unit_uniform(rng), 1e-300), u2 = unit_uniform(rng);
            u[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        }
        if (u.norm() > 0.0) directions.push_back(u.normalized());
    }

    for (int m = 0; m < k; ++m) {
        const auto p = next_return(s, z, modulus, opts.min_generator_time, horizon, opts.scan_dt, cfg);
        if (!p) {
            ip.truncated = true;
            ip.note = "no return below modulus " + std::to_string(modulus) + " within horizon";
            break;
        }
        ip.generators.push_back(*p);
        ip.moduli.push_back(modulus);
        const std::size_t old = sums.size();
        sums.push_back(*p);
        for (std::size_t i = 0; i < old; ++i) sums.push_back(sums[i] + *p);
        std::sort(sums.begin(), sums.end());
        if (m + 1 == k) break;

        double c = modulus;
        while (true) {
            const auto checks = parallel_map<SumCheck>(directions.size(), [&](std::size_t j) {
                return check_sums(s, z + c * directions[j], z, sums, cfg);
            });
            const bool ok = std::all_of(checks.begin(), checks.end(), [&](const SumCheck& r) {
                return !r.escaped && r.worst < opts.safety * theta;
            });
            if (ok) break;
            c *= 0.5;
            if (c < 1e-12) break;
        }
        if (c < 1e-12) {
            ip.truncated = true;
            ip.note = "modulus underflow after " + std::to_string(ip.generators.size()) + " generators";
            break;
        }
        modulus = c;
    }
    ip.worst_error = ip_verify(s, z, theta, ip.generators, cfg).worst_error;
    return ip;
}

IPVerdict ip_verify(const Scenario& s, const Vec& z, double theta, const std::vector<double>& generators,
                    const IntegratorConfig& cfg) {
    IPVerdict v;
    if (generators.empty()) {
        v.passed = true;
        return v;
    }
    std::vector<double> times;
    for (const auto& [sum, mask] : subset_sums(generators)) times.push_back(sum);
    const SumCheck c = check_sums(s, z, z, times, cfg);
    v.worst_error = c.worst;
    v.worst_sum = c.worst_sum;
    v.escaped = c.escaped;
    v.passed = !c.escaped && c.worst < theta;
    return v;
}

void write_ip_report(std::ostream& os, const IPSet& ip, const IPVerdict& verdict) {
    os.precision(17);
    os << "theta " << ip.theta << '\n';
    os << "z";
    for (int i = 0; i < ip.z.size(); ++i) os << ' ' << ip.z[i];
    os << '\n';
    for (std::size_t i = 0; i < ip.generators.size(); ++i) {
        os << "generator " << i + 1 << ' ' << ip.generators[i] << " modulus " << ip.moduli[i] << '\n';
    }
    os << "subset_sums " << ((std::size_t{1} << ip.generators.size()) - 1) << '\n';
    os << "worst_error " << verdict.worst_error << " at_sum " << verdict.worst_sum << '\n';
    os << "truncated " << (ip.truncated ? 1 : 0);
    if (!ip.note.empty()) os << " (" << ip.note << ')';
    os << '\n';
    os << "verdict " << (verdict.passed ? "PASS" : "FAIL") << '\n';
}

}  // namespace birkhoff
