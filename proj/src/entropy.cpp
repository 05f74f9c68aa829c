#include "birkhoff/entropy.hpp"

#include "birkhoff/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

namespace birkhoff {

namespace {

struct Orbits {
    double dt = 0.0;
    std::vector<PointSet> states;   // per base point, samples at k * dt
};

PointSet sorted_base(const PointSet& base) {
    PointSet out = base;
    std::stable_sort(out.begin(), out.end(), [](const Vec& a, const Vec& b) {
        return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
    });
    return out;
}

Orbits precompute(const Scenario& s, const PointSet& base, double T, double eps, const IntegratorConfig& cfg) {
    double speed = 0.0;
    for (const Vec& x : base) speed = std::max(speed, s.field(x).norm());
    Orbits o;
    o.dt = speed > 0.0 ? std::clamp(eps / (4.0 * speed), 1e-3, 0.1) : 0.1;
    const auto trajs = parallel_map<Trajectory>(base.size(), [&](std::size_t i) {
        return sample_trajectory(s, base[i], T, o.dt, cfg);
    });
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        if (trajs[i].status != TerminalStatus::Completed) {
            throw std::runtime_error("entropy: orbit of base point " + std::to_string(i) + " terminated with " +
                                     to_string(trajs[i].status));
        }
        o.states.push_back(trajs[i].states);
    }
    return o;
}

bool shadows(const Orbits& o, std::size_t a, std::size_t b, std::size_t samples, double eps) {
    for (std::size_t k = 0; k < samples; ++k) {
        if ((o.states[a][k] - o.states[b][k]).cwiseAbs().maxCoeff() > eps) return false;
    }
    return true;
}

std::set<std::size_t> greedy(const Orbits& o, std::size_t samples, double eps, std::set<std::size_t> centers) {
    for (std::size_t i = 0; i < o.states.size(); ++i) {
        if (centers.count(i)) continue;
        const bool covered =
            std::any_of(centers.begin(), centers.end(), [&](std::size_t c) { return shadows(o, i, c, samples, eps); });
        if (!covered) centers.insert(i);
    }
    return centers;
}

std::size_t samples_for(const Orbits& o, double T) {
    return static_cast<std::size_t>(std::floor(T / o.dt + 1e-9)) + 1;
}

}  // namespace

std::size_t spanning_count(const Scenario& s, const PointSet& base, double T, double eps,
                           const IntegratorConfig& cfg) {
    if (!(T > 0.0) || !(eps > 0.0)) throw std::invalid_argument("spanning_count: T and eps must be positive");
    if (base.empty()) return 0;
    const Orbits o = precompute(s, sorted_base(base), T, eps, cfg);
    return greedy(o, samples_for(o, T), eps, {}).size();
}

EntropyReport entropy_estimate(const Scenario& s, const PointSet& base, std::vector<double> horizons,
                               std::vector<double> epsilons, const IntegratorConfig& cfg) {
    if (horizons.size() < 3 || epsilons.size() < 2) {
        throw std::invalid_argument("entropy_estimate: need at least 3 horizons and 2 epsilons");
    }
    std::sort(horizons.begin(), horizons.end());
    std::sort(epsilons.begin(), epsilons.end());
    if (!(horizons.front() > 0.0) || !(epsilons.front() > 0.0)) {
        throw std::invalid_argument("entropy_estimate: horizons and epsilons must be positive");
    }
    EntropyReport r;
    r.horizons = horizons;
    r.epsilons = epsilons;
    const std::size_t nk = horizons.size(), nj = epsilons.size();
    r.counts.assign(nk, std::vector<std::size_t>(nj, 0));
    r.slopes.assign(nj, 0.0);
    if (base.empty()) {
        r.degenerate = true;
        return r;
    }

    const Orbits o = precompute(s, sorted_base(base), horizons.back(), epsilons.front(), cfg);
    std::vector<std::vector<std::set<std::size_t>>> centers(nk, std::vector<std::set<std::size_t>>(nj));
    for (std::size_t k = 0; k < nk; ++k) {
        for (std::size_t jj = nj; jj-- > 0;) {
            std::set<std::size_t> seed;
            if (k > 0) seed = centers[k - 1][jj];
            if (jj + 1 < nj) seed.insert(centers[k][jj + 1].begin(), centers[k][jj + 1].end());
            centers[k][jj] = greedy(o, samples_for(o, horizons[k]), epsilons[jj], std::move(seed));
            r.counts[k][jj] = centers[k][jj].size();
        }
    }

    const double tbar = std::accumulate(horizons.begin(), horizons.end(), 0.0) / static_cast<double>(nk);
    double sxx = 0.0;
    for (double t : horizons) sxx += (t - tbar) * (t - tbar);
    for (std::size_t j = 0; j < nj; ++j) {
        std::vector<double> y(nk);
        for (std::size_t k = 0; k < nk; ++k) y[k] = std::log(static_cast<double>(r.counts[k][j]));
        const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(nk);
        double sxy = 0.0;
        for (std::size_t k = 0; k < nk; ++k) sxy += (horizons[k] - tbar) * (y[k] - ybar);
        r.slopes[j] = sxx > 0.0 ? sxy / sxx : 0.0;
    }
    r.headline = *std::max_element(r.slopes.begin(), r.slopes.end());
    for (std::size_t k = 0; k < nk; ++k) {
        for (std::size_t j = 0; j < nj; ++j) {
            if (k > 0 && r.counts[k][j] < r.counts[k - 1][j]) r.monotone = false;
            if (j > 0 && r.counts[k][j] > r.counts[k][j - 1]) r.monotone = false;
        }
    }
    return r;
}

void write_entropy_csv(std::ostream& os, const EntropyReport& r) {
    os.precision(17);
    os << 'T';
    for (double e : r.epsilons) os << ",N_eps_" << e;
    os << '\n';
    for (std::size_t k = 0; k < r.horizons.size(); ++k) {
        os << r.horizons[k];
        for (std::size_t c : r.counts[k]) os << ',' << c;
        os << '\n';
    }
    os << "slope";
    for (double sl : r.slopes) os << ',' << sl;
    os << '\n';
}

void write_entropy_verdict(std::ostream& os, const EntropyReport& r, double threshold) {
    os.precision(12);
    os << "headline_slope " << r.headline << " threshold " << threshold << " verdict "
       << (r.headline <= threshold ? "ZERO" : "POSITIVE") << (r.degenerate ? " degenerate" : "")
       << (r.monotone ? "" : " nonmonotone") << '\n';
}

}  // namespace birkhoff
