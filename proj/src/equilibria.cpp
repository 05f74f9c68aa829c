#include "birkhoff/equilibria.hpp"
#include "birkhoff/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace birkhoff {

std::string to_string(Stability s) {
    switch (s) {
        case Stability::Attracting: return "Attracting";
        case Stability::Repelling: return "Repelling";
        case Stability::Saddle: return "Saddle";
        case Stability::Marginal: return "Marginal";
    }
    return "?";
}

std::string to_string(AlphaKind k) {
    switch (k) {
        case AlphaKind::ConvergesTo: return "ConvergesTo";
        case AlphaKind::EscapesAboveXStar: return "EscapesAboveXStar";
        case AlphaKind::EscapesBelowXSup: return "EscapesBelowXSup";
        case AlphaKind::EscapesMixed: return "EscapesMixed";
        case AlphaKind::BoundedNonconvergent: return "BoundedNonconvergent";
        case AlphaKind::Unknown: return "Unknown";
    }
    return "?";
}

PointSet seed_grid(const Box& box, int per_axis) {
    if (per_axis < 1) throw std::invalid_argument("seed_grid: need at least one point per axis");
    const int n = box.dimension();
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) total *= static_cast<std::size_t>(per_axis);
    PointSet out;
    out.reserve(total);
    for (std::size_t flat = 0; flat < total; ++flat) {
        Vec p(n);
        std::size_t rest = flat;
        for (int i = 0; i < n; ++i) {
            const auto k = static_cast<int>(rest % per_axis);
            rest /= per_axis;
            const double f = per_axis == 1 ? 0.5 : static_cast<double>(k) / (per_axis - 1);
            p[i] = box.lo[i] + f * (box.hi[i] - box.lo[i]);
        }
        out.push_back(std::move(p));
    }
    return out;
}

namespace {

bool kolmogorov(const Scenario& s) {
    return s.kind() == FieldKind::LotkaVolterra || s.kind() == FieldKind::MayLeonard;
}

struct NewtonOutcome {
    Vec x;
    double residual = std::numeric_limits<double>::infinity();
    bool converged = false;
};

NewtonOutcome damped_newton(const Scenario& s, Vec x, const NewtonOptions& opts) {
    NewtonOutcome out;
    double fnorm = s.field(x).norm();
    int polish = 0;
    for (int it = 0; it < opts.max_iter; ++it) {
        if (!x.allFinite()) return out;
        const Vec f = s.field(x);
        const Mat j = s.jacobian(x);
        Eigen::FullPivLU<Mat> lu(j);
        const Vec step = lu.isInvertible() ? Vec(lu.solve(-f)) : Vec(j.completeOrthogonalDecomposition().solve(-f));
        if (!step.allFinite()) return out;
        double lambda = 1.0;
        Vec trial = x + step;
        double tnorm = s.field(trial).norm();
        for (int h = 0; h < 30 && !(tnorm < fnorm) && fnorm > 0.0; ++h) {
            lambda *= 0.5;
            trial = x + lambda * step;
            tnorm = s.field(trial).norm();
        }
        if (!(tnorm <= fnorm)) break;
        x = trial;
        fnorm = tnorm;
        if (fnorm < opts.tol) {
            // a few full steps past the acceptance threshold to reach roundoff
            if (++polish >= 3 || step.norm() <= 1e-15 * (1.0 + x.norm())) break;
        }
    }
    out.x = x;
    out.residual = s.field(x).norm();
    out.converged = out.residual < opts.tol && x.allFinite();
    return out;
}

EquilibriumRecord make_record(const Scenario& s, const Vec& p, const NewtonOptions& opts) {
    EquilibriumRecord rec;
    rec.point = p;
    rec.residual = s.field(p).norm();
    const Mat j = s.jacobian(p);
    Eigen::FullPivLU<Mat> lu(j);
    rec.singular = !lu.isInvertible();
    Eigen::EigenSolver<Mat> es(j, false);
    for (int i = 0; i < es.eigenvalues().size(); ++i) rec.eigen_real.push_back(es.eigenvalues()[i].real());
    std::sort(rec.eigen_real.begin(), rec.eigen_real.end());
    const double m = opts.stability_margin;
    const bool any_flat = std::any_of(rec.eigen_real.begin(), rec.eigen_real.end(),
                                      [&](double r) { return std::abs(r) <= m; });
    if (rec.singular || any_flat) {
        rec.stability = Stability::Marginal;
    } else if (rec.eigen_real.back() < -m) {
        rec.stability = Stability::Attracting;
    } else if (rec.eigen_real.front() > m) {
        rec.stability = Stability::Repelling;
    } else {
        rec.stability = Stability::Saddle;
    }
    return rec;
}

}  // namespace

PointSet default_equilibrium_seeds(const Scenario& s, int per_axis) {
    Box box = s.valid_domain();
    if (kolmogorov(s)) box.lo.setZero();
    return seed_grid(box, per_axis);
}

std::vector<EquilibriumRecord> find_equilibria(const Scenario& s, const PointSet& seeds, const NewtonOptions& opts) {
    if (!(opts.tol > 0.0) || !(opts.dedup_radius > 0.0)) throw std::invalid_argument("newton options must be positive");
    const auto outcomes =
        parallel_map<NewtonOutcome>(seeds.size(), [&](std::size_t i) { return damped_newton(s, seeds[i], opts); });

    const Box keep = s.valid_domain().inflated(opts.domain_slack);
    PointSet roots;
    for (const NewtonOutcome& o : outcomes) {
        if (!o.converged) continue;
        if (!keep.contains(o.x)) continue;
        if (kolmogorov(s) && o.x.minCoeff() < -1e-12) continue;
        if (point_set_distance(o.x, roots) <= opts.dedup_radius) continue;
        roots.push_back(o.x);
    }
    std::sort(roots.begin(), roots.end(), [](const Vec& a, const Vec& b) {
        return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
    });
    std::vector<EquilibriumRecord> out;
    out.reserve(roots.size());
    for (const Vec& p : roots) out.push_back(make_record(s, p, opts));
    return out;
}

std::optional<std::size_t> nearest_equilibrium(const std::vector<EquilibriumRecord>& eq, const Vec& x, double radius) {
    std::optional<std::size_t> best;
    double best_d = radius;
    for (std::size_t i = 0; i < eq.size(); ++i) {
        const double d = (eq[i].point - x).norm();
        if (d <= best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

AttractorBounds attractor_bounds(const Scenario& s, const ConeSpec& cone, std::size_t sample_count, double t_settle,
                                 std::uint64_t seed, const IntegratorConfig& cfg) {
    if (sample_count == 0 || !(t_settle > 0.0)) throw std::invalid_argument("attractor_bounds: bad sampling settings");
    const int n = s.dimension();
    const Box& dom = s.valid_domain();

    struct Tail {
        Vec lo, hi;
        bool escaped = false;
        Vec start;
    };
    const double dt = 0.02 * t_settle;
    const auto tails = parallel_map<Tail>(sample_count, [&](std::size_t i) {
        std::mt19937_64 rng(item_seed(seed, i));
        Vec x(n);
        for (int k = 0; k < n; ++k) x[k] = dom.lo[k] + unit_uniform(rng) * (dom.hi[k] - dom.lo[k]);
        Tail tail{Vec::Constant(n, std::numeric_limits<double>::infinity()),
                  Vec::Constant(n, -std::numeric_limits<double>::infinity()), false, x};
        const FlowResult end = integrate_visit(s, x, t_settle, dt, cfg, [&](double t, const Vec& state) {
            if (t >= 0.8 * t_settle - 1e-12) {
                tail.lo = tail.lo.cwiseMin(state);
                tail.hi = tail.hi.cwiseMax(state);
            }
            return true;
        });
        tail.escaped = !end.ok();
        return tail;
    });

    AttractorBounds out;
    Vec lo = Vec::Constant(n, std::numeric_limits<double>::infinity());
    Vec hi = -lo;
    for (const Tail& t : tails) {
        if (t.escaped) {
            out.dissipative = false;
            out.escaped_samples.push_back(t.start);
            continue;
        }
        lo = lo.cwiseMin(t.lo);
        hi = hi.cwiseMax(t.hi);
    }
    if (!lo.allFinite()) throw std::runtime_error("attractor_bounds: every sample escaped");
    const Vec pad = 0.05 * (hi - lo) + Vec::Constant(n, 1e-9);
    out.box = Box(lo - pad, hi + pad);

    PointSet corners;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        Vec c(n);
        for (int k = 0; k < n; ++k) c[k] = (mask >> k) & 1u ? out.box.hi[k] : out.box.lo[k];
        corners.push_back(std::move(c));
    }
    out.x_star = inf_points(cone, corners);
    out.x_sup = sup_points(cone, corners);
    return out;
}

AlphaResult alpha_limit_classify(const Scenario& s, const ConeSpec& cone, const Vec& x, double t_max,
                                 const std::vector<EquilibriumRecord>& equilibria, const AttractorBounds& bounds,
                                 const IntegratorConfig& cfg, const AlphaOptions& opts) {
    AlphaResult res;
    std::optional<std::size_t> captured, tracked;
    double capture_start = 0.0;
    bool seen_above = false, seen_below = false, against_above = false, against_below = false;
    const Box roam = bounds.box.inflated(0.1);
    bool stayed_bounded = true;

    const FlowResult end = integrate_visit(s, x, -t_max, opts.sample_dt, cfg, [&](double t, const Vec& state) {
        const double elapsed = -t;
        if (elapsed >= 0.5 * t_max && !roam.contains(state)) stayed_bounded = false;
        const auto approach = nearest_equilibrium(equilibria, state, opts.side_radius);
        if (approach != tracked) {
            tracked = approach;
            seen_above = seen_below = against_above = against_below = false;
        }
        if (approach) {
            const Vec d = state - equilibria[*approach].point;
            const double n = d.norm();
            if (n > 0.0) {
                const OrderRegion r = classify_difference(cone, d / n);
                seen_above = seen_above || r.tag == RegionTag::InteriorCPlus;
                seen_below = seen_below || r.tag == RegionTag::InteriorCMinus;
                against_above = against_above || r.tag == RegionTag::InteriorCMinus || r.tag == RegionTag::InteriorK;
                against_below = against_below || r.tag == RegionTag::InteriorCPlus || r.tag == RegionTag::InteriorK;
            }
        }
        const auto near = nearest_equilibrium(equilibria, state, opts.capture_radius);
        if (!near) {
            captured.reset();
            return true;
        }
        if (captured != near) {
            captured = near;
            capture_start = elapsed;
        }
        if (elapsed - capture_start >= opts.dwell) {
            res.kind = AlphaKind::ConvergesTo;
            res.equilibrium = near;
            res.above = seen_above && !against_above;
            res.below = seen_below && !against_below;
            return false;
        }
        return true;
    });
    res.last_state = end.state;
    res.time = end.time;
    if (res.kind == AlphaKind::ConvergesTo) return res;

    if (end.status != TerminalStatus::Completed) {
        const Vec up = cone.to_cone_coords(end.state - bounds.x_star);
        const Vec down = cone.to_cone_coords(bounds.x_sup - end.state);
        const double m = std::max(opts.escape_margin, cone.eta());
        if (up.minCoeff() > m) {
            res.kind = AlphaKind::EscapesAboveXStar;
        } else if (down.minCoeff() > m) {
            res.kind = AlphaKind::EscapesBelowXSup;
        } else {
            res.kind = AlphaKind::EscapesMixed;
        }
        return res;
    }
    res.kind = stayed_bounded ? AlphaKind::BoundedNonconvergent : AlphaKind::Unknown;
    return res;
}

}  // namespace birkhoff
