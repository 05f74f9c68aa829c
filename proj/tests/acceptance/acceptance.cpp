#include "birkhoff/cells.hpp"
#include "birkhoff/config.hpp"
#include "birkhoff/entropy.hpp"
#include "birkhoff/parallel.hpp"
#include "birkhoff/pipeline.hpp"
#include "birkhoff/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>

using namespace birkhoff;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Context {
    RunConfig cfg;
    fs::path out;
    IntegratorConfig integrator;
};

std::string num(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

// Oracles

Vec rk4(const Scenario& s, Vec x, double t, int steps) {
    const double h = t / steps;
    for (int i = 0; i < steps; ++i) {
        const Vec k1 = s.field(x);
        const Vec k2 = s.field(x + 0.5 * h * k1);
        const Vec k3 = s.field(x + 0.5 * h * k2);
        const Vec k4 = s.field(x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return x;
}

// Cone coordinates by a full-pivot LU solve.
Vec coords(const Mat& g, const Vec& d) { return g.fullPivLu().solve(d); }

bool leq(const Mat& g, const Vec& a, const Vec& b) { return coords(g, b - a).minCoeff() >= -1e-12; }

// Distance of an orthant difference from the joint boundary.
double orthant_margin(const Vec& d) {
    const double pos = d.maxCoeff(), neg = (-d).maxCoeff();
    if (d.minCoeff() > 0.0) return d.minCoeff();
    if (d.maxCoeff() < 0.0) return -d.maxCoeff();
    return std::max(0.0, std::min(pos, neg));
}

double brute_hausdorff(const PointSet& a, const PointSet& b) {
    auto directed = [](const PointSet& p, const PointSet& q) {
        double worst = 0.0;
        for (const auto& x : p) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& y : q) best = std::min(best, (x - y).norm());
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(directed(a, b), directed(b, a));
}

double brute_separation(const PointSet& a, const PointSet& b) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& x : a) {
        for (const auto& y : b) best = std::min(best, (x - y).norm());
    }
    return best;
}

// Roots of x - x^3 = k y, y - y^3 = k x: substitute y = (x - x^3)/k and scan.
PointSet bistable_roots(double k) {
    auto y_of = [k](double x) { return (x - x * x * x) / k; };
    auto g = [&](double x) {
        const double y = y_of(x);
        return y - y * y * y - k * x;
    };
    PointSet roots;
    const int n = 400000;
    const double lo = -1.5, hi = 1.5;
    double prev_x = lo, prev = g(lo);
    for (int i = 1; i <= n; ++i) {
        const double x = lo + (hi - lo) * i / n;
        const double cur = g(x);
        if (cur == 0.0 || (prev < 0.0) != (cur < 0.0)) {
            double a = prev_x, b = x;
            for (int it = 0; it < 200; ++it) {
                const double m = 0.5 * (a + b);
                if ((g(a) < 0.0) != (g(m) < 0.0)) {
                    b = m;
                } else {
                    a = m;
                }
            }
            Vec r(2);
            r << 0.5 * (a + b), y_of(0.5 * (a + b));
            if (roots.empty() || (roots.back() - r).norm() > 1e-9) roots.push_back(r);
        }
        prev_x = x;
        prev = cur;
    }
    return roots;
}

// Shared orchestration

struct CycleWitness {
    Vec z;
    double period = 0.0;
};

CycleWitness lv_cycle_witness(const Scenario& s, const IntegratorConfig& cfg) {
    const Vec x = flow_map(s, s.valid_domain().center(), 500.0, cfg).state;
    const auto cr = refine_close_return(s, x, 1.0, 60.0, 0.5, cfg);
    if (!cr || cr->error > 1e-6) throw std::runtime_error("no close return on lv_cycle");
    if ((rk4(s, cr->z, cr->t, 40000) - cr->z).norm() > 1e-5) {
        throw std::runtime_error("close return rejected by the fixed-step integrator");
    }
    return {cr->z, cr->t};
}

PointSet orbit(const Scenario& s, const Vec& z, double span, int count, const IntegratorConfig& cfg) {
    const Trajectory tr = sample_trajectory(s, z, span, span / count, cfg);
    PointSet out(tr.states.begin(), tr.states.begin() + std::min<std::size_t>(count, tr.states.size()));
    return out;
}

Hyperplane diagonal_plane(const Setup& setup) {
    return Hyperplane::orthogonal_to(setup.cone.interior_direction(), setup.scenario.valid_domain().center());
}

struct SuiteResult {
    Setup setup;
    RecurrenceOptions options;
    RecurrenceAnalysis analysis;
    AuditSummary audits;
};

std::map<std::string, SuiteResult> run_suite(const Context& ctx, const std::vector<std::string>& labels) {
    std::map<std::string, SuiteResult> out;
    for (auto& e : scenario_suite(ctx.cfg.run.seed)) {
        if (std::find(labels.begin(), labels.end(), e.label) == labels.end()) continue;
        e.options.map.integrator = ctx.integrator;
        Setup setup = prepare(e.scenario, ConeSpec::orthant(e.scenario.dimension(), ctx.cfg.cone.eta),
                              ctx.cfg.run.seed, ctx.integrator);
        RecurrenceAnalysis analysis = analyze_recurrence(setup, e.options);
        AuditSummary audits = audit_components(setup, analysis, e.options);
        out.emplace(e.label, SuiteResult{std::move(setup), e.options, std::move(analysis), std::move(audits)});
    }
    return out;
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t i) { return item_seed(seed, i); }

// Criteria

Outcome order_axioms(const Context& ctx) {
    std::mt19937_64 rng(split_seed(ctx.cfg.run.seed, 1));
    auto u = [&](double lo, double hi) { return lo + (hi - lo) * unit_uniform(rng); };
    int failures = 0, checks = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 2 + trial % 3;
        Mat g = Mat::Identity(n, n);
        if (trial % 2) {
            for (int r = 0; r < n; ++r) {
                for (int c = 0; c < n; ++c) g(r, c) += r == c ? 0.0 : u(0.0, 0.3);
            }
        }
        const ConeSpec cone(g);
        auto vec = [&](double lo, double hi) {
            Vec v(n);
            for (int k = 0; k < n; ++k) v[k] = u(lo, hi);
            return v;
        };
        const Vec x = vec(-2.0, 2.0);
        const Vec y = x + g * vec(0.05, 1.0);
        const Vec z = y + g * vec(0.05, 1.0);
        const Vec w = vec(-2.0, 2.0);
        const Vec t = vec(-1.0, 1.0);
        const double lambda = u(0.5, 2.0);

        auto agrees = [&](const Vec& a, const Vec& b) {
            const bool ab = leq(g, a, b), ba = leq(g, b, a);
            switch (order_relate(cone, a, b)) {
                case OrderRelation::Equal: return ab && ba;
                case OrderRelation::Leq:
                case OrderRelation::StrictlyBelow: return ab;
                case OrderRelation::Geq:
                case OrderRelation::StrictlyAbove: return ba;
                case OrderRelation::Unordered: return !ab && !ba;
                case OrderRelation::Marginal: return coords(g, b - a).cwiseAbs().minCoeff() <= cone.eta() + 1e-12;
            }
            return false;
        };
        const bool ok[] = {
            order_relate(cone, x, x) == OrderRelation::Equal,
            order_relate(cone, x, y) == OrderRelation::StrictlyBelow && order_relate(cone, y, x) == OrderRelation::StrictlyAbove,
            order_relate(cone, x, z) == OrderRelation::StrictlyBelow,
            order_relate(cone, x + t, y + t) == OrderRelation::StrictlyBelow,
            order_relate(cone, lambda * x, lambda * y) == OrderRelation::StrictlyBelow,
            agrees(x, w) && agrees(w, x) && agrees(x + t, w + t) == agrees(x, w),
        };
        for (bool b : ok) {
            ++checks;
            failures += b ? 0 : 1;
        }

        PointSet a(2 + trial % 7), b(3 + trial % 5), c(1 + trial % 4);
        for (auto& p : a) p = vec(-1.0, 1.0);
        for (auto& p : b) p = vec(-1.0, 1.0);
        for (auto& p : c) p = vec(-1.0, 1.0);
        PointSet ax = a, aw = a;
        for (auto& p : ax) p += x;
        for (auto& p : aw) p += w;
        const bool metrics[] = {
            std::abs(hausdorff(a, b) - brute_hausdorff(a, b)) <= 1e-12,
            hausdorff(ax, aw) <= (x - w).norm() + 1e-12,
            std::abs(separation_index(a, b) - brute_separation(a, b)) <= 1e-12,
            separation_index(a, b) <= separation_index(a, c) + hausdorff(b, c) + 1e-12,
        };
        for (bool m : metrics) {
            ++checks;
            failures += m ? 0 : 1;
        }
    }
    return {failures == 0, std::to_string(checks) + " checks, " + std::to_string(failures) + " failures"};
}

Outcome backward_order(const Context& ctx) {
    const Scenario s = make_scenario("bistable", {{"n", 3.0}, {"k", 0.1}});
    std::mt19937_64 rng(split_seed(ctx.cfg.run.seed, 2));
    auto u = [&](double lo, double hi) { return lo + (hi - lo) * unit_uniform(rng); };
    double worst = std::numeric_limits<double>::infinity(), disagreement = 0.0;
    for (int i = 0; i < 200; ++i) {
        Vec x(3), d(3);
        for (int k = 0; k < 3; ++k) {
            x[k] = u(-0.8, 0.8);
            d[k] = u(0.05, 0.2);
        }
        d[i % 3] = 0.0;
        if (i % 2) d[(i + 1) % 3] = 0.0;
        const double t = u(0.1, 5.0);
        const FlowResult fx = flow_map(s, x, -t, ctx.integrator);
        const FlowResult fy = flow_map(s, x + d, -t, ctx.integrator);
        if (!fx.ok() || !fy.ok()) return {false, "backward flow did not complete for pair " + std::to_string(i)};
        const int steps = static_cast<int>(std::ceil(t / 1e-3));
        const Vec ox = rk4(s, x, -t, steps), oy = rk4(s, x + d, -t, steps);
        disagreement = std::max({disagreement, (ox - fx.state).norm(), (oy - fy.state).norm()});
        worst = std::min(worst, (oy - ox).minCoeff());
    }
    return {worst >= 1e-6 && disagreement < 1e-6,
            "min backward gap " + num(worst) + ", integrator disagreement " + num(disagreement)};
}

Outcome equilibrium_census(const Context&) {
    const Scenario lv = make_scenario("lv2", {});
    const auto lv_eq = find_equilibria(lv, default_equilibrium_seeds(lv));
    const Mat& a = lv.matrix();
    const Vec& r = lv.growth();
    const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    Vec interior(2);
    interior << (r[0] * a(1, 1) - a(0, 1) * r[1]) / det, (a(0, 0) * r[1] - a(1, 0) * r[0]) / det;
    const bool lv_ok = nearest_equilibrium(lv_eq, interior, 1e-8).has_value();

    const double k = 0.1;
    const Scenario bi = make_scenario("bistable", {{"n", 2.0}, {"k", k}});
    const auto bi_eq = find_equilibria(bi, default_equilibrium_seeds(bi));
    const PointSet roots = bistable_roots(k);
    std::size_t matched = 0;
    for (const auto& root : roots) matched += nearest_equilibrium(bi_eq, root, 1e-8) ? 1 : 0;
    const double diag = std::sqrt(1.0 - k);
    const bool diag_ok = nearest_equilibrium(bi_eq, Vec::Constant(2, diag), 1e-8) &&
                         nearest_equilibrium(bi_eq, Vec::Constant(2, -diag), 1e-8);
    return {lv_ok && roots.size() == 9 && bi_eq.size() == 9 && matched == 9 && diag_ok,
            "lv2 interior " + std::string(lv_ok ? "found" : "missing") + ", bistable2 " +
                std::to_string(bi_eq.size()) + " found, " + std::to_string(matched) + "/" +
                std::to_string(roots.size()) + " oracle roots matched"};
}

Outcome localization(const Context& ctx) {
    const auto suite = run_suite(ctx, {"linear2", "bistable2"});
    const auto& lin = suite.at("linear2");
    const BoxCover& cover = lin.analysis.subdivision.cover;
    if (cover.empty()) return {false, "linear2 cover emptied"};
    const Box hull = cover.hull();
    const double width = (hull.hi - hull.lo).maxCoeff();
    const double radius = cover.box_radius().maxCoeff();
    const bool lin_ok = width <= 4.0 * radius * (1.0 + 1e-12) && hull.contains(Vec::Zero(2));

    const auto& bi = suite.at("bistable2");
    const PointSet roots = bistable_roots(0.1);
    bool one_each = bi.analysis.spatial.size() == roots.size();
    for (const auto& comp : bi.analysis.spatial) {
        int inside = 0;
        for (const auto& root : roots) {
            const auto idx = bi.analysis.subdivision.cover.locate(root);
            inside += idx && std::binary_search(comp.boxes.begin(), comp.boxes.end(), *idx) ? 1 : 0;
        }
        one_each = one_each && inside == 1;
    }
    return {lin_ok && one_each, "linear2 width " + num(width) + " vs 4 radii " + num(4.0 * radius) + ", bistable2 " +
                                    std::to_string(bi.analysis.spatial.size()) + " components"};
}

Outcome intersection(const Context& ctx) {
    const auto suite = run_suite(ctx, {"bistable2"});
    const auto& bi = suite.at("bistable2");
    const AuditReport& r = bi.audits.intersection;
    const PointSet roots = bistable_roots(0.1);
    double oracle = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < roots.size(); ++i) {
        for (std::size_t j = i + 1; j < roots.size(); ++j) oracle = std::min(oracle, orthant_margin(roots[j] - roots[i]));
    }
    const bool pass = r.checked > 0 && r.violations.empty() && r.warnings.empty() && r.min_margin >= 0.01 &&
                      oracle >= 0.01;
    return {pass, "audit min margin " + num(r.min_margin) + ", oracle " + num(oracle) + ", flags " +
                      std::to_string(r.violations.size() + r.warnings.size())};
}

Outcome dichotomy(const Context& ctx) {
    const auto suite = run_suite(ctx, {"linear2", "bistable2", "bistable3", "may_leonard", "lv_cycle"});
    std::size_t violations = 0;
    for (const auto& [label, r] : suite) violations += r.audits.verdict_violations + r.audits.violations();

    const auto& lv = suite.at("lv_cycle");
    const CycleWitness w = lv_cycle_witness(lv.setup.scenario, ctx.integrator);
    std::optional<std::size_t> comp;
    for (std::size_t c = 0; c < lv.analysis.records.size(); ++c) {
        for (const auto& p : lv.analysis.records[c].certified_points()) {
            if ((p - w.z).norm() < 0.05) comp = c;
        }
        if (comp) break;
    }
    if (!comp) return {false, "cycle not inside any certified component"};
    const auto& verdict = lv.analysis.records[*comp].verdict;

    // Oracle: cycle samples from the fixed-step integrator are pairwise unordered.
    PointSet cycle{w.z};
    for (int k = 1; k < 120; ++k) cycle.push_back(rk4(lv.setup.scenario, cycle.back(), w.period / 120.0, 300));
    double oracle = std::numeric_limits<double>::infinity();
    bool any_ordered = false;
    for (std::size_t i = 0; i < cycle.size(); ++i) {
        for (std::size_t j = i + 1; j < cycle.size(); ++j) {
            const Vec d = cycle[j] - cycle[i];
            if (d.norm() <= lv.analysis.resolution) continue;
            any_ordered = any_ordered || d.minCoeff() > 0.0 || d.maxCoeff() < 0.0;
            oracle = std::min(oracle, orthant_margin(d));
        }
    }
    const bool pass = violations == 0 && verdict.tag == VerdictTag::Unordered && verdict.margin > 0.0 && !any_ordered;
    return {pass, "violations " + std::to_string(violations) + ", cycle verdict " + to_string(verdict.tag) +
                      " margin " + num(verdict.margin) + ", oracle unordered margin " + num(oracle)};
}

GridSpec square_grid(int nodes, double half) {
    return GridSpec{Vec::Zero(2), Vec::Constant(2, half), {nodes, nodes}};
}

CellPatch ml_upper_cell(const Setup& setup) {
    const auto origin = nearest_equilibrium(setup.equilibria, Vec::Zero(3), 1e-6);
    if (!origin) throw std::runtime_error("may_leonard origin missing from the census");
    return build_cell(setup.backward(50.0), CellTarget::at(*origin), CellSide::Upper, diagonal_plane(setup),
                      square_grid(21, 0.25), 1e-4);
}

Outcome carrying_cell(const Context& ctx) {
    const Scenario s = make_scenario("may_leonard", {});
    const Setup setup = prepare(s, ConeSpec::orthant(3, ctx.cfg.cone.eta), ctx.cfg.run.seed, ctx.integrator);
    const CellPatch cell = ml_upper_cell(setup);
    const double alpha = s.parameters().at("alpha"), beta = s.parameters().at("beta");
    // The diagonal node holds (c, c, c) with c = 1/(1 + alpha + beta) at height sqrt(3) c.
    const double expected = std::sqrt(3.0) / (1.0 + alpha + beta);
    const std::size_t center = 10 + 21 * 10;
    if (!cell.mu[center]) return {false, "diagonal node undefined"};
    const CellAudit audit = cell_audit(cell, setup.backward(50.0), 2.0);
    const double err = std::abs(*cell.mu[center] - expected);
    return {err < 1e-3 && audit.applicable && audit.unorder_margin > 0.0 && audit.invariance_error < 1e-3,
            "diagonal height " + num(*cell.mu[center]) + " expected " + num(expected) + ", unorder margin " +
                num(audit.unorder_margin) + ", invariance " + num(audit.invariance_error)};
}

Outcome containment(const Context& ctx) {
    const Scenario s = make_scenario("lv_cycle", {});
    const Setup setup = prepare(s, ConeSpec::orthant(3, ctx.cfg.cone.eta), ctx.cfg.run.seed, ctx.integrator);
    const CycleWitness w = lv_cycle_witness(s, ctx.integrator);
    const PointSet cycle = orbit(s, w.z, w.period, 100, ctx.integrator);

    const BackwardContext back = setup.backward(50.0);
    const AlphaResult lower = alpha_limit_classify(s, setup.cone, inf_points(setup.cone, cycle), 50.0,
                                                   setup.equilibria, setup.bounds, ctx.integrator);
    if (lower.kind != AlphaKind::ConvergesTo) return {false, "inf of the cycle has no equilibrium alpha-limit"};

    const Hyperplane plane = diagonal_plane(setup);
    Vec lo = Vec::Constant(2, std::numeric_limits<double>::infinity()), hi = -lo;
    for (const auto& p : cycle) {
        const Vec g = plane.coords(p);
        lo = lo.cwiseMin(g);
        hi = hi.cwiseMax(g);
    }
    const GridSpec grid{0.5 * (lo + hi), 0.5 * 1.15 * (hi - lo), {31, 31}};
    const CellPatch cell = build_cell(back, CellTarget::at(*lower.equilibrium), CellSide::Upper, plane, grid, 1e-4);

    const Box& domain = s.valid_domain();
    PointSet tail;
    occupation_support(s, domain.center(), 1000.0, 200.0, domain, 6, 0.01, ctx.integrator, &tail);
    PointSet support;
    for (std::size_t i = 0; i < tail.size(); i += std::max<std::size_t>(1, tail.size() / 200)) support.push_back(tail[i]);

    const Containment cyc = containment_exact(cycle, cell, back);
    const Containment occ = containment_exact(support, cell, back);
    return {cyc.uncovered == 0 && occ.uncovered == 0 && !support.empty() && cyc.max_deviation < 5e-3 &&
                occ.max_deviation < 5e-3,
            "cycle deviation " + num(cyc.max_deviation) + " over " + std::to_string(cyc.checked) +
                ", occupation deviation " + num(occ.max_deviation) + " over " + std::to_string(occ.checked)};
}

Outcome disjointness(const Context& ctx) {
    const Scenario s = make_scenario("may_leonard", {});
    const Setup setup = prepare(s, ConeSpec::orthant(3, ctx.cfg.cone.eta), ctx.cfg.run.seed, ctx.integrator);
    const CellPatch upper = ml_upper_cell(setup);
    const CellPatch lower =
        build_cell(setup.backward(50.0), CellTarget::plus_infinity(), CellSide::Lower, upper.plane, upper.grid, upper.tol);
    const CellSeparation sep = cells_disjoint(upper, lower);
    return {sep.comparable && sep.pass, "min separation " + num(sep.min_separation) + " over " +
                                            std::to_string(sep.shared) + " shared nodes, threshold " +
                                            num(2.0 * (upper.tol + lower.tol))};
}

Outcome ip_sets(const Context& ctx) {
    const Scenario s = make_scenario("lv_cycle", {});
    const Setup setup = prepare(s, ConeSpec::orthant(3, ctx.cfg.cone.eta), ctx.cfg.run.seed, ctx.integrator);
    const double theta = 0.05 * setup.attractor_diameter();
    const Vec interior = s.matrix().fullPivLu().solve(s.growth());
    const CycleWitness w = lv_cycle_witness(s, ctx.integrator);

    struct Witness {
        std::string name;
        Vec z;
        double min_rate;
    };
    bool pass = true;
    std::string detail;
    for (const Witness& wit : {Witness{"equilibrium", interior, 1.0}, Witness{"periodic", w.z, 0.95}}) {
        const IPSet ip = ip_generate(s, wit.z, theta, 10, 1e4, ctx.integrator);
        // Oracle: every finite sum re-flown on its own.
        const auto sums = subset_sums(ip.generators);
        const auto errors = parallel_map<double>(sums.size(), [&](std::size_t i) {
            const FlowResult f = flow_map(s, wit.z, sums[i].first, ctx.integrator);
            return f.ok() ? (f.state - wit.z).norm() : std::numeric_limits<double>::infinity();
        });
        const double worst = errors.empty() ? 0.0 : *std::max_element(errors.begin(), errors.end());

        const RecurrentTimeSet rts = recurrent_times(s, wit.z, theta, 1e4, 0.01, ctx.integrator);
        std::mt19937_64 rng(split_seed(ctx.cfg.run.seed, 10));
        int found = 0, trials = 50;
        bool witnesses_ok = true;
        for (int t = 0; t < trials; ++t) {
            const double tau = 0.5 + 49.5 * unit_uniform(rng);
            const double eps = tau * (0.01 + 0.09 * unit_uniform(rng));
            const A1Witness a = verify_A1(s, rts, tau, eps, ctx.integrator);
            if (!a.found) continue;
            ++found;
            const double err = (flow_map(s, wit.z, a.s, ctx.integrator).state - wit.z).norm();
            witnesses_ok = witnesses_ok && err < theta && std::abs(a.s - a.n * tau) < eps;
        }
        const double rate = static_cast<double>(found) / trials;
        pass = pass && ip.generators.size() == 10 && worst < theta && witnesses_ok && rate >= wit.min_rate;
        detail += (detail.empty() ? "" : ", ") + wit.name + " generators " + std::to_string(ip.generators.size()) +
                  " worst " + num(worst) + " A1 " + std::to_string(found) + "/" + std::to_string(trials);
    }
    return {pass, detail + " (theta " + num(theta) + ")"};
}

Outcome entropy(const Context& ctx) {
    const Scenario s = make_scenario("lv_cycle", {});
    const CycleWitness w = lv_cycle_witness(s, ctx.integrator);
    const std::vector<double> horizons{20.0, 40.0, 80.0}, epsilons{0.05, 0.1};
    const EntropyReport cyc = entropy_estimate(s, orbit(s, w.z, 60.0, 200, ctx.integrator), horizons, epsilons,
                                               ctx.integrator);

    const Scenario lin = make_scenario("linear2", {});
    std::mt19937_64 rng(split_seed(ctx.cfg.run.seed, 11));
    PointSet base;
    while (base.size() < 200) {
        Vec x(2);
        x << 2.0 * unit_uniform(rng) - 1.0, 2.0 * unit_uniform(rng) - 1.0;
        if (x.norm() <= 1.0) base.push_back(0.5 * x);
    }
    const EntropyReport ctl = entropy_estimate(lin, base, horizons, epsilons, ctx.integrator);
    return {cyc.headline <= 0.05 && ctl.headline == 0.0 && cyc.monotone && ctl.monotone,
            "limit-cycle slope " + num(cyc.headline) + ", control slope " + num(ctl.headline)};
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        files[fs::relative(e.path(), root).string()] = ss.str();
    }
    return files;
}

Outcome determinism(const Context& ctx) {
    const fs::path a = ctx.out / "c12" / "run_a", b = ctx.out / "c12" / "run_b";
    fs::remove_all(ctx.out / "c12");
    std::ostringstream log;
    const int ca = run("verify", ctx.cfg, a.string(), log);
    const int cb = run("verify", ctx.cfg, b.string(), log);
    if (ca == kExitConfig || cb == kExitConfig) return {false, "verify rejected the configuration"};
    const auto fa = snapshot(a), fb = snapshot(b);
    std::size_t differing = 0;
    for (const auto& [name, body] : fa) {
        const auto it = fb.find(name);
        if (it == fb.end() || it->second != body) ++differing;
    }
    differing += fb.size() > fa.size() ? fb.size() - fa.size() : 0;
    return {ca == cb && !fa.empty() && differing == 0 && fa.size() == fb.size(),
            std::to_string(fa.size()) + " files compared, " + std::to_string(differing) + " differ, exit codes " +
                std::to_string(ca) + "/" + std::to_string(cb)};
}

}  // namespace

int main(int argc, char** argv) {
    int criterion = 0;
    Context ctx;
    ctx.out = "acceptance_out";
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--criterion" && i + 1 < argc) {
            criterion = std::atoi(argv[++i]);
        } else if (arg == "--out" && i + 1 < argc) {
            ctx.out = argv[++i];
        } else if (arg == "--config" && i + 1 < argc) {
            ctx.cfg = load_config(argv[++i]);
        } else {
            std::cerr << "usage: acceptance --criterion 1..12 [--out dir] [--config file]\n";
            return 2;
        }
    }
    ctx.integrator.rel_tol = ctx.cfg.pipeline.rel_tol;
    ctx.integrator.abs_tol = ctx.cfg.pipeline.abs_tol;

    const std::vector<std::function<Outcome(const Context&)>> criteria{
        order_axioms,  backward_order, equilibrium_census, localization, intersection, dichotomy,
        carrying_cell, containment,    disjointness,       ip_sets,      entropy,      determinism};
    if (criterion < 1 || criterion > static_cast<int>(criteria.size())) {
        std::cerr << "acceptance: criterion must lie in [1, " << criteria.size() << "]\n";
        return 2;
    }
    Outcome o;
    try {
        o = criteria[criterion - 1](ctx);
    } catch (const std::exception& e) {
        o = {false, std::string("error: ") + e.what()};
    }
    std::cout << "criterion " << criterion << ' ' << (o.pass ? "PASS" : "FAIL") << ' ' << o.detail << std::endl;
    return o.pass ? 0 : 1;
}
