#include "birkhoff/entropy.hpp"
#include "birkhoff/parallel.hpp"
#include "birkhoff/runner.hpp"
#include "run_support.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

namespace birkhoff::run_support {

namespace {

namespace fs = std::filesystem;

struct Criterion {
    int id = 0;
    bool pass = false;
    bool counted = true;
    std::string detail;
};

std::string num(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

struct SuiteRun {
    std::string label;
    Setup setup;
    RecurrenceOptions options;
    RecurrenceAnalysis analysis;
    AuditSummary audits;
};

class Verifier {
public:
    Verifier(const RunConfig& cfg, fs::path out, std::ostream& log) : cfg_(cfg), out_(std::move(out)), log_(log) {
        integrator_ = integrator_of(cfg);
    }

    int run();

private:
    Criterion axioms();
    Criterion backward_reversal();
    Criterion census();
    Criterion localization();
    Criterion intersection();
    Criterion dichotomy();
    Criterion carrying_cell();
    Criterion containment();
    Criterion disjointness();
    Criterion ip_sets();
    Criterion entropy();

    void run_suite();
    const SuiteRun& suite(const std::string& label) const;
    const CellPatch& ml_cell();

    const RunConfig& cfg_;
    fs::path out_;
    std::ostream& log_;
    IntegratorConfig integrator_;
    std::deque<SuiteRun> suite_;
    std::optional<CellPatch> ml_cell_;
};

void Verifier::run_suite() {
    for (auto& e : scenario_suite(cfg_.run.seed)) {
        const ConeSpec cone = ConeSpec::orthant(e.scenario.dimension(), cfg_.cone.eta);
        e.options.map.integrator = integrator_;
        Setup setup = prepare(e.scenario, cone, cfg_.run.seed, integrator_);
        RecurrenceAnalysis analysis = analyze_recurrence(setup, e.options);
        AuditSummary audits = audit_components(setup, analysis, e.options);
        const fs::path dir = out_ / "suite" / e.label;
        auto eq = artifact(dir, "equilibria.csv");
        write_equilibria_csv(eq, setup.equilibria);
        auto comps = artifact(dir, "components.txt");
        comps << "components " << analysis.records.size() << " resolution " << analysis.resolution << '\n';
        for (std::size_t i = 0; i < analysis.records.size(); ++i) {
            write_component_report(comps, i, analysis.records[i], setup.equilibria);
        }
        auto au = artifact(dir, "audits.txt");
        write_audit_summary(au, audits);
        log_ << "verify: suite " << e.label << ' ' << analysis.records.size() << " components\n";
        suite_.push_back(SuiteRun{e.label, std::move(setup), e.options, std::move(analysis), std::move(audits)});
    }
}

const SuiteRun& Verifier::suite(const std::string& label) const {
    for (const auto& r : suite_) {
        if (r.label == label) return r;
    }
    throw std::runtime_error("verify: suite entry '" + label + "' missing");
}

Criterion Verifier::axioms() {
    enum Check { Reflexive, Antisymmetric, Transitive, Translation, Scaling, Consistent, Dis1, Dis2, kChecks };
    static const char* names[] = {"reflexive", "antisymmetric", "transitive", "translation",
                                  "scaling",   "consistent",    "dis_1",      "dis_2"};
    constexpr std::size_t trials = 1000;
    constexpr double tol = 1e-12;
    const auto fails = parallel_map<std::array<int, kChecks>>(trials, [&](std::size_t i) {
        std::array<int, kChecks> f{};
        std::mt19937_64 rng(item_seed(cfg_.run.seed, i));
        auto u = [&](double lo, double hi) { return lo + (hi - lo) * unit_uniform(rng); };
        const int n = 2 + static_cast<int>(rng() % 2);
        Mat g = Mat::Identity(n, n);
        if (i % 2 == 1) {
            for (int r = 0; r < n; ++r) {
                for (int c = 0; c < n; ++c) g(r, c) += r == c ? 0.0 : u(0.0, 0.3);
            }
        }
        const ConeSpec cone(g);
        auto leq = [&](const Vec& a, const Vec& b) { return cone.to_cone_coords(b - a).minCoeff() >= -tol; };
        auto rand_vec = [&](double lo, double hi) {
            Vec v(n);
            for (int k = 0; k < n; ++k) v[k] = u(lo, hi);
            return v;
        };
        auto cone_vec = [&](bool strict) {
            Vec c = rand_vec(0.05, 1.0);
            const int zero = static_cast<int>(rng() % (n + 1));
            if (!strict && zero < n) c[zero] = 0.0;
            return Vec(g * c);
        };
        // Relations order_relate commits to must agree with the tolerant order.
        auto consistent = [&](const Vec& a, const Vec& b) {
            switch (order_relate(cone, a, b)) {
                case OrderRelation::Equal: return leq(a, b) && leq(b, a);
                case OrderRelation::Leq:
                case OrderRelation::StrictlyBelow: return leq(a, b);
                case OrderRelation::Geq:
                case OrderRelation::StrictlyAbove: return leq(b, a);
                case OrderRelation::Unordered: return !leq(a, b) && !leq(b, a);
                case OrderRelation::Marginal: break;
            }
            const Vec c = cone.to_cone_coords(b - a);
            return c.cwiseAbs().minCoeff() <= cone.eta();
        };

        const Vec x = rand_vec(-2.0, 2.0);
        const Vec y = x + cone_vec(false);
        const Vec z = y + cone_vec(false);
        const Vec ys = x + cone_vec(true);
        const Vec zs = ys + cone_vec(true);
        const Vec other = rand_vec(-2.0, 2.0);
        f[Reflexive] = !(leq(x, x) && order_relate(cone, x, x) == OrderRelation::Equal);
        f[Antisymmetric] = !(leq(x, y) && !leq(y, x));
        f[Transitive] = !(leq(x, z) && !leq(z, x) && order_relate(cone, x, zs) == OrderRelation::StrictlyBelow);
        const Vec w = rand_vec(-1.0, 1.0);
        f[Translation] = leq(x + w, y + w) != leq(x, y) || leq(x + w, other + w) != leq(x, other) ||
                         order_relate(cone, x + w, ys + w) != OrderRelation::StrictlyBelow;
        const double lambda = u(0.5, 2.0);
        f[Scaling] = leq(lambda * x, lambda * y) != leq(x, y) || leq(lambda * x, lambda * other) != leq(x, other);
        f[Consistent] = !(consistent(x, y) && consistent(y, x) && consistent(x, z) && consistent(x, other) &&
                          consistent(other, x));

        auto rand_set = [&]() {
            PointSet s(3 + rng() % 10);
            for (auto& p : s) p = rand_vec(-1.0, 1.0);
            return s;
        };
        const PointSet a = rand_set(), b = rand_set(), c = rand_set();
        PointSet ax = a, aw = a;
        for (auto& p : ax) p += x;
        for (auto& p : aw) p += w;
        f[Dis1] = hausdorff(ax, aw) > (x - w).norm() + tol;
        f[Dis2] = separation_index(a, b) > separation_index(a, c) + hausdorff(b, c) + tol;
        return f;
    });
    std::array<int, kChecks> total{};
    for (const auto& f : fails) {
        for (int k = 0; k < kChecks; ++k) total[k] += f[k];
    }
    auto os = artifact(out_ / "axioms", "axioms.csv");
    os << "check,trials,failures\n";
    int all = 0;
    for (int k = 0; k < kChecks; ++k) {
        os << names[k] << ',' << trials << ',' << total[k] << '\n';
        all += total[k];
    }
    return {1, all == 0, true, std::to_string(kChecks * trials) + " checks, " + std::to_string(all) + " failures"};
}

Criterion Verifier::backward_reversal() {
    const Scenario s = make_scenario("bistable", {{"n", 3.0}, {"k", 0.1}});
    const ConeSpec cone = ConeSpec::orthant(3, cfg_.cone.eta);
    struct Pair {
        double t = 0.0;
        double margin = 0.0;
        bool ok = false;
    };
    const auto pairs = parallel_map<Pair>(200, [&](std::size_t i) {
        std::mt19937_64 rng(item_seed(cfg_.run.seed ^ 0x5eedULL, i));
        auto u = [&](double lo, double hi) { return lo + (hi - lo) * unit_uniform(rng); };
        Vec x(3), d(3);
        for (int k = 0; k < 3; ++k) {
            x[k] = u(-0.8, 0.8);
            d[k] = u(0.05, 0.2);
        }
        const unsigned zero_mask = static_cast<unsigned>(rng() % 7);   // never all three
        for (int k = 0; k < 3; ++k) {
            if (zero_mask & (1u << k)) d[k] = 0.0;
        }
        Pair p;
        p.t = u(0.1, 5.0);
        const FlowResult fx = flow_map(s, x, -p.t, integrator_);
        const FlowResult fy = flow_map(s, x + d, -p.t, integrator_);
        p.ok = fx.ok() && fy.ok();
        p.margin = cone.to_cone_coords(fy.state - fx.state).minCoeff();
        return p;
    });
    auto os = artifact(out_ / "backward", "pairs.csv");
    os << "pair,t,margin,completed\n";
    double worst = std::numeric_limits<double>::infinity();
    bool completed = true;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        os << i << ',' << pairs[i].t << ',' << pairs[i].margin << ',' << (pairs[i].ok ? 1 : 0) << '\n';
        worst = std::min(worst, pairs[i].margin);
        completed = completed && pairs[i].ok;
    }
    return {2, completed && worst >= 1e-6, true, "min margin " + num(worst)};
}

Criterion Verifier::census() {
    const Scenario lv = make_scenario("lv2", {});
    const auto lv_eq = find_equilibria(lv, default_equilibrium_seeds(lv));
    const Vec interior = lv.matrix().colPivHouseholderQr().solve(lv.growth());
    const auto hit = nearest_equilibrium(lv_eq, interior, 1e-8);

    const Scenario bi = make_scenario("bistable", {{"n", 2.0}, {"k", 0.1}});
    const auto bi_eq = find_equilibria(bi, default_equilibrium_seeds(bi));
    const double a = std::sqrt(1.0 - 0.1);
    const bool plus = nearest_equilibrium(bi_eq, Vec::Constant(2, a), 1e-8).has_value();
    const bool minus = nearest_equilibrium(bi_eq, Vec::Constant(2, -a), 1e-8).has_value();

    auto os = artifact(out_ / "census", "lv2.csv");
    write_equilibria_csv(os, lv_eq);
    auto ob = artifact(out_ / "census", "bistable2.csv");
    write_equilibria_csv(ob, bi_eq);
    const bool pass = hit && bi_eq.size() == 9 && plus && minus;
    return {3, pass, true,
            "lv2 interior " + std::string(hit ? "found" : "missing") + ", bistable2 " +
                std::to_string(bi_eq.size()) + " equilibria"};
}

Criterion Verifier::localization() {
    const SuiteRun& lin = suite("linear2");
    const BoxCover& cover = lin.analysis.subdivision.cover;
    bool lin_ok = !cover.empty();
    double width = 0.0, radius = 0.0;
    if (lin_ok) {
        const Box hull = cover.hull();
        width = (hull.hi - hull.lo).maxCoeff();
        radius = cover.box_radius().maxCoeff();
        lin_ok = width <= 4.0 * radius * (1.0 + 1e-12) && hull.contains(Vec::Zero(2));
    }

    const SuiteRun& bi = suite("bistable2");
    const auto& comps = bi.analysis.spatial;
    std::vector<int> hits(bi.setup.equilibria.size(), 0);
    bool one_each = comps.size() == 9 && hits.size() == 9;
    for (const auto& c : comps) {
        int inside = 0;
        for (std::size_t e = 0; e < hits.size(); ++e) {
            const auto idx = bi.analysis.subdivision.cover.locate(bi.setup.equilibria[e].point);
            if (idx && std::binary_search(c.boxes.begin(), c.boxes.end(), *idx)) {
                ++inside;
                ++hits[e];
            }
        }
        one_each = one_each && inside == 1;
    }
    for (int h : hits) one_each = one_each && h == 1;
    return {4, lin_ok && one_each, true,
            "linear2 width " + num(width) + " (4 radii " + num(4.0 * radius) + "), bistable2 " +
                std::to_string(comps.size()) + " components"};
}

Criterion Verifier::intersection() {
    const SuiteRun& bi = suite("bistable2");
    const AuditReport& r = bi.audits.intersection;
    const bool pass = r.checked > 0 && r.violations.empty() && r.warnings.empty() && r.min_margin >= 0.01;
    return {5, pass, true,
            "min margin " + num(r.min_margin) + ", flags " + std::to_string(r.violations.size() + r.warnings.size())};
}

Criterion Verifier::dichotomy() {
    std::size_t verdict_violations = 0, audit_violations = 0;
    for (const auto& r : suite_) {
        verdict_violations += r.audits.verdict_violations;
        audit_violations += r.audits.violations();
    }
    const SuiteRun& lv = suite("lv_cycle");
    std::size_t comp = 0;
    const auto z = periodic_point(lv.analysis, &comp);
    bool cycle_ok = false;
    double margin = 0.0;
    if (z) {
        const auto& v = lv.analysis.records[comp].verdict;
        margin = v.margin;
        cycle_ok = v.tag == VerdictTag::Unordered && v.margin > 0.0;
    }
    return {6, verdict_violations == 0 && audit_violations == 0 && cycle_ok, true,
            "violations " + std::to_string(audit_violations) + ", limit-cycle " +
                (cycle_ok ? "Unordered margin " + num(margin) : std::string("not Unordered"))};
}

const CellPatch& Verifier::ml_cell() {
    if (!ml_cell_) {
        const SuiteRun& ml = suite("may_leonard");
        const auto origin = nearest_equilibrium(ml.setup.equilibria, Vec::Zero(3), 1e-6);
        if (!origin) throw std::runtime_error("may_leonard origin missing from census");
        const GridSpec grid{Vec::Zero(2), Vec::Constant(2, 0.25), {21, 21}};
        ml_cell_ = build_cell(ml.setup.backward(50.0), CellTarget::at(*origin), CellSide::Upper,
                              cell_plane(ml.setup), grid, 1e-4);
        auto os = artifact(out_ / "cells", "may_leonard_upper_origin.csv");
        write_cell_csv(os, *ml_cell_);
    }
    return *ml_cell_;
}

Criterion Verifier::carrying_cell() {
    const SuiteRun& ml = suite("may_leonard");
    const CellPatch& cell = ml_cell();
    const BackwardContext ctx = ml.setup.backward(50.0);
    const CellAudit audit = cell_audit(cell, ctx, 2.0);
    const auto& params = ml.setup.scenario.parameters();
    const double x = 1.0 / (1.0 + params.at("alpha") + params.at("beta"));
    const double expected = cell.plane.height(Vec::Constant(3, x));
    const std::size_t center = cell.mu.size() / 2;
    const double got = cell.mu[center] ? *cell.mu[center] : std::numeric_limits<double>::quiet_NaN();
    const Containment eq = containment_exact({Vec::Constant(3, x)}, cell, ctx);
    auto os = artifact(out_ / "cells", "may_leonard_audit.txt");
    write_cell_audit(os, audit);
    os << "center_height " << got << " expected " << expected << '\n';
    os << "equilibrium_deviation " << eq.max_deviation << '\n';
    const bool pass = std::abs(got - expected) < 1e-3 && audit.applicable && audit.unorder_margin > 0.0 &&
                      audit.invariance_error < 1e-3 && eq.uncovered == 0 && eq.max_deviation < 1e-3;
    return {7, pass, true,
            "center " + num(got) + " expected " + num(expected) + ", unorder_margin " + num(audit.unorder_margin) +
                ", invariance " + num(audit.invariance_error)};
}

Criterion Verifier::containment() {
    const SuiteRun& lv = suite("lv_cycle");
    std::size_t comp = 0;
    const auto z = periodic_point(lv.analysis, &comp);
    const auto& targets = lv.analysis.records[comp].targets;
    if (!z || !targets || targets->lower.kind != TargetKind::Equilibrium) {
        return {8, false, true, "no periodic component with an equilibrium lower target"};
    }
    const PointSet cycle = orbit_samples(lv.setup, z->z, z->t, 100);
    const Hyperplane plane = cell_plane(lv.setup);
    const GridSpec grid = grid_around(plane, cycle, 1.15, 31);
    const BackwardContext ctx = lv.setup.backward(50.0);
    const CellPatch cell =
        build_cell(ctx, CellTarget::at(*targets->lower.equilibrium), CellSide::Upper, plane, grid, 1e-4);

    const Box& domain = lv.setup.scenario.valid_domain();
    PointSet tail;
    const BoxCover support = occupation_support(lv.setup.scenario, domain.center(), 1000.0, 200.0, domain,
                                                lv.options.depths.back(), 0.01, integrator_, &tail);
    PointSet support_points;
    const std::size_t stride = std::max<std::size_t>(1, tail.size() / 200);
    for (std::size_t i = 0; i < tail.size(); i += stride) support_points.push_back(tail[i]);

    const Containment cyc = containment_exact(cycle, cell, ctx);
    const Containment occ = containment_exact(support_points, cell, ctx);
    const fs::path dir = out_ / "containment";
    auto cs = artifact(dir, "cell.csv");
    write_cell_csv(cs, cell);
    auto oc = artifact(dir, "occupation.csv");
    write_cover_csv(oc, support);
    auto rep = artifact(dir, "containment.txt");
    rep << "lower_target " << *targets->lower.equilibrium << '\n';
    rep << "cycle max_deviation " << cyc.max_deviation << " checked " << cyc.checked << " uncovered "
        << cyc.uncovered << '\n';
    rep << "occupation max_deviation " << occ.max_deviation << " checked " << occ.checked << " uncovered "
        << occ.uncovered << '\n';
    const bool pass = cyc.uncovered == 0 && occ.uncovered == 0 && !support_points.empty() &&
                      cyc.max_deviation < 5e-3 && occ.max_deviation < 5e-3;
    return {8, pass, true, "cycle " + num(cyc.max_deviation) + ", occupation " + num(occ.max_deviation)};
}

Criterion Verifier::disjointness() {
    const SuiteRun& ml = suite("may_leonard");
    const CellPatch& upper = ml_cell();
    const CellPatch lower = build_cell(ml.setup.backward(50.0), CellTarget::plus_infinity(), CellSide::Lower,
                                       upper.plane, upper.grid, upper.tol);
    const CellSeparation sep = cells_disjoint(upper, lower);
    auto cs = artifact(out_ / "cells", "may_leonard_lower_plus_infinity.csv");
    write_cell_csv(cs, lower);
    auto os = artifact(out_ / "cells", "may_leonard_separation.txt");
    os << "shared " << sep.shared << " min_separation " << sep.min_separation << " pass " << (sep.pass ? 1 : 0)
       << '\n';
    return {9, sep.comparable && sep.pass, false,
            "min separation " + num(sep.min_separation) + " over " + std::to_string(sep.shared) +
                " shared nodes (threshold " + num(2.0 * (upper.tol + lower.tol)) + ")"};
}

Criterion Verifier::ip_sets() {
    const SuiteRun& lv = suite("lv_cycle");
    const double theta = 0.05 * lv.setup.attractor_diameter();
    const auto z = periodic_point(lv.analysis);
    const auto e = interior_equilibrium(lv.setup);
    if (!z || !e) return {10, false, true, "missing equilibrium or periodic witness"};

    struct Witness {
        std::string name;
        Vec z;
        double min_rate;
    };
    const std::vector<Witness> witnesses{{"equilibrium", lv.setup.equilibria[*e].point, 1.0},
                                         {"periodic", z->z, 0.95}};
    bool pass = true;
    std::string detail;
    for (const auto& w : witnesses) {
        IPOptions ipo;
        ipo.seed = cfg_.run.seed;
        const IPSet ip = ip_generate(lv.setup.scenario, w.z, theta, 10, 1e4, integrator_, ipo);
        const IPVerdict v = ip_verify(lv.setup.scenario, w.z, theta, ip.generators, integrator_);
        const RecurrentTimeSet rts = recurrent_times(lv.setup.scenario, w.z, theta, 1e4, 0.01, integrator_);
        const auto trials = a1_trials(lv.setup, rts, cfg_.run.seed, 50);
        const auto found =
            std::count_if(trials.begin(), trials.end(), [](const A1Trial& t) { return t.witness.found; });
        const fs::path dir = out_ / "ipset" / w.name;
        auto rep = artifact(dir, "ip_report.txt");
        write_ip_report(rep, ip, v);
        auto iv = artifact(dir, "intervals.csv");
        write_intervals_csv(iv, rts);
        auto a1 = artifact(dir, "a1.csv");
        write_a1_csv(a1, trials);
        const double rate = static_cast<double>(found) / static_cast<double>(trials.size());
        pass = pass && ip.generators.size() == 10 && v.passed && rate >= w.min_rate;
        detail += (detail.empty() ? "" : ", ") + w.name + " worst " + num(v.worst_error) + " A1 " +
                  std::to_string(found) + "/" + std::to_string(trials.size());
    }
    return {10, pass, true, detail + " (theta " + num(theta) + ")"};
}

Criterion Verifier::entropy() {
    const SuiteRun& lv = suite("lv_cycle");
    const auto z = periodic_point(lv.analysis);
    if (!z) return {11, false, true, "no periodic witness"};
    const std::vector<double> horizons{20.0, 40.0, 80.0}, epsilons{0.05, 0.1};
    const EntropyReport cyc =
        entropy_estimate(lv.setup.scenario, orbit_samples(lv.setup, z->z, 60.0, 200), horizons, epsilons, integrator_);

    const SuiteRun& lin = suite("linear2");
    PointSet base;
    std::mt19937_64 rng(item_seed(cfg_.run.seed, 11));
    while (base.size() < 200) {
        Vec x(2);
        x << 2.0 * unit_uniform(rng) - 1.0, 2.0 * unit_uniform(rng) - 1.0;
        if (x.norm() <= 1.0) base.push_back(0.5 * x);
    }
    const EntropyReport ctl = entropy_estimate(lin.setup.scenario, base, horizons, epsilons, integrator_);
    auto a = artifact(out_ / "entropy", "lv_cycle.csv");
    write_entropy_csv(a, cyc);
    auto b = artifact(out_ / "entropy", "linear2_control.csv");
    write_entropy_csv(b, ctl);
    auto v = artifact(out_ / "entropy", "verdict.txt");
    write_entropy_verdict(v, cyc, 0.05);
    write_entropy_verdict(v, ctl, 0.05);
    return {11, cyc.headline <= 0.05 && ctl.headline == 0.0, true,
            "limit-cycle slope " + num(cyc.headline) + ", control slope " + num(ctl.headline)};
}

int Verifier::run() {
    std::vector<Criterion> results;
    auto attempt = [&](int id, const std::function<Criterion()>& fn) {
        try {
            results.push_back(fn());
        } catch (const std::exception& e) {
            results.push_back({id, false, id != 9, std::string("error: ") + e.what()});
        }
        const auto& c = results.back();
        log_ << "verify: criterion " << c.id << ' ' << (c.pass ? "PASS" : "FAIL") << '\n';
    };
    attempt(1, [&] { return axioms(); });
    attempt(2, [&] { return backward_reversal(); });
    attempt(3, [&] { return census(); });
    run_suite();
    attempt(4, [&] { return localization(); });
    attempt(5, [&] { return intersection(); });
    attempt(6, [&] { return dichotomy(); });
    attempt(7, [&] { return carrying_cell(); });
    attempt(8, [&] { return containment(); });
    attempt(9, [&] { return disjointness(); });
    attempt(10, [&] { return ip_sets(); });
    attempt(11, [&] { return entropy(); });

    auto os = artifact(out_, "summary.txt");
    bool ok = true;
    for (const auto& c : results) {
        os << "criterion " << c.id << ' ' << (c.pass ? "PASS" : "FAIL") << (c.counted ? "" : " informational")
           << ' ' << c.detail << '\n';
        if (c.counted && !c.pass) ok = false;
    }
    return ok ? kExitPass : kExitViolation;
}

}  // namespace

int run_verify(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    Verifier v(cfg, out, log);
    return v.run();
}

}  // namespace birkhoff::run_support
