#include "birkhoff/pipeline.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace birkhoff {

BackwardContext Setup::backward(double t_max) const {
    return BackwardContext{scenario, cone, equilibria, bounds, integrator, AlphaOptions{}, t_max};
}

Setup prepare(const Scenario& s, const ConeSpec& cone, std::uint64_t seed, const IntegratorConfig& cfg) {
    if (cone.dimension() != s.dimension()) throw std::invalid_argument("prepare: cone and scenario dimensions differ");
    cfg.validate();
    auto equilibria = find_equilibria(s, default_equilibrium_seeds(s));
    auto bounds = attractor_bounds(s, cone, 64, 50.0, seed, cfg);
    return Setup{s, cone, cfg, std::move(equilibria), std::move(bounds)};
}

RecurrenceAnalysis analyze_recurrence(const Setup& setup, const RecurrenceOptions& opts) {
    const Scenario& s = setup.scenario;
    RecurrenceAnalysis out{subdivide_iterate(s, s.valid_domain(), opts.depths, opts.map), {}, {}, 0.0};
    const BoxCover& cover = out.subdivision.cover;
    out.resolution = 2.0 * cover.box_radius().norm();
    if (cover.empty()) return out;
    out.spatial = spatial_components(cover);

    const BackwardContext ctx = setup.backward(opts.backward_time);
    for (const auto& comp : out.spatial) {
        ComponentRecord rec;
        rec.boxes = comp.boxes;
        rec.representatives = comp.centers;
        rec.certified = certify_component(s, comp, cover, setup.equilibria, opts.certify, setup.integrator);
        const PointSet pts = rec.certified_points();
        if (pts.empty()) {
            rec.verdict.tag = VerdictTag::Inconclusive;
            rec.verdict.detail = "no certified recurrent point";
        } else {
            rec.verdict = classify_component(setup.cone, pts, setup.equilibria, out.resolution, opts.margin);
        }
        const bool eligible =
            rec.verdict.tag == VerdictTag::Unordered || rec.verdict.tag == VerdictTag::SingletonTrivial;
        if (opts.targets && eligible) {
            rec.targets = target_equilibrium_for_component(ctx, pts);
            PointSet samples;
            const std::size_t picks = std::min<std::size_t>(5, pts.size());
            for (std::size_t k = 0; k < picks; ++k) samples.push_back(pts[k * pts.size() / picks]);
            rec.evidence = classify_B1_B2(ctx, samples, s.valid_domain().diameter());
        }
        out.records.push_back(std::move(rec));
    }
    return out;
}

std::size_t AuditSummary::violations() const {
    std::size_t n = intersection.violations.size() + connecting.violations.size() + absorbing.violations.size() +
                    omega.violations.size() + verdict_violations;
    for (const auto& l : limit_sets) n += l.relation == LimitSetRelation::Violation ? 1 : 0;
    return n;
}

namespace {

void merge(AuditReport& into, const AuditReport& from, std::size_t offset_i) {
    for (auto f : from.violations) {
        f.i += offset_i;
        into.violations.push_back(f);
    }
    for (auto f : from.warnings) {
        f.i += offset_i;
        into.warnings.push_back(f);
    }
    into.min_margin = std::min(into.min_margin, from.min_margin);
    into.checked += from.checked;
}

}  // namespace

AuditSummary audit_components(const Setup& setup, const RecurrenceAnalysis& analysis, const RecurrenceOptions& opts) {
    AuditSummary a;
    const double res = analysis.resolution;
    PointSet pooled;
    std::vector<std::size_t> owner;
    std::vector<Vec> anchors;
    for (std::size_t c = 0; c < analysis.records.size(); ++c) {
        const auto& rec = analysis.records[c];
        if (rec.verdict.tag == VerdictTag::Violation) ++a.verdict_violations;
        if (rec.verdict.tag == VerdictTag::Inconclusive) ++a.inconclusive;
        for (const auto& cr : rec.certified) {
            pooled.push_back(cr.z);
            owner.push_back(c);
        }
        if (!rec.certified.empty()) anchors.push_back(rec.certified.front().z);
    }
    a.intersection = intersection_principle_audit(setup.cone, pooled, &analysis.subdivision.cover, opts.shell,
                                                  2.0 * res, res);

    for (std::size_t c = 0; c < analysis.records.size(); ++c) {
        const PointSet mine = analysis.records[c].certified_points();
        if (mine.empty()) continue;
        PointSet others;
        for (std::size_t i = 0; i < pooled.size(); ++i) {
            if (owner[i] != c) others.push_back(pooled[i]);
        }
        merge(a.connecting, connecting_consistency(setup.cone, mine, others, opts.shell, res), 0);
        merge(a.absorbing, absorbing_audit(setup.cone, mine, setup.equilibria, opts.shell, res), 0);
    }

    for (std::size_t i = 0; i < anchors.size(); ++i) {
        for (std::size_t j = 0; j < anchors.size(); ++j) {
            if (i == j) continue;
            merge(a.omega,
                  omega_boundary_audit(setup.cone, setup.scenario, anchors[i], anchors[j], opts.tail_time, opts.shell,
                                       res, setup.integrator, opts.tail_samples),
                  i);
            if (j > i) {
                a.limit_sets.push_back(limit_set_dichotomy(setup.cone, setup.scenario, anchors[i], anchors[j],
                                                           opts.tail_time, opts.shell, res, setup.integrator,
                                                           opts.tail_samples));
            }
        }
    }
    return a;
}

void write_audit_summary(std::ostream& os, const AuditSummary& a) {
    write_audit(os, "intersection", a.intersection);
    write_audit(os, "connecting", a.connecting);
    write_audit(os, "absorbing", a.absorbing);
    write_audit(os, "omega_boundary", a.omega);
    std::size_t counts[4] = {0, 0, 0, 0};
    for (const auto& l : a.limit_sets) ++counts[static_cast<int>(l.relation)];
    os << "limit_sets ApproxRelated " << counts[0] << " UnorderedUnion " << counts[1] << " Violation " << counts[2]
       << " Inconclusive " << counts[3] << '\n';
    os << "verdict_violations " << a.verdict_violations << " inconclusive_components " << a.inconclusive << '\n';
    os << "total_violations " << a.violations() << '\n';
}

void write_equilibria_csv(std::ostream& os, const std::vector<EquilibriumRecord>& eq) {
    os.precision(17);
    if (eq.empty()) {
        os << "index,stability,residual\n";
        return;
    }
    os << "index";
    for (int i = 0; i < eq.front().point.size(); ++i) os << ",x" << i + 1;
    os << ",stability,residual\n";
    for (std::size_t k = 0; k < eq.size(); ++k) {
        os << k;
        for (int i = 0; i < eq[k].point.size(); ++i) os << ',' << eq[k].point[i];
        os << ',' << to_string(eq[k].stability) << ',' << eq[k].residual << '\n';
    }
}

std::vector<SuiteEntry> scenario_suite(std::uint64_t seed) {
    auto entry = [&](std::string label, Scenario s, std::vector<int> depths, double map_time) {
        RecurrenceOptions o;
        o.depths = std::move(depths);
        o.map.map_time = map_time;
        o.map.seed = seed;
        return SuiteEntry{std::move(label), std::move(s), std::move(o)};
    };
    std::vector<SuiteEntry> suite;
    suite.push_back(entry("linear2", make_scenario("linear2", {}), {4, 5, 6, 7, 8}, 2.0));
    suite.push_back(entry("bistable2", make_scenario("bistable", {}), {4, 5, 6, 7, 8}, 1.0));
    suite.push_back(entry("bistable3", make_scenario("bistable", {{"n", 3.0}}), {3, 4, 5, 6}, 1.0));
    suite.push_back(entry("may_leonard", make_scenario("may_leonard", {}), {3, 4, 5, 6}, 1.0));
    suite.push_back(entry("lv_cycle", make_scenario("lv_cycle", {}), {3, 4, 5, 6}, 1.0));
    return suite;
}

}  // namespace birkhoff
