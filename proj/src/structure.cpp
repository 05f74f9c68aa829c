#include "birkhoff/structure.hpp"

#include "birkhoff/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace birkhoff {

std::string to_string(VerdictTag tag) {
    switch (tag) {
        case VerdictTag::Unordered: return "Unordered";
        case VerdictTag::StronglyOrderedEquilibria: return "StronglyOrderedEquilibria";
        case VerdictTag::SingletonTrivial: return "SingletonTrivial";
        case VerdictTag::Violation: return "Violation";
        case VerdictTag::Inconclusive: return "Inconclusive";
    }
    return "?";
}

std::string to_string(LimitSetRelation r) {
    switch (r) {
        case LimitSetRelation::ApproxRelated: return "ApproxRelated";
        case LimitSetRelation::UnorderedUnion: return "UnorderedUnion";
        case LimitSetRelation::Violation: return "Violation";
        case LimitSetRelation::Inconclusive: return "Inconclusive";
    }
    return "?";
}

std::string to_string(BasinKind k) {
    switch (k) {
        case BasinKind::LowerRepulsion: return "LowerRepulsion";
        case BasinKind::UpperRepulsion: return "UpperRepulsion";
        case BasinKind::LowerOfPlusInfinity: return "LowerOfPlusInfinity";
        case BasinKind::UpperOfMinusInfinity: return "UpperOfMinusInfinity";
        case BasinKind::Repulsion: return "Repulsion";
        case BasinKind::NotClassified: return "NotClassified";
    }
    return "?";
}

std::string to_string(TargetKind k) {
    switch (k) {
        case TargetKind::Equilibrium: return "Equilibrium";
        case TargetKind::PlusInfinity: return "PlusInfinity";
        case TargetKind::MinusInfinity: return "MinusInfinity";
        case TargetKind::Unknown: return "Unknown";
    }
    return "?";
}

namespace {

// Margin from the joint boundary: the region margin in Int C or Int K, else 0.
double boundary_margin(const OrderRegion& r) { return (r.in_c() || r.in_k()) ? r.margin : 0.0; }

PointSet tail_samples(const Scenario& s, const Vec& x, double T, int samples, const IntegratorConfig& cfg) {
    if (!(T > 0.0) || samples < 1) throw std::invalid_argument("tail sampling needs T > 0 and samples >= 1");
    const double dt = 0.5 * T / samples;
    PointSet out;
    const FlowResult end = integrate_visit(s, x, T, dt, cfg, [&](double t, const Vec& state) {
        if (t >= 0.5 * T - 1e-12 * T) out.push_back(state);
        return true;
    });
    if (!end.ok()) throw std::runtime_error("orbit escaped while sampling its tail: " + to_string(end.status));
    return out;
}

}  // namespace

DichotomyVerdict classify_component(const ConeSpec& cone, const PointSet& points,
                                    const std::vector<EquilibriumRecord>& equilibria, double resolution,
                                    double margin) {
    if (points.empty()) throw std::invalid_argument("classify_component: empty component");
    std::vector<std::size_t> reps;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const bool merged = std::any_of(reps.begin(), reps.end(),
                                        [&](std::size_t r) { return (points[i] - points[r]).norm() <= resolution; });
        if (!merged) reps.push_back(i);
    }
    DichotomyVerdict v;
    if (reps.size() == 1) {
        v.tag = VerdictTag::SingletonTrivial;
        v.detail = "one cluster within resolution";
        return v;
    }

    std::size_t ordered = 0, unordered = 0, marginal = 0;
    double k_margin = std::numeric_limits<double>::infinity();
    std::optional<std::pair<std::size_t, std::size_t>> first_ordered, first_marginal;
    double marginal_margin = 0.0;
    for (std::size_t a = 0; a < reps.size(); ++a) {
        for (std::size_t b = a + 1; b < reps.size(); ++b) {
            const std::size_t i = reps[a], j = reps[b];
            const OrderRegion r = classify_difference(cone, points[j] - points[i]);
            if (r.in_k() && r.margin >= margin) {
                ++unordered;
                k_margin = std::min(k_margin, r.margin);
            } else if (r.in_c() && r.margin >= margin) {
                ++ordered;
                if (!first_ordered) first_ordered = std::make_pair(i, j);
            } else {
                ++marginal;
                if (!first_marginal) {
                    first_marginal = std::make_pair(i, j);
                    marginal_margin = boundary_margin(r);
                }
            }
        }
    }

    if (ordered > 0 && unordered > 0) {
        v.tag = VerdictTag::Violation;
        v.witness = first_ordered;
        v.detail = "ordered pair inside a component that also has unordered pairs";
        return v;
    }
    if (marginal > 0) {
        v.tag = VerdictTag::Inconclusive;
        v.witness = first_marginal;
        v.margin = marginal_margin;
        v.detail = std::to_string(marginal) + " pairs within margin of the joint boundary";
        return v;
    }
    if (ordered == 0) {
        v.tag = VerdictTag::Unordered;
        v.margin = k_margin;
        return v;
    }
    for (std::size_t a = 0; a < reps.size(); ++a) {
        if (!nearest_equilibrium(equilibria, points[reps[a]], resolution)) {
            v.tag = VerdictTag::Violation;
            v.witness = std::make_pair(reps[a], reps[a == 0 ? 1 : 0]);
            v.detail = "non-equilibrium point in an ordered chain";
            return v;
        }
    }
    PointSet chain;
    for (std::size_t r : reps) chain.push_back(points[r]);
    const ChainParameterization cp = order_parameterize(cone, chain);
    if (!cp.strongly_ordered) {
        v.tag = VerdictTag::Inconclusive;
        if (cp.witness) v.witness = std::make_pair(reps[cp.witness->first], reps[cp.witness->second]);
        v.detail = "chain projections not strictly increasing";
        return v;
    }
    v.tag = VerdictTag::StronglyOrderedEquilibria;
    v.chain = cp.projections;
    return v;
}

void write_audit(std::ostream& os, const std::string& name, const AuditReport& r) {
    os.precision(12);
    os << name << " checked " << r.checked << " violations " << r.violations.size() << " warnings "
       << r.warnings.size() << " min_margin " << r.min_margin << '\n';
    for (const auto& f : r.violations) {
        os << name << " violation " << f.kind << ' ' << f.i << ' ' << f.j << " margin " << f.margin << '\n';
    }
    for (const auto& f : r.warnings) {
        os << name << " warning " << f.kind << ' ' << f.i << ' ' << f.j << " margin " << f.margin << '\n';
    }
}

AuditReport intersection_principle_audit(const ConeSpec& cone, const PointSet& certified,
                                         const BoxCover* survivors, double shell, double exclusion,
                                         double skip_within) {
    AuditReport rep;
    for (std::size_t i = 0; i < certified.size(); ++i) {
        for (std::size_t j = i + 1; j < certified.size(); ++j) {
            if (skip_within > 0.0 && (certified[j] - certified[i]).norm() <= skip_within) continue;
            const OrderRegion r = classify_difference(cone, certified[j] - certified[i]);
            const double m = boundary_margin(r);
            ++rep.checked;
            rep.min_margin = std::min(rep.min_margin, m);
            if (m < shell) rep.violations.push_back({to_string(r.tag), i, j, m});
        }
    }
    if (survivors == nullptr) return rep;
    const auto& active = survivors->active();
    for (std::size_t i = 0; i < certified.size(); ++i) {
        const Vec& x = certified[i];
        for (std::size_t j = 0; j < active.size(); ++j) {
            const Vec c = survivors->center(active[j]);
            if ((c - x).norm() <= exclusion || survivors->box(active[j]).contains(x)) continue;
            const OrderRegion r = classify_difference(cone, c - x);
            if (boundary_margin(r) < shell) rep.warnings.push_back({"BoxNearJointBoundary", i, j, boundary_margin(r)});
        }
    }
    return rep;
}

AuditReport omega_boundary_audit(const ConeSpec& cone, const Scenario& s, const Vec& x, const Vec& y, double T,
                                 double shell, double resolution, const IntegratorConfig& cfg, int samples) {
    AuditReport rep;
    const PointSet tail = tail_samples(s, y, T, samples, cfg);
    for (std::size_t j = 0; j < tail.size(); ++j) {
        if ((tail[j] - x).norm() <= resolution) continue;
        const OrderRegion r = classify_difference(cone, tail[j] - x);
        const double m = boundary_margin(r);
        ++rep.checked;
        rep.min_margin = std::min(rep.min_margin, m);
        if (m < shell) rep.violations.push_back({to_string(r.tag), 0, j, m});
    }
    return rep;
}

LimitSetReport limit_set_dichotomy(const ConeSpec& cone, const Scenario& s, const Vec& x, const Vec& y, double T,
                                   double shell, double resolution, const IntegratorConfig& cfg, int samples) {
    const PointSet a = tail_samples(s, x, T, samples, cfg);
    const PointSet b = tail_samples(s, y, T, samples, cfg);
    LimitSetReport rep;
    for (const Vec& p : a) {
        for (const Vec& q : b) {
            if ((q - p).norm() <= resolution) continue;
            const OrderRegion r = classify_difference(cone, q - p);
            const double m = boundary_margin(r);
            rep.min_margin = std::min(rep.min_margin, m);
            if (m < shell) {
                ++rep.marginal_pairs;
            } else if (r.in_c()) {
                ++rep.ordered_pairs;
            } else {
                ++rep.unordered_pairs;
            }
        }
    }
    if (rep.ordered_pairs > 0 && rep.unordered_pairs == 0 && rep.marginal_pairs == 0) {
        rep.relation = LimitSetRelation::ApproxRelated;
        return rep;
    }
    PointSet pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    if (rep.ordered_pairs == 0 && is_unordered_set(cone, pooled, shell, resolution).unordered) {
        rep.relation = LimitSetRelation::UnorderedUnion;
    } else if (rep.ordered_pairs > 0 && rep.unordered_pairs > 0) {
        rep.relation = LimitSetRelation::Violation;
    } else {
        rep.relation = LimitSetRelation::Inconclusive;
    }
    return rep;
}

AuditReport connecting_consistency(const ConeSpec& cone, const PointSet& component, const PointSet& certified,
                                   double margin, double resolution) {
    AuditReport rep;
    if (component.size() < 2) return rep;
    for (std::size_t i = 0; i < certified.size(); ++i) {
        const Vec& x = certified[i];
        if (point_set_distance(x, component) <= resolution) continue;
        ++rep.checked;
        std::optional<std::size_t> strong_c, strong_k, weak_c, weak_k;
        for (std::size_t j = 0; j < component.size(); ++j) {
            const OrderRegion r = classify_difference(cone, component[j] - x);
            const bool strong = r.margin >= margin;
            if (r.in_c()) {
                (strong ? strong_c : weak_c) = j;
            } else if (r.in_k()) {
                (strong ? strong_k : weak_k) = j;
            }
            rep.min_margin = std::min(rep.min_margin, boundary_margin(r));
        }
        if (strong_c && strong_k) {
            rep.violations.push_back({"StraddlesCertifiedPoint", i, *strong_c, 0.0});
        } else if ((strong_c || weak_c) && (strong_k || weak_k)) {
            rep.warnings.push_back({"StraddleWithinMargin", i, strong_c ? *strong_c : *weak_c, 0.0});
        }
    }
    return rep;
}

AuditReport absorbing_audit(const ConeSpec& cone, const PointSet& component,
                            const std::vector<EquilibriumRecord>& equilibria, double margin, double resolution) {
    AuditReport rep;
    for (std::size_t q = 0; q < equilibria.size(); ++q) {
        const Vec& e = equilibria[q].point;
        if (component.empty() || point_set_distance(e, component) <= resolution) continue;
        bool below = false, above = false;
        for (const Vec& x : component) {
            const OrderRelation rel = order_relate(cone, x, e);
            below = below || rel == OrderRelation::Leq || rel == OrderRelation::StrictlyBelow;
            above = above || rel == OrderRelation::Geq || rel == OrderRelation::StrictlyAbove;
        }
        if (!below && !above) continue;
        ++rep.checked;
        if (below && above) {
            rep.min_margin = 0.0;
            rep.violations.push_back({"StraddlesEquilibrium", q, 0, 0.0});
            continue;
        }
        for (std::size_t j = 0; j < component.size(); ++j) {
            const OrderRegion r = classify_difference(cone, e - component[j]);
            const RegionTag want = below ? RegionTag::InteriorCPlus : RegionTag::InteriorCMinus;
            const double m = r.tag == want ? r.margin : 0.0;
            rep.min_margin = std::min(rep.min_margin, m);
            if (m < margin) rep.violations.push_back({below ? "NotBelowEquilibrium" : "NotAboveEquilibrium", q, j, m});
        }
    }
    return rep;
}

BasinLabel basin_classify(const BackwardContext& ctx, const Vec& x, double t_max) {
    BasinLabel label;
    label.trace = alpha_limit_classify(ctx.scenario, ctx.cone, x, t_max, ctx.equilibria, ctx.bounds, ctx.integrator,
                                       ctx.alpha);
    const AlphaResult& a = label.trace;
    switch (a.kind) {
        case AlphaKind::ConvergesTo:
            label.equilibrium = a.equilibrium;
            if (a.above) {
                label.kind = BasinKind::UpperRepulsion;
            } else if (a.below) {
                label.kind = BasinKind::LowerRepulsion;
            } else if ((x - ctx.equilibria[*a.equilibrium].point).norm() > ctx.alpha.capture_radius) {
                label.kind = BasinKind::Repulsion;
            }
            break;
        case AlphaKind::EscapesAboveXStar: label.kind = BasinKind::LowerOfPlusInfinity; break;
        case AlphaKind::EscapesBelowXSup: label.kind = BasinKind::UpperOfMinusInfinity; break;
        default: break;
    }
    return label;
}

ComponentTargets target_equilibrium_for_component(const BackwardContext& ctx, const PointSet& component) {
    if (component.empty()) throw std::invalid_argument("target_equilibrium_for_component: empty component");
    ComponentTargets out;
    auto resolve = [&](const Vec& start, bool upper) {
        Target t;
        t.start = start;
        const AlphaResult a = alpha_limit_classify(ctx.scenario, ctx.cone, start, ctx.t_max, ctx.equilibria,
                                                   ctx.bounds, ctx.integrator, ctx.alpha);
        t.trace = a.kind;
        if (a.kind == AlphaKind::ConvergesTo) {
            t.kind = TargetKind::Equilibrium;
            t.equilibrium = a.equilibrium;
            t.degenerate = (start - ctx.equilibria[*a.equilibrium].point).norm() <= ctx.alpha.capture_radius;
        } else if (upper && a.kind == AlphaKind::EscapesAboveXStar) {
            t.kind = TargetKind::PlusInfinity;
        } else if (!upper && a.kind == AlphaKind::EscapesBelowXSup) {
            t.kind = TargetKind::MinusInfinity;
        }
        return t;
    };
    out.upper = resolve(sup_points(ctx.cone, component), true);
    out.lower = resolve(inf_points(ctx.cone, component), false);

    PointSet dominating;
    for (const auto& e : ctx.equilibria) {
        const bool all_below = std::all_of(component.begin(), component.end(), [&](const Vec& x) {
            return order_relate(ctx.cone, x, e.point) == OrderRelation::StrictlyBelow;
        });
        if (all_below) dominating.push_back(e.point);
    }
    if (!dominating.empty()) {
        out.inf_dominating = inf_points(ctx.cone, dominating);
        out.upper_is_inf_dominating = out.upper.kind == TargetKind::Equilibrium &&
                                      (ctx.equilibria[*out.upper.equilibrium].point - *out.inf_dominating).norm() < 1e-6;
    } else {
        out.upper_is_inf_dominating = out.upper.kind == TargetKind::PlusInfinity;
    }
    return out;
}

std::string B12Evidence::dominant() const {
    if (b1 == 0 && b2 == 0) return "none";
    if (b1 == b2) return "tied";
    return b1 > b2 ? "B1" : "B2";
}

B12Evidence classify_B1_B2(const BackwardContext& ctx, const PointSet& samples, double scale,
                           const std::vector<double>& schedule) {
    enum class Probe { B1, B2, Other, Skipped };
    const Vec& v = ctx.cone.interior_direction();
    const std::size_t count = samples.size() * schedule.size();
    const auto results = parallel_map<Probe>(count, [&](std::size_t k) {
        const Vec& x = samples[k / schedule.size()];
        const Vec z = x + schedule[k % schedule.size()] * scale * v;
        if (!ctx.scenario.valid_domain().contains(z)) return Probe::Skipped;
        const BasinLabel label = basin_classify(ctx, z);
        if (label.kind == BasinKind::LowerOfPlusInfinity) return Probe::B2;
        if (label.equilibrium && label.kind != BasinKind::NotClassified) {
            const OrderRelation rel = order_relate(ctx.cone, x, ctx.equilibria[*label.equilibrium].point);
            if (rel == OrderRelation::Equal || rel == OrderRelation::Leq || rel == OrderRelation::StrictlyBelow) {
                return Probe::B1;
            }
        }
        return Probe::Other;
    });
    B12Evidence ev;
    for (Probe p : results) {
        switch (p) {
            case Probe::B1: ++ev.b1; break;
            case Probe::B2: ++ev.b2; break;
            case Probe::Other: ++ev.not_classified; break;
            case Probe::Skipped: ++ev.skipped; break;
        }
    }
    ev.both = ev.b1 > 0 && ev.b2 > 0;
    return ev;
}

std::vector<CloseReturn> certify_component(const Scenario& s, const SpatialComponent& comp, const BoxCover& cover,
                                           const std::vector<EquilibriumRecord>& equilibria,
                                           const CertifyOptions& opts, const IntegratorConfig& cfg) {
    const double box_diam = 2.0 * cover.box_radius().norm();
    const double scan_theta = opts.scan_theta > 0.0 ? opts.scan_theta : 4.0 * box_diam;
    const double min_extent = opts.min_extent > 0.0 ? opts.min_extent : 4.0 * box_diam;
    std::vector<CloseReturn> out;
    for (const auto& e : equilibria) {
        const auto idx = cover.locate(e.point);
        if (idx && std::binary_search(comp.boxes.begin(), comp.boxes.end(), *idx)) {
            out.push_back({e.point, 0.0, s.field(e.point).norm()});
        }
    }

    double extent = 0.0;
    for (std::size_t i = 0; i < comp.centers.size(); ++i) {
        for (std::size_t j = i + 1; j < comp.centers.size(); ++j) {
            extent = std::max(extent, (comp.centers[i] - comp.centers[j]).norm());
        }
    }
    if (!out.empty() && extent + box_diam <= min_extent) return out;

    const std::size_t probes = std::min(opts.max_probes, comp.centers.size());
    CloseReturnOptions cro;
    cro.t_min = opts.t_min;
    cro.max_shift = scan_theta;
    const auto found = parallel_map<std::optional<CloseReturn>>(probes, [&](std::size_t k) {
        const std::size_t pick = k * comp.centers.size() / probes;
        return refine_close_return(s, comp.centers[pick], opts.t_min, opts.window, scan_theta, cfg, cro);
    });

    PointSet orbit_points;
    for (const auto& f : found) {
        if (!f || !(f->error < opts.tolerance)) continue;
        if (nearest_equilibrium(equilibria, f->z, box_diam)) continue;
        if (!orbit_points.empty() && point_set_distance(f->z, orbit_points) <= box_diam) continue;
        const int m = std::max(1, opts.orbit_samples);
        const Trajectory traj = sample_trajectory(s, f->z, f->t, f->t / m, cfg);
        for (std::size_t i = 0; i < traj.states.size() && static_cast<int>(i) < m; ++i) {
            out.push_back({traj.states[i], f->t, f->error});
            orbit_points.push_back(traj.states[i]);
        }
    }
    return out;
}

PointSet ComponentRecord::certified_points() const {
    PointSet pts;
    for (const auto& c : certified) pts.push_back(c.z);
    return pts;
}

void write_component_report(std::ostream& os, std::size_t index, const ComponentRecord& rec,
                            const std::vector<EquilibriumRecord>& equilibria) {
    os.precision(12);
    os << "component " << index << '\n';
    os << "  boxes " << rec.boxes.size() << '\n';
    os << "  certified " << rec.certified.size() << '\n';
    os << "  verdict " << to_string(rec.verdict.tag) << " margin " << rec.verdict.margin << '\n';
    if (rec.verdict.witness) os << "  witness " << rec.verdict.witness->first << ' ' << rec.verdict.witness->second << '\n';
    if (!rec.verdict.detail.empty()) os << "  detail " << rec.verdict.detail << '\n';
    auto target_line = [&](const char* name, const Target& t) {
        os << "  " << name << ' ' << to_string(t.kind);
        if (t.equilibrium) {
            os << " equilibrium " << *t.equilibrium << " at";
            const Vec& p = equilibria[*t.equilibrium].point;
            for (int i = 0; i < p.size(); ++i) os << ' ' << p[i];
        }
        if (t.degenerate) os << " degenerate";
        os << '\n';
    };
    if (rec.targets) {
        target_line("target_q", rec.targets->upper);
        target_line("target_p", rec.targets->lower);
        if (rec.targets->upper_is_inf_dominating) {
            os << "  q_equals_inf_EB " << (*rec.targets->upper_is_inf_dominating ? 1 : 0) << '\n';
        }
    }
    if (rec.evidence) {
        os << "  b1 " << rec.evidence->b1 << " b2 " << rec.evidence->b2 << " not_classified "
           << rec.evidence->not_classified << " skipped " << rec.evidence->skipped << " dominant "
           << rec.evidence->dominant() << (rec.evidence->both ? " both_present" : "") << '\n';
    }
}

}  // namespace birkhoff
