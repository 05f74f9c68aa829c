#include "birkhoff/runner.hpp"

#include "birkhoff/entropy.hpp"
#include "birkhoff/parallel.hpp"
#include "birkhoff/pipeline.hpp"
#include "run_support.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <stdexcept>

namespace birkhoff {

namespace run_support {

IntegratorConfig integrator_of(const RunConfig& cfg) {
    IntegratorConfig ic;
    ic.rel_tol = cfg.pipeline.rel_tol;
    ic.abs_tol = cfg.pipeline.abs_tol;
    return ic;
}

RecurrenceOptions recurrence_options(const RunConfig& cfg) {
    const auto& p = cfg.pipeline;
    RecurrenceOptions o;
    o.depths = p.depths;
    o.map.map_time = p.map_time;
    o.map.samples_per_box = p.samples_per_box;
    o.map.padding_mode = p.padding_mode == "fixed" ? PaddingMode::Fixed : PaddingMode::Lipschitz;
    o.map.padding = p.padding;
    o.map.padding_factor = p.padding_factor;
    o.map.seed = cfg.run.seed;
    o.map.integrator = integrator_of(cfg);
    o.certify.window = p.window;
    o.margin = p.margin;
    o.shell = p.shell;
    o.backward_time = p.backward_time;
    return o;
}

Setup setup_of(const RunConfig& cfg) {
    Scenario s = build_scenario(cfg);
    ConeSpec cone = build_cone(cfg, s.dimension());
    return prepare(s, cone, cfg.run.seed, integrator_of(cfg));
}

std::ofstream artifact(const std::filesystem::path& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    std::ofstream os(dir / name);
    if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
    os.precision(17);
    return os;
}

Hyperplane cell_plane(const Setup& setup) {
    return Hyperplane::orthogonal_to(setup.cone.interior_direction(), setup.scenario.valid_domain().center());
}

GridSpec grid_around(const Hyperplane& plane, const PointSet& points, double inflate, int nodes) {
    if (points.empty()) throw std::invalid_argument("grid_around: no points");
    Vec lo = plane.coords(points.front());
    Vec hi = lo;
    for (const Vec& x : points) {
        const Vec g = plane.coords(x);
        lo = lo.cwiseMin(g);
        hi = hi.cwiseMax(g);
    }
    const int dims = static_cast<int>(lo.size());
    return GridSpec{0.5 * (lo + hi), 0.5 * inflate * (hi - lo), std::vector<int>(dims, nodes)};
}

std::optional<std::size_t> interior_equilibrium(const Setup& setup) {
    const Box& d = setup.scenario.valid_domain();
    std::optional<std::size_t> found;
    for (std::size_t i = 0; i < setup.equilibria.size(); ++i) {
        const Vec& p = setup.equilibria[i].point;
        if ((p - d.lo).minCoeff() > 0.0 && (d.hi - p).minCoeff() > 0.0) {
            if (found) return std::nullopt;
            found = i;
        }
    }
    return found;
}

std::optional<AttractorWitness> attractor_witness(const Setup& setup, double window, double theta) {
    const FlowResult settled = flow_map(setup.scenario, setup.scenario.valid_domain().center(), 500.0,
                                        setup.integrator);
    if (!settled.ok()) return std::nullopt;
    if (const auto e = nearest_equilibrium(setup.equilibria, settled.state, 1e-4)) {
        return AttractorWitness{setup.equilibria[*e].point, 0.0, e};
    }
    const auto cr = refine_close_return(setup.scenario, settled.state, 1.0, window, theta, setup.integrator);
    if (!cr || !(cr->error < 1e-6)) return std::nullopt;
    return AttractorWitness{cr->z, cr->t, std::nullopt};
}

PointSet orbit_samples(const Setup& setup, const Vec& z, double period, int count) {
    const Trajectory tr = sample_trajectory(setup.scenario, z, period, period / count, setup.integrator);
    if (tr.status != TerminalStatus::Completed) throw std::runtime_error("orbit_samples: orbit escaped");
    return PointSet(tr.states.begin(), tr.states.begin() + std::min<std::size_t>(count, tr.states.size()));
}

std::optional<CloseReturn> periodic_point(const RecurrenceAnalysis& analysis, std::size_t* component) {
    std::optional<CloseReturn> best;
    std::size_t best_count = 0;
    for (std::size_t c = 0; c < analysis.records.size(); ++c) {
        std::size_t periodic = 0;
        const CloseReturn* first = nullptr;
        for (const auto& cr : analysis.records[c].certified) {
            if (cr.t <= 0.0) continue;
            ++periodic;
            if (!first) first = &cr;
        }
        if (first && periodic > best_count) {
            best = *first;
            best_count = periodic;
            if (component) *component = c;
        }
    }
    return best;
}

double ip_theta(const RunConfig& cfg, const Setup& setup) {
    return cfg.pipeline.theta > 0.0 ? cfg.pipeline.theta : 0.05 * setup.attractor_diameter();
}

std::vector<A1Trial> a1_trials(const Setup& setup, const RecurrentTimeSet& rts, std::uint64_t seed, int count) {
    return parallel_map<A1Trial>(static_cast<std::size_t>(count), [&](std::size_t k) {
        std::mt19937_64 rng(item_seed(seed, k));
        A1Trial t;
        t.tau = 0.5 + 49.5 * unit_uniform(rng);
        t.eps = t.tau * (0.01 + 0.09 * unit_uniform(rng));
        t.witness = verify_A1(setup.scenario, rts, t.tau, t.eps, setup.integrator);
        return t;
    });
}

void write_a1_csv(std::ostream& os, const std::vector<A1Trial>& trials) {
    os << "trial,tau,eps,status,n,t,s,error\n";
    for (std::size_t k = 0; k < trials.size(); ++k) {
        const auto& t = trials[k];
        os << k << ',' << t.tau << ',' << t.eps << ',' << (t.witness.found ? "Found" : "NotFoundWithinHorizon") << ','
           << t.witness.n << ',' << t.witness.t << ',' << t.witness.s << ',' << t.witness.error << '\n';
    }
}

}  // namespace run_support

namespace {

using namespace run_support;
namespace fs = std::filesystem;

void write_subdivision_log(std::ostream& os, const SubdivisionResult& r) {
    os << "depth,boxes_in,survivors\n";
    for (const auto& l : r.log) os << l.depth << ',' << l.boxes_in << ',' << l.survivors << '\n';
}

std::vector<int> component_flags(const RecurrenceAnalysis& a) {
    const auto& active = a.subdivision.cover.active();
    std::vector<int> flags(active.size(), -1);
    for (std::size_t c = 0; c < a.spatial.size(); ++c) {
        for (BoxIndex b : a.spatial[c].boxes) {
            const auto it = std::lower_bound(active.begin(), active.end(), b);
            flags[static_cast<std::size_t>(it - active.begin())] = static_cast<int>(c);
        }
    }
    return flags;
}

void write_recurrence(const fs::path& out, const Setup& setup, const RecurrenceAnalysis& a) {
    auto eq = artifact(out, "equilibria.csv");
    write_equilibria_csv(eq, setup.equilibria);
    auto cover = artifact(out, "cover.csv");
    write_cover_csv(cover, a.subdivision.cover, component_flags(a));
    auto edges = artifact(out, "edges.txt");
    write_edge_list(edges, a.subdivision.graph);
    auto sub = artifact(out, "subdivision.csv");
    write_subdivision_log(sub, a.subdivision);
    auto comps = artifact(out, "components.txt");
    comps << "components " << a.records.size() << " resolution " << a.resolution << '\n';
    for (std::size_t i = 0; i < a.records.size(); ++i) write_component_report(comps, i, a.records[i], setup.equilibria);
}

int cmd_recurrent(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    const Setup setup = setup_of(cfg);
    RecurrenceOptions opts = recurrence_options(cfg);
    opts.targets = false;
    const RecurrenceAnalysis a = analyze_recurrence(setup, opts);
    write_recurrence(out, setup, a);
    log << "recurrent: " << a.subdivision.cover.active().size() << " boxes in " << a.records.size()
        << " components\n";
    return kExitPass;
}

int cmd_classify(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    const Setup setup = setup_of(cfg);
    const RecurrenceOptions opts = recurrence_options(cfg);
    const RecurrenceAnalysis a = analyze_recurrence(setup, opts);
    write_recurrence(out, setup, a);
    const AuditSummary audits = audit_components(setup, a, opts);
    auto os = artifact(out, "audits.txt");
    write_audit_summary(os, audits);
    log << "classify: " << a.records.size() << " components, " << audits.violations() << " violations\n";
    return audits.violations() == 0 ? kExitPass : kExitViolation;
}

CellTarget resolve_target(const Setup& setup, const std::string& name, const std::vector<double>& point) {
    const int n = setup.scenario.dimension();
    if (name == "plus_infinity") return CellTarget::plus_infinity();
    if (name == "minus_infinity") return CellTarget::minus_infinity();
    if (name == "origin") {
        const auto e = nearest_equilibrium(setup.equilibria, Vec::Zero(n), 1e-6);
        if (!e) throw ConfigError("config: cell target origin is not an equilibrium of " + setup.scenario.name());
        return CellTarget::at(*e);
    }
    if (static_cast<int>(point.size()) != n) throw ConfigError("config: cell_point must have one entry per dimension");
    const Vec x = Eigen::Map<const Vec>(point.data(), n);
    const auto e = nearest_equilibrium(setup.equilibria, x, std::numeric_limits<double>::infinity());
    if (!e) throw ConfigError("config: no equilibrium found for cell_target nearest");
    return CellTarget::at(*e);
}

CellSide side_of(const std::string& s) { return s == "upper" ? CellSide::Upper : CellSide::Lower; }

GridSpec configured_grid(const RunConfig& cfg, int dimension) {
    const auto& p = cfg.pipeline;
    if (static_cast<int>(p.cell_nodes.size()) != dimension - 1) {
        throw ConfigError("config: cell grid needs " + std::to_string(dimension - 1) + " axes");
    }
    return GridSpec{Eigen::Map<const Vec>(p.cell_center.data(), p.cell_center.size()),
                    Eigen::Map<const Vec>(p.cell_half_width.data(), p.cell_half_width.size()), p.cell_nodes};
}

bool cell_ok(const CellPatch& cell, const CellAudit& a) {
    return cell.usable && a.applicable && a.unorder_margin > 0.0 && a.invariance_error < 10.0 * cell.tol &&
           a.closure_ok;
}

int cmd_cells(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    const Setup setup = setup_of(cfg);
    const auto& p = cfg.pipeline;
    const GridSpec grid = configured_grid(cfg, setup.scenario.dimension());
    const CellTarget target = resolve_target(setup, p.cell_target, p.cell_point);
    std::optional<CellTarget> other;
    if (p.compare_target != "none") other = resolve_target(setup, p.compare_target, p.cell_point);

    const BackwardContext ctx = setup.backward(p.backward_time);
    const Hyperplane plane = cell_plane(setup);
    const CellPatch cell = build_cell(ctx, target, side_of(p.cell_side), plane, grid, p.cell_tol);
    const CellAudit audit = cell_audit(cell, ctx, p.cell_flow_time);
    auto csv = artifact(out, "cell.csv");
    write_cell_csv(csv, cell);
    auto au = artifact(out, "cell_audit.txt");
    au << "usable " << (cell.usable ? 1 : 0) << " defined " << cell.defined() << '\n';
    write_cell_audit(au, audit);
    bool ok = cell_ok(cell, audit);

    if (other) {
        const CellPatch cmp = build_cell(ctx, *other, side_of(p.compare_side), plane, grid, p.cell_tol);
        auto ccsv = artifact(out, "compare.csv");
        write_cell_csv(ccsv, cmp);
        const CellSeparation sep = cells_disjoint(cell, cmp);
        const bool same_side = p.cell_side == p.compare_side;
        auto ss = artifact(out, "separation.txt");
        ss << "comparable " << (sep.comparable ? 1 : 0) << " shared " << sep.shared << " min_separation "
           << sep.min_separation << " pass " << (sep.pass ? 1 : 0) << " counted " << (same_side ? 1 : 0) << '\n';
        if (same_side && !sep.pass) ok = false;
        log << "cells: separation " << sep.min_separation << (same_side ? "" : " (cross-side, informational)") << '\n';
    }
    log << "cells: " << cell.defined() << '/' << cell.mu.size() << " nodes, unorder_margin " << audit.unorder_margin
        << ", invariance_error " << audit.invariance_error << '\n';
    return ok ? kExitPass : kExitViolation;
}

int cmd_ipset(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    const Setup setup = setup_of(cfg);
    const auto& p = cfg.pipeline;
    const double theta = ip_theta(cfg, setup);
    const auto w = attractor_witness(setup, p.window, theta);
    if (!w) {
        log << "ipset: no certified recurrent point on the attractor\n";
        return kExitViolation;
    }
    IPOptions ipo;
    ipo.seed = cfg.run.seed;
    const IPSet ip = ip_generate(setup.scenario, w->z, theta, p.ip_generators, p.horizon, setup.integrator, ipo);
    const IPVerdict verdict = ip_verify(setup.scenario, w->z, theta, ip.generators, setup.integrator);
    auto rep = artifact(out, "ip_report.txt");
    rep << "witness " << (w->equilibrium ? "equilibrium" : "periodic") << " period " << w->period << '\n';
    write_ip_report(rep, ip, verdict);

    const RecurrentTimeSet rts = recurrent_times(setup.scenario, w->z, theta, p.horizon, 0.01, setup.integrator);
    auto iv = artifact(out, "intervals.csv");
    write_intervals_csv(iv, rts);
    const auto trials = a1_trials(setup, rts, cfg.run.seed, 50);
    auto a1 = artifact(out, "a1.csv");
    write_a1_csv(a1, trials);
    const auto found = std::count_if(trials.begin(), trials.end(), [](const A1Trial& t) { return t.witness.found; });
    log << "ipset: " << ip.generators.size() << " generators, worst error " << verdict.worst_error << " (theta "
        << theta << "), A.1 witnesses " << found << '/' << trials.size() << '\n';
    return verdict.passed ? kExitPass : kExitViolation;
}

int cmd_entropy(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    const Setup setup = setup_of(cfg);
    const auto& p = cfg.pipeline;
    const FlowResult settled = flow_map(setup.scenario, setup.scenario.valid_domain().center(), 500.0,
                                        setup.integrator);
    if (!settled.ok()) throw std::runtime_error("entropy: burn-in orbit escaped");
    const PointSet base = orbit_samples(setup, settled.state, p.window, 200);
    const EntropyReport r = entropy_estimate(setup.scenario, base, p.entropy_horizons, p.entropy_epsilons,
                                             setup.integrator);
    auto csv = artifact(out, "entropy.csv");
    write_entropy_csv(csv, r);
    auto v = artifact(out, "entropy_verdict.txt");
    write_entropy_verdict(v, r, p.entropy_threshold);
    log << "entropy: headline slope " << r.headline << '\n';
    return r.headline <= p.entropy_threshold ? kExitPass : kExitViolation;
}

int cmd_occupation(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    const Setup setup = setup_of(cfg);
    const Box& domain = setup.scenario.valid_domain();
    PointSet samples;
    const BoxCover support = occupation_support(setup.scenario, domain.center(), 1000.0, 200.0, domain,
                                                cfg.pipeline.depths.back(), 0.01, setup.integrator, &samples);
    auto csv = artifact(out, "occupation.csv");
    write_cover_csv(csv, support);
    log << "occupation: " << support.active().size() << " boxes, " << samples.size() << " tail samples\n";
    return kExitPass;
}

using Command = int (*)(const RunConfig&, const fs::path&, std::ostream&);

const std::map<std::string, Command>& commands() {
    static const std::map<std::string, Command> table{
        {"recurrent", cmd_recurrent}, {"classify", cmd_classify}, {"cells", cmd_cells},
        {"ipset", cmd_ipset},         {"entropy", cmd_entropy},   {"occupation", cmd_occupation},
        {"verify", run_verify}};
    return table;
}

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"recurrent", "classify", "cells",  "ipset",
                                                "entropy",   "occupation", "verify"};
    return names;
}

int run(const std::string& subcommand, const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
    const auto it = commands().find(subcommand);
    if (it == commands().end()) {
        log << "error: unknown subcommand '" << subcommand << "'\n";
        return kExitConfig;
    }
    try {
        return it->second(cfg, fs::path(out_dir), log);
    } catch (const ConfigError& e) {
        log << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        log << "error: " << subcommand << ": " << e.what() << '\n';
        return kExitViolation;
    }
}

}  // namespace birkhoff
