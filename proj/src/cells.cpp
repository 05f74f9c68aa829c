#include "birkhoff/cells.hpp"

#include "birkhoff/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace birkhoff {

std::string to_string(CellSide side) { return side == CellSide::Lower ? "Lower" : "Upper"; }

bool basin_member(const BackwardContext& ctx, const Vec& x, CellTarget target, CellSide side) {
    auto decide = [&](double t_max) {
        const BasinLabel label = basin_classify(ctx, x, t_max);
        bool member = false;
        switch (target.kind) {
            case TargetKind::Equilibrium:
                member = label.equilibrium == target.equilibrium &&
                         label.kind == (side == CellSide::Upper ? BasinKind::UpperRepulsion : BasinKind::LowerRepulsion);
                break;
            case TargetKind::PlusInfinity: member = label.kind == BasinKind::LowerOfPlusInfinity; break;
            case TargetKind::MinusInfinity: member = label.kind == BasinKind::UpperOfMinusInfinity; break;
            case TargetKind::Unknown: break;
        }
        const bool undecided =
            label.trace.kind == AlphaKind::Unknown || label.trace.kind == AlphaKind::BoundedNonconvergent;
        return std::make_pair(member, undecided);
    };
    const auto first = decide(ctx.t_max);
    if (!first.second) return first.first;
    return decide(2.0 * ctx.t_max).first;
}

std::size_t GridSpec::node_count() const {
    std::size_t n = 1;
    for (int k : nodes) n *= static_cast<std::size_t>(k);
    return n;
}

std::vector<int> GridSpec::multi_index(std::size_t node) const {
    std::vector<int> m(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        m[k] = static_cast<int>(node % static_cast<std::size_t>(nodes[k]));
        node /= static_cast<std::size_t>(nodes[k]);
    }
    return m;
}

double GridSpec::step(int axis) const {
    return nodes[axis] > 1 ? 2.0 * half_width[axis] / (nodes[axis] - 1) : 0.0;
}

Vec GridSpec::coords(std::size_t node) const {
    const auto m = multi_index(node);
    Vec g = center;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (nodes[k] > 1) g[k] += -half_width[k] + m[k] * step(static_cast<int>(k));
    }
    return g;
}

Hyperplane Hyperplane::orthogonal_to(const Vec& v, const Vec& through) {
    const int n = static_cast<int>(v.size());
    Hyperplane h;
    h.v = v.normalized();
    h.origin = through - through.dot(h.v) * h.v;
    std::vector<Vec> basis;
    for (int i = 0; i < n && static_cast<int>(basis.size()) < n - 1; ++i) {
        Vec e = Vec::Unit(n, i);
        e -= e.dot(h.v) * h.v;
        for (const Vec& b : basis) e -= e.dot(b) * b;
        if (e.norm() > 0.3) basis.push_back(e.normalized());
    }
    h.basis = Mat(n, n - 1);
    for (int k = 0; k < n - 1; ++k) h.basis.col(k) = basis[k];
    return h;
}

std::pair<double, double> domain_bracket(const Hyperplane& h, const Box& domain, const Vec& g) {
    const Vec y = h.origin + h.basis * g;
    double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
    for (int i = 0; i < y.size(); ++i) {
        const double vi = h.v[i];
        if (vi == 0.0) {
            if (y[i] < domain.lo[i] || y[i] > domain.hi[i]) return {1.0, 0.0};
            continue;
        }
        double a = (domain.lo[i] - y[i]) / vi, b = (domain.hi[i] - y[i]) / vi;
        if (a > b) std::swap(a, b);
        lo = std::max(lo, a);
        hi = std::min(hi, b);
    }
    if (!(hi > lo)) return {1.0, 0.0};
    const double shrink = 1e-6 * (hi - lo);
    return {lo + shrink, hi - shrink};
}

std::optional<double> mu_on_ray(const BackwardContext& ctx, const Vec& y, CellTarget target, CellSide side,
                                double mu_lo, double mu_hi, double tol) {
    if (!(mu_hi > mu_lo) || !(tol > 0.0)) return std::nullopt;
    const Vec& v = ctx.cone.interior_direction();
    auto member = [&](double mu) { return basin_member(ctx, y + mu * v, target, side); };
    // Upper cells: members below the boundary; lower cells: members above it.
    const bool upper = side == CellSide::Upper;
    if (member(mu_lo) != upper || member(mu_hi) == upper) return std::nullopt;
    double lo = mu_lo, hi = mu_hi;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (member(mid) == upper) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::optional<std::size_t> CellPatch::node_at(const std::vector<int>& multi) const {
    std::size_t idx = 0, stride = 1;
    for (std::size_t k = 0; k < grid.nodes.size(); ++k) {
        if (multi[k] < 0 || multi[k] >= grid.nodes[k]) return std::nullopt;
        idx += stride * static_cast<std::size_t>(multi[k]);
        stride *= static_cast<std::size_t>(grid.nodes[k]);
    }
    return idx;
}

CellPatch build_cell(const BackwardContext& ctx, CellTarget target, CellSide side, const Hyperplane& plane,
                     const GridSpec& grid, double tol) {
    const int n = ctx.scenario.dimension();
    if (plane.basis.cols() != n - 1 || static_cast<int>(grid.nodes.size()) != n - 1 || grid.center.size() != n - 1 ||
        grid.half_width.size() != n - 1) {
        throw std::invalid_argument("build_cell: grid and hyperplane must have dimension n-1");
    }
    if ((plane.v - ctx.cone.interior_direction()).norm() > 1e-12) {
        throw std::invalid_argument("build_cell: hyperplane normal must be the cone's interior direction");
    }
    for (int k : grid.nodes) {
        if (k < 1) throw std::invalid_argument("build_cell: every grid axis needs at least one node");
    }
    CellPatch cell;
    cell.target = target;
    cell.side = side;
    cell.plane = plane;
    cell.grid = grid;
    cell.tol = tol;
    cell.mu = parallel_map<std::optional<double>>(grid.node_count(), [&](std::size_t node) -> std::optional<double> {
        const Vec g = grid.coords(node);
        const auto [lo, hi] = domain_bracket(plane, ctx.scenario.valid_domain(), g);
        if (!(hi > lo)) return std::nullopt;
        return mu_on_ray(ctx, plane.origin + plane.basis * g, target, side, lo, hi, tol);
    });
    cell.missing = static_cast<std::size_t>(std::count(cell.mu.begin(), cell.mu.end(), std::nullopt));
    cell.usable = 2 * cell.missing <= cell.mu.size();
    return cell;
}

void write_cell_csv(std::ostream& os, const CellPatch& cell) {
    for (std::size_t k = 0; k < cell.grid.nodes.size(); ++k) os << 'g' << k + 1 << ',';
    os << "mu,defined\n";
    os.precision(17);
    for (std::size_t node = 0; node < cell.mu.size(); ++node) {
        const Vec g = cell.grid.coords(node);
        for (int k = 0; k < g.size(); ++k) os << g[k] << ',';
        if (cell.mu[node]) {
            os << *cell.mu[node] << ",1\n";
        } else {
            os << "nan,0\n";
        }
    }
}

CellAudit cell_audit(const CellPatch& cell, const BackwardContext& ctx, double T, std::size_t invariance_nodes) {
    CellAudit a;
    a.missing_skipped = cell.missing;
    a.slope_bound = ctx.cone.unordered_slope_bound();
    std::vector<std::size_t> defined;
    for (std::size_t i = 0; i < cell.mu.size(); ++i) {
        if (cell.mu[i]) defined.push_back(i);
    }
    if (defined.size() < 2) return a;
    a.applicable = true;

    double min_step = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < cell.grid.nodes.size(); ++k) {
        if (cell.grid.nodes[k] > 1) min_step = std::min(min_step, cell.grid.step(static_cast<int>(k)));
    }
    const double skip = std::isfinite(min_step) ? 2.0 * min_step : 0.0;
    PointSet pts, gs;
    for (std::size_t i : defined) {
        pts.push_back(cell.node_point(i));
        gs.push_back(cell.grid.coords(i));
    }
    a.unorder_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            if ((gs[j] - gs[i]).norm() < skip - 1e-12) continue;
            ++a.pairs;
            a.unorder_margin = std::min(a.unorder_margin, signed_k_margin(ctx.cone, pts[j] - pts[i]));
        }
    }
    if (a.pairs == 0) a.unorder_margin = 0.0;

    const std::size_t picks = std::min(invariance_nodes, defined.size());
    const auto errors = parallel_map<std::optional<double>>(2 * picks, [&](std::size_t k) -> std::optional<double> {
        const std::size_t node = defined[(k / 2) * defined.size() / picks];
        const double t = (k % 2 == 0) ? 0.5 * T : T;
        const FlowResult f = flow_map(ctx.scenario, cell.node_point(node), t, ctx.integrator);
        if (!f.ok()) return std::nullopt;
        const Vec g = cell.plane.coords(f.state);
        const auto [lo, hi] = domain_bracket(cell.plane, ctx.scenario.valid_domain(), g);
        if (!(hi > lo)) return std::nullopt;
        const auto mu = mu_on_ray(ctx, cell.plane.origin + cell.plane.basis * g, cell.target, cell.side, lo, hi,
                                  cell.tol);
        if (!mu) return std::nullopt;
        return std::abs(cell.plane.height(f.state) - *mu);
    });
    for (const auto& e : errors) {
        if (!e) {
            ++a.invariance_skipped;
            continue;
        }
        ++a.invariance_samples;
        a.invariance_error = std::max(a.invariance_error, *e);
    }

    for (std::size_t i : defined) {
        auto m = cell.grid.multi_index(i);
        for (std::size_t k = 0; k < m.size(); ++k) {
            auto next = m;
            ++next[k];
            const auto j = cell.node_at(next);
            if (!j || !cell.mu[*j]) continue;
            const double step = cell.grid.step(static_cast<int>(k));
            const double gap = std::abs(*cell.mu[*j] - *cell.mu[i]);
            a.closure_ratio = std::max(a.closure_ratio, gap / step);
            if (gap > a.slope_bound * step + 2.0 * cell.tol) a.closure_ok = false;
        }
    }
    return a;
}

void write_cell_audit(std::ostream& os, const CellAudit& a) {
    os.precision(12);
    os << "applicable " << (a.applicable ? 1 : 0) << '\n';
    os << "unorder_margin " << a.unorder_margin << " pairs " << a.pairs << '\n';
    os << "invariance_error " << a.invariance_error << " samples " << a.invariance_samples << " skipped "
       << a.invariance_skipped << '\n';
    os << "closure_ratio " << a.closure_ratio << " bound " << a.slope_bound << " ok " << (a.closure_ok ? 1 : 0)
       << '\n';
    os << "missing_nodes " << a.missing_skipped << '\n';
}

namespace {

bool same_lattice(const CellPatch& a, const CellPatch& b) {
    auto close = [](const Mat& x, const Mat& y) {
        return x.rows() == y.rows() && x.cols() == y.cols() && (x - y).cwiseAbs().maxCoeff() <= 1e-12;
    };
    return a.grid.nodes == b.grid.nodes && close(a.grid.center, b.grid.center) &&
           close(a.grid.half_width, b.grid.half_width) && close(a.plane.origin, b.plane.origin) &&
           close(a.plane.basis, b.plane.basis) && close(a.plane.v, b.plane.v);
}

}  // namespace

CellSeparation cells_disjoint(const CellPatch& a, const CellPatch& b) {
    CellSeparation out;
    if (!same_lattice(a, b)) return out;
    out.min_separation = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.mu.size(); ++i) {
        if (!a.mu[i] || !b.mu[i]) continue;
        ++out.shared;
        out.min_separation = std::min(out.min_separation, std::abs(*a.mu[i] - *b.mu[i]));
    }
    out.comparable = out.shared > 0;
    if (!out.comparable) {
        out.min_separation = 0.0;
        return out;
    }
    out.pass = out.min_separation > 2.0 * (a.tol + b.tol);
    return out;
}

Containment containment_interpolated(const PointSet& points, const CellPatch& cell) {
    Containment c;
    const std::size_t dims = cell.grid.nodes.size();
    for (const Vec& x : points) {
        const Vec g = cell.plane.coords(x);
        std::vector<int> base(dims);
        std::vector<double> frac(dims, 0.0);
        bool inside = true;
        for (std::size_t k = 0; k < dims && inside; ++k) {
            const int nk = cell.grid.nodes[k];
            if (nk == 1) {
                inside = std::abs(g[k] - cell.grid.center[k]) <= 1e-9;
                continue;
            }
            const double pos = (g[k] - (cell.grid.center[k] - cell.grid.half_width[k])) / cell.grid.step(static_cast<int>(k));
            if (pos < -1e-9 || pos > nk - 1 + 1e-9) {
                inside = false;
                continue;
            }
            base[k] = std::clamp(static_cast<int>(std::floor(pos)), 0, nk - 2);
            frac[k] = std::clamp(pos - base[k], 0.0, 1.0);
        }
        double height = 0.0;
        for (std::size_t corner = 0; inside && corner < (std::size_t{1} << dims); ++corner) {
            std::vector<int> m = base;
            double w = 1.0;
            for (std::size_t k = 0; k < dims; ++k) {
                const bool up = (corner >> k) & 1U;
                if (cell.grid.nodes[k] == 1) {
                    if (up) w = 0.0;
                    continue;
                }
                m[k] += up ? 1 : 0;
                w *= up ? frac[k] : 1.0 - frac[k];
            }
            if (w == 0.0) continue;
            const auto node = cell.node_at(m);
            if (!node || !cell.mu[*node]) {
                inside = false;
                break;
            }
            height += w * *cell.mu[*node];
        }
        if (!inside) {
            ++c.uncovered;
            continue;
        }
        ++c.checked;
        c.max_deviation = std::max(c.max_deviation, std::abs(cell.plane.height(x) - height));
    }
    return c;
}

Containment containment_exact(const PointSet& points, const CellPatch& cell, const BackwardContext& ctx) {
    const auto devs = parallel_map<std::optional<double>>(points.size(), [&](std::size_t i) -> std::optional<double> {
        const Vec g = cell.plane.coords(points[i]);
        const auto [lo, hi] = domain_bracket(cell.plane, ctx.scenario.valid_domain(), g);
        if (!(hi > lo)) return std::nullopt;
        const auto mu = mu_on_ray(ctx, cell.plane.origin + cell.plane.basis * g, cell.target, cell.side, lo, hi,
                                  cell.tol);
        if (!mu) return std::nullopt;
        return std::abs(cell.plane.height(points[i]) - *mu);
    });
    Containment c;
    for (const auto& d : devs) {
        if (!d) {
            ++c.uncovered;
            continue;
        }
        ++c.checked;
        c.max_deviation = std::max(c.max_deviation, *d);
    }
    return c;
}

}  // namespace birkhoff
