#pragma once

#include "birkhoff/structure.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace birkhoff {

/// Lower: boundary of a lower-repulsion basin, mu_y = inf of membership.
/// Upper: boundary of an upper-repulsion basin, mu_y = sup of membership.
enum class CellSide { Lower, Upper };

std::string to_string(CellSide side);

struct CellTarget {
    TargetKind kind = TargetKind::Equilibrium;   // Equilibrium, PlusInfinity or MinusInfinity
    std::size_t equilibrium = 0;

    static CellTarget at(std::size_t index) { return {TargetKind::Equilibrium, index}; }
    static CellTarget plus_infinity() { return {TargetKind::PlusInfinity, 0}; }
    static CellTarget minus_infinity() { return {TargetKind::MinusInfinity, 0}; }
};

/// Membership of x in the basin a cell bounds; undecided backward orbits are
/// retried once with twice the horizon.
bool basin_member(const BackwardContext& ctx, const Vec& x, CellTarget target, CellSide side);

/// Rectangular lattice in hyperplane coordinates: nodes[k] points on axis k.
struct GridSpec {
    Vec center;
    Vec half_width;
    std::vector<int> nodes;

    std::size_t node_count() const;
    Vec coords(std::size_t node) const;
    std::vector<int> multi_index(std::size_t node) const;
    double step(int axis) const;
};

/// H = {origin + basis * g}, with basis orthonormal and orthogonal to v.
struct Hyperplane {
    Vec origin;
    Mat basis;
    Vec v;

    /// Through the projection of `through` off v, spanned by Gram-Schmidt on the unit axes.
    static Hyperplane orthogonal_to(const Vec& v, const Vec& through);

    Vec point(const Vec& g, double mu) const { return origin + basis * g + mu * v; }
    double height(const Vec& x) const { return (x - origin).dot(v); }
    Vec coords(const Vec& x) const { return basis.transpose() * (x - origin); }
};

/// Interval of mu with origin + basis*g + mu*v inside `domain`, shrunk by a
/// relative 1e-6 at both ends; empty when lo >= hi.
std::pair<double, double> domain_bracket(const Hyperplane& h, const Box& domain, const Vec& g);

/// Bisection for the membership transition along y + mu v on [mu_lo, mu_hi]
/// to width tol. nullopt when the bracket does not straddle the boundary.
std::optional<double> mu_on_ray(const BackwardContext& ctx, const Vec& y, CellTarget target, CellSide side,
                                double mu_lo, double mu_hi, double tol);

struct CellPatch {
    CellTarget target;
    CellSide side = CellSide::Upper;
    Hyperplane plane;
    GridSpec grid;
    std::vector<std::optional<double>> mu;
    double tol = 1e-4;
    std::size_t missing = 0;
    bool usable = true;

    std::size_t defined() const { return mu.size() - missing; }
    Vec node_point(std::size_t node) const { return plane.point(grid.coords(node), *mu[node]); }
    std::optional<std::size_t> node_at(const std::vector<int>& multi) const;
};

CellPatch build_cell(const BackwardContext& ctx, CellTarget target, CellSide side, const Hyperplane& plane,
                     const GridSpec& grid, double tol);

void write_cell_csv(std::ostream& os, const CellPatch& cell);

struct CellAudit {
    bool applicable = false;
    double unorder_margin = 0.0;
    std::size_t pairs = 0;
    double invariance_error = 0.0;
    std::size_t invariance_samples = 0;
    std::size_t invariance_skipped = 0;
    double closure_ratio = 0.0;    // worst adjacent |dmu| / step
    double slope_bound = 0.0;
    bool closure_ok = true;
    std::size_t missing_skipped = 0;
};

/// Unorderedness over node pairs at least two grid steps apart, invariance
/// by re-bisection at the projections of Phi_t(u) for t in {T/2, T}, and
/// adjacent-node slopes against the cone's unordered-graph bound.
CellAudit cell_audit(const CellPatch& cell, const BackwardContext& ctx, double T, std::size_t invariance_nodes = 25);

void write_cell_audit(std::ostream& os, const CellAudit& a);

struct CellSeparation {
    bool comparable = false;
    std::size_t shared = 0;
    double min_separation = 0.0;
    bool pass = false;   // min_separation > 2 (tolA + tolB)
};

CellSeparation cells_disjoint(const CellPatch& a, const CellPatch& b);

struct Containment {
    double max_deviation = 0.0;
    std::size_t checked = 0;
    std::size_t uncovered = 0;
};

/// Multilinear interpolation of the cell height at each point's projection.
Containment containment_interpolated(const PointSet& points, const CellPatch& cell);

/// Heights re-bisected at each point's projection with the cell's tolerance.
Containment containment_exact(const PointSet& points, const CellPatch& cell, const BackwardContext& ctx);

}  // namespace birkhoff
