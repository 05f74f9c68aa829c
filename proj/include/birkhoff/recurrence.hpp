#pragma once

#include "birkhoff/flow.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace birkhoff {

using BoxIndex = std::uint64_t;

/// Uniform grid of 2^depth boxes per axis over `domain`; `active` is sorted.
class BoxCover {
public:
    BoxCover(Box domain, int depth, std::vector<BoxIndex> active);
    static BoxCover full(Box domain, int depth);

    const Box& domain() const { return domain_; }
    int depth() const { return depth_; }
    int dimension() const { return domain_.dimension(); }
    std::uint64_t per_axis() const { return std::uint64_t{1} << depth_; }
    std::uint64_t total_boxes() const;
    const std::vector<BoxIndex>& active() const { return active_; }
    bool empty() const { return active_.empty(); }
    bool is_active(BoxIndex idx) const;

    Vec box_radius() const;
    Vec center(BoxIndex idx) const;
    Box box(BoxIndex idx) const;
    std::vector<std::uint64_t> multi_index(BoxIndex idx) const;
    BoxIndex flat_index(const std::vector<std::uint64_t>& multi) const;

    /// Box at this depth containing x (closed on the upper domain face).
    std::optional<BoxIndex> locate(const Vec& x) const;
    /// True when x lies in the closure of some active box.
    bool covers(const Vec& x, double slack = 0.0) const;

    /// All children of active boxes at depth + levels.
    BoxCover subdivided(int levels = 1) const;
    /// Active set mapped to a coarser depth (parents, deduplicated).
    std::vector<BoxIndex> coarsened(int to_depth) const;
    /// Union bounding box of the active boxes.
    Box hull() const;

private:
    Box domain_;
    int depth_;
    std::vector<BoxIndex> active_;
};

/// `flags` is optional per-active-box integer (0 when omitted).
void write_cover_csv(std::ostream& os, const BoxCover& cover, const std::vector<int>& flags = {});

struct TransitionGraph {
    static constexpr BoxIndex kExit = std::numeric_limits<BoxIndex>::max();

    std::vector<BoxIndex> nodes;                 // = cover.active()
    std::vector<std::vector<BoxIndex>> targets;  // sorted; may end with kExit
    std::vector<double> padding;                 // per node
    double map_time = 1.0;
    int samples_per_box = 0;

    bool has_self_loop(std::size_t node) const;
};

void write_edge_list(std::ostream& os, const TransitionGraph& g);

enum class PaddingMode { Lipschitz, Fixed };

struct BoxMapOptions {
    double map_time = 1.0;
    int samples_per_box = 8;
    PaddingMode padding_mode = PaddingMode::Lipschitz;
    double padding = 0.0;          // Fixed mode: absolute; Lipschitz mode: added floor
    double padding_factor = 1.0;   // multiplies the Lipschitz estimate
    std::uint64_t seed = 1;
    IntegratorConfig integrator;
};

/// Images of corners, center and seeded random points of every active box
/// under Phi_T, each inflated by the box padding. Edges go to every active box
/// hit; images leaving the domain or the active set go to kExit.
TransitionGraph box_map(const BoxCover& cover, const Scenario& s, const BoxMapOptions& opts);

/// Strongly connected components (Tarjan), EXIT excluded; each component
/// lists node positions in ascending order, components ordered by first node.
std::vector<std::vector<std::size_t>> strongly_connected_components(const TransitionGraph& g);

/// Union of nontrivial SCCs (size >= 2 or self-loop), as box indices.
std::vector<BoxIndex> chain_recurrent(const TransitionGraph& g);

struct SubdivisionLog {
    int depth = 0;
    std::size_t boxes_in = 0;
    std::size_t survivors = 0;
};

struct SubdivisionResult {
    BoxCover cover;
    TransitionGraph graph;   // graph at the final depth
    std::vector<SubdivisionLog> log;
    bool emptied = false;
};

/// Alternates subdivision and chain-recurrent pruning through the depth
/// schedule, starting from the full cover at the first depth (or `initial`).
SubdivisionResult subdivide_iterate(const Scenario& s, const Box& domain, const std::vector<int>& depth_schedule,
                                    const BoxMapOptions& opts, const std::vector<BoxIndex>* initial = nullptr);

struct SpatialComponent {
    std::vector<BoxIndex> boxes;
    PointSet centers;
};

/// Face-adjacency clusters of active boxes, ordered by smallest index.
std::vector<SpatialComponent> spatial_components(const BoxCover& cover);

struct CloseReturn {
    Vec z;
    double t = 0.0;
    double error = 0.0;
};

struct CloseReturnOptions {
    double t_min = 0.1;
    double dt = 0.01;
    int refine_iterations = 25;
    double max_shift = -1.0;   // bound on |z - x0|; negative means theta
    int candidates = 4;        // local minima handed to the refinement
};

/// Scans |Phi_t(x0) - x0| on [max(t_lo, t_min), t_hi], then refines the best
/// local minima by Gauss-Newton on Phi_t(z) - z = 0 over (z, t).
std::optional<CloseReturn> refine_close_return(const Scenario& s, const Vec& x0, double t_lo, double t_hi,
                                               double theta, const IntegratorConfig& cfg = {},
                                               const CloseReturnOptions& opts = {});

struct RecurrentTimeSet {
    Vec z;
    double theta = 0.0;
    double horizon = 0.0;
    std::vector<std::pair<double, double>> intervals;
    bool truncated = false;   // integration stopped before the horizon

    bool contains(double t) const;
};

/// Sub-theta intervals of t -> |Phi_t(z) - z| on (0, horizon], sampled at dt,
/// endpoints sharpened by bisection to dt/100.
RecurrentTimeSet recurrent_times(const Scenario& s, const Vec& z, double theta, double horizon, double dt,
                                 const IntegratorConfig& cfg = {});

void write_intervals_csv(std::ostream& os, const RecurrentTimeSet& rts);

struct A1Witness {
    bool found = false;     // false: NotFoundWithinHorizon
    long n = 0;
    double t = 0.0;         // s = n*tau + t, |t| < eps
    double s = 0.0;
    double error = 0.0;     // |Phi_s(z) - z| re-measured
};

/// First n >= 1 with n*tau <= horizon such that (n*tau - eps, n*tau + eps)
/// meets N(z, theta); every witness is re-validated by a direct flow map.
A1Witness verify_A1(const Scenario& s, const RecurrentTimeSet& rts, double tau, double eps,
                    const IntegratorConfig& cfg = {});

struct IPSet {
    Vec z;
    double theta = 0.0;
    std::vector<double> generators;
    std::vector<double> moduli;
    double worst_error = 0.0;
    bool truncated = false;
    std::string note;
};

struct IPOptions {
    double min_generator_time = 1.0;
    double scan_dt = 0.01;
    int perturbations = 12;
    double safety = 0.9;        // perturbed sums must stay below safety * theta
    std::uint64_t seed = 1;
};

/// Subset sums of the generators, ascending, with each sum's mask.
std::vector<std::pair<double, std::uint32_t>> subset_sums(const std::vector<double>& generators);

IPSet ip_generate(const Scenario& s, const Vec& z, double theta, int k, double horizon, const IntegratorConfig& cfg = {},
                  const IPOptions& opts = {});

struct IPVerdict {
    double worst_error = 0.0;
    double worst_sum = 0.0;
    bool passed = false;
    bool escaped = false;
};

IPVerdict ip_verify(const Scenario& s, const Vec& z, double theta, const std::vector<double>& generators,
                    const IntegratorConfig& cfg = {});

void write_ip_report(std::ostream& os, const IPSet& ip, const IPVerdict& verdict);

/// Boxes of the depth-`depth` grid over `domain` visited by the tail
/// [burn_in, T] of the orbit of x0 with frequency above 1e-4. When
/// `support_samples` is given it receives the tail samples in those boxes.
BoxCover occupation_support(const Scenario& s, const Vec& x0, double T, double burn_in, const Box& domain, int depth,
                            double dt = 0.01, const IntegratorConfig& cfg = {}, PointSet* support_samples = nullptr);

}  // namespace birkhoff
