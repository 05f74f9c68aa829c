#pragma once

#include "birkhoff/equilibria.hpp"
#include "birkhoff/order_geometry.hpp"
#include "birkhoff/recurrence.hpp"

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace birkhoff {

enum class VerdictTag { Unordered, StronglyOrderedEquilibria, SingletonTrivial, Violation, Inconclusive };

std::string to_string(VerdictTag tag);

struct DichotomyVerdict {
    VerdictTag tag = VerdictTag::Inconclusive;
    double margin = 0.0;                 // Unordered: min InteriorK margin; Inconclusive: marginal pair margin
    std::vector<double> chain;           // StronglyOrderedEquilibria: projections along v
    std::optional<std::pair<std::size_t, std::size_t>> witness;
    std::string detail;
};

/// Points closer than `resolution` are merged into one cluster first.
DichotomyVerdict classify_component(const ConeSpec& cone, const PointSet& points,
                                    const std::vector<EquilibriumRecord>& equilibria, double resolution,
                                    double margin);

struct AuditFlag {
    std::string kind;
    std::size_t i = 0;
    std::size_t j = 0;
    double margin = 0.0;
};

struct AuditReport {
    std::vector<AuditFlag> violations;
    std::vector<AuditFlag> warnings;
    double min_margin = std::numeric_limits<double>::infinity();
    std::size_t checked = 0;

    bool ok() const { return violations.empty(); }
};

void write_audit(std::ostream& os, const std::string& name, const AuditReport& r);

/// Certified layer: every pair of certified points must sit in Int C or
/// Int K with margin >= shell (violations). Box layer: surviving boxes away
/// from x (farther than `exclusion`) whose centers come within shell of the
/// joint boundary of x are warnings; i is the certified point, j the box.
/// Certified pairs closer than `skip_within` are not compared.
AuditReport intersection_principle_audit(const ConeSpec& cone, const PointSet& certified,
                                         const BoxCover* survivors, double shell, double exclusion,
                                         double skip_within = 0.0);

/// Samples of the tail [T/2, T] of y farther than `resolution` from x must
/// keep margin >= shell from the joint boundary at x. Throws on escape.
AuditReport omega_boundary_audit(const ConeSpec& cone, const Scenario& s, const Vec& x, const Vec& y, double T,
                                 double shell, double resolution, const IntegratorConfig& cfg = {},
                                 int samples = 200);

enum class LimitSetRelation { ApproxRelated, UnorderedUnion, Violation, Inconclusive };

std::string to_string(LimitSetRelation r);

struct LimitSetReport {
    LimitSetRelation relation = LimitSetRelation::Inconclusive;
    std::size_t ordered_pairs = 0;
    std::size_t unordered_pairs = 0;
    std::size_t marginal_pairs = 0;
    double min_margin = std::numeric_limits<double>::infinity();
};

/// Compares the tails [T/2, T] of x and y; pairs within `resolution` are skipped.
LimitSetReport limit_set_dichotomy(const ConeSpec& cone, const Scenario& s, const Vec& x, const Vec& y, double T,
                                   double shell, double resolution, const IntegratorConfig& cfg = {},
                                   int samples = 200);

/// For each certified point farther than `resolution` from the component:
/// component points both in Int C and in Int K of it (beyond margin) is a
/// violation; the same split with a sub-margin side is a warning.
AuditReport connecting_consistency(const ConeSpec& cone, const PointSet& component, const PointSet& certified,
                                   double margin, double resolution);

/// For each equilibrium away from the component that lies above (below) some
/// component point, every component point must be << (>>) it with margin.
AuditReport absorbing_audit(const ConeSpec& cone, const PointSet& component,
                            const std::vector<EquilibriumRecord>& equilibria, double margin, double resolution);

/// Everything a backward-orbit question needs.
struct BackwardContext {
    const Scenario& scenario;
    const ConeSpec& cone;
    const std::vector<EquilibriumRecord>& equilibria;
    const AttractorBounds& bounds;
    IntegratorConfig integrator;
    AlphaOptions alpha;
    double t_max = 50.0;
};

enum class BasinKind {
    LowerRepulsion,
    UpperRepulsion,
    LowerOfPlusInfinity,
    UpperOfMinusInfinity,
    Repulsion,
    NotClassified
};

std::string to_string(BasinKind k);

struct BasinLabel {
    BasinKind kind = BasinKind::NotClassified;
    std::optional<std::size_t> equilibrium;
    AlphaResult trace;
};

BasinLabel basin_classify(const BackwardContext& ctx, const Vec& x, double t_max);
inline BasinLabel basin_classify(const BackwardContext& ctx, const Vec& x) { return basin_classify(ctx, x, ctx.t_max); }

enum class TargetKind { Equilibrium, PlusInfinity, MinusInfinity, Unknown };

std::string to_string(TargetKind k);

struct Target {
    TargetKind kind = TargetKind::Unknown;
    std::optional<std::size_t> equilibrium;
    Vec start;               // sup (resp. inf) of the component
    bool degenerate = false; // the start point is itself the equilibrium reached
    AlphaKind trace = AlphaKind::Unknown;
};

struct ComponentTargets {
    Target upper;   // q from sup B
    Target lower;   // p from inf B
    std::optional<Vec> inf_dominating;     // inf of {e in E : B << e}
    std::optional<bool> upper_is_inf_dominating;
};

ComponentTargets target_equilibrium_for_component(const BackwardContext& ctx, const PointSet& component);

struct B12Evidence {
    std::size_t b1 = 0;
    std::size_t b2 = 0;
    std::size_t not_classified = 0;
    std::size_t skipped = 0;
    bool both = false;

    std::string dominant() const;
};

/// Probes x + delta * scale * v for each sample x and delta in `schedule`.
B12Evidence classify_B1_B2(const BackwardContext& ctx, const PointSet& samples, double scale,
                           const std::vector<double>& schedule = {0.2, 0.1, 0.05, 0.02, 0.01});

struct CertifyOptions {
    double t_min = 1.0;
    double window = 60.0;           // close returns searched on [t_min, window]
    double tolerance = 1e-6;        // accepted |Phi_t(z) - z|
    double scan_theta = 0.0;        // candidate acceptance before refinement; <= 0 means 4 box diameters
    std::size_t max_probes = 12;    // box centers tried per component
    int orbit_samples = 100;        // samples added along each certified periodic orbit
    double min_extent = 0.0;        // components with smaller hull diameter skip probing; <= 0 means 4 box diameters
};

/// Certified recurrent points of a component: census equilibria inside its
/// boxes, then refined close returns from evenly spaced box centers together
/// with samples along each certified periodic orbit.
std::vector<CloseReturn> certify_component(const Scenario& s, const SpatialComponent& comp, const BoxCover& cover,
                                           const std::vector<EquilibriumRecord>& equilibria,
                                           const CertifyOptions& opts, const IntegratorConfig& cfg = {});

struct ComponentRecord {
    std::vector<BoxIndex> boxes;
    PointSet representatives;
    std::vector<CloseReturn> certified;
    DichotomyVerdict verdict;
    std::optional<ComponentTargets> targets;
    std::optional<B12Evidence> evidence;

    PointSet certified_points() const;
};

void write_component_report(std::ostream& os, std::size_t index, const ComponentRecord& rec,
                            const std::vector<EquilibriumRecord>& equilibria);

}  // namespace birkhoff
