#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace birkhoff {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using PointSet = std::vector<Vec>;

/// Simplicial cone C+ = G * (nonnegative orthant).
///
/// Every order question is answered by mapping a difference vector through
/// G^-1 and inspecting coordinate signs. Verdicts within `eta` of a sign
/// change are never resolved silently; callers see JointBoundary/Marginal.
class ConeSpec {
public:
    explicit ConeSpec(Mat generators, double eta = 1e-9);

    static ConeSpec orthant(int n, double eta = 1e-9);

    int dimension() const { return static_cast<int>(generators_.rows()); }
    const Mat& generators() const { return generators_; }
    const Mat& inverse() const { return inverse_; }
    double eta() const { return eta_; }

    Vec to_cone_coords(const Vec& x) const { return inverse_ * x; }
    Vec from_cone_coords(const Vec& c) const { return generators_ * c; }

    /// Unit vector along G * (1,...,1); the fixed v >> 0 used for cells and probes.
    const Vec& interior_direction() const { return direction_; }

    /// Largest slope |dh| / |dy| (y in the hyperplane orthogonal to v) that an
    /// unordered graph over that hyperplane can have.
    double unordered_slope_bound() const;

private:
    Mat generators_;
    Mat inverse_;
    Vec direction_;
    double eta_;
};

enum class RegionTag { InteriorCPlus, InteriorCMinus, InteriorK, JointBoundary, Zero };

struct OrderRegion {
    RegionTag tag = RegionTag::Zero;
    double margin = 0.0;

    bool in_c() const { return tag == RegionTag::InteriorCPlus || tag == RegionTag::InteriorCMinus; }
    bool in_k() const { return tag == RegionTag::InteriorK; }
};

std::string to_string(RegionTag tag);

OrderRegion classify_difference(const ConeSpec& cone, const Vec& d);

/// min(max_i c_i, max_i -c_i) for c = G^-1 d: positive exactly on Int K,
/// nonpositive on C. Used where a single signed number is wanted.
double signed_k_margin(const ConeSpec& cone, const Vec& d);

enum class OrderRelation { Equal, Leq, Geq, StrictlyBelow, StrictlyAbove, Unordered, Marginal };

std::string to_string(OrderRelation rel);

/// Relation of x to y: StrictlyBelow means x << y.
OrderRelation order_relate(const ConeSpec& cone, const Vec& x, const Vec& y);

struct UnorderedVerdict {
    bool unordered = true;
    double min_margin = 0.0;  // +inf for sets with no compared pair
    std::optional<std::pair<std::size_t, std::size_t>> witness;
};

/// True iff every pair farther apart than `skip_within` lies in Int K with
/// margin at least `margin`. The first offending pair is returned as witness.
UnorderedVerdict is_unordered_set(const ConeSpec& cone, const PointSet& points, double margin,
                                  double skip_within = 0.0);

struct ChainParameterization {
    bool strongly_ordered = false;
    std::vector<std::size_t> order;   // indices sorted along v
    std::vector<double> projections;  // strictly increasing when strongly_ordered
    std::optional<std::pair<std::size_t, std::size_t>> witness;
};

ChainParameterization order_parameterize(const ConeSpec& cone, const PointSet& points);

Vec sup_points(const ConeSpec& cone, const PointSet& points);
Vec inf_points(const ConeSpec& cone, const PointSet& points);

double hausdorff(const PointSet& a, const PointSet& b);
double separation_index(const PointSet& a, const PointSet& b);

/// Distance from a point to a finite set.
double point_set_distance(const Vec& x, const PointSet& set);

}  // namespace birkhoff
