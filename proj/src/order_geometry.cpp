#include "birkhoff/order_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace birkhoff {

ConeSpec::ConeSpec(Mat generators, double eta) : generators_(std::move(generators)), eta_(eta) {
    if (generators_.rows() == 0 || generators_.rows() != generators_.cols()) {
        throw std::invalid_argument("cone generator matrix must be square and nonempty");
    }
    if (!generators_.allFinite()) {
        throw std::invalid_argument("cone generator matrix has non-finite entries");
    }
    if (!(eta_ >= 0.0)) {
        throw std::invalid_argument("cone strict margin must be nonnegative");
    }
    Eigen::FullPivLU<Mat> lu(generators_);
    if (!lu.isInvertible()) {
        throw std::invalid_argument("cone generator matrix is singular");
    }
    inverse_ = lu.inverse();
    const Mat residual = generators_ * inverse_ - Mat::Identity(dimension(), dimension());
    if (residual.cwiseAbs().rowwise().sum().maxCoeff() >= 1e-10) {
        throw std::invalid_argument("cone generator matrix is too ill-conditioned to invert");
    }
    const Vec v0 = generators_ * Vec::Ones(dimension());
    if ((inverse_ * v0).minCoeff() <= 0.0) {
        throw std::invalid_argument("cone has no interior direction G*(1,...,1)");
    }
    direction_ = v0.normalized();
}

ConeSpec ConeSpec::orthant(int n, double eta) {
    if (n <= 0) throw std::invalid_argument("cone dimension must be positive");
    return ConeSpec(Mat::Identity(n, n), eta);
}

double ConeSpec::unordered_slope_bound() const {
    const Vec& v = direction_;
    double bound = 0.0;
    for (int i = 0; i < dimension(); ++i) {
        const Vec w = inverse_.row(i).transpose();
        const Vec projected = w - w.dot(v) * v;
        bound = std::max(bound, projected.norm() / w.dot(v));
    }
    return bound;
}

std::string to_string(RegionTag tag) {
    switch (tag) {
        case RegionTag::InteriorCPlus: return "InteriorCPlus";
        case RegionTag::InteriorCMinus: return "InteriorCMinus";
        case RegionTag::InteriorK: return "InteriorK";
        case RegionTag::JointBoundary: return "JointBoundary";
        case RegionTag::Zero: return "Zero";
    }
    return "?";
}

std::string to_string(OrderRelation rel) {
    switch (rel) {
        case OrderRelation::Equal: return "Equal";
        case OrderRelation::Leq: return "Leq";
        case OrderRelation::Geq: return "Geq";
        case OrderRelation::StrictlyBelow: return "StrictlyBelow";
        case OrderRelation::StrictlyAbove: return "StrictlyAbove";
        case OrderRelation::Unordered: return "Unordered";
        case OrderRelation::Marginal: return "Marginal";
    }
    return "?";
}

OrderRegion classify_difference(const ConeSpec& cone, const Vec& d) {
    if (d.size() != cone.dimension()) {
        throw std::invalid_argument("difference vector has wrong dimension");
    }
    if (!d.allFinite()) {
        throw std::invalid_argument("difference vector is not finite");
    }
    const Vec c = cone.to_cone_coords(d);
    const double eta = cone.eta();
    const double pos = c.maxCoeff();
    const double neg = (-c).maxCoeff();

    if (c.cwiseAbs().maxCoeff() <= eta) return {RegionTag::Zero, 0.0};
    if (c.minCoeff() > eta) return {RegionTag::InteriorCPlus, c.minCoeff()};
    if (c.maxCoeff() < -eta) return {RegionTag::InteriorCMinus, -c.maxCoeff()};
    if (pos > eta && neg > eta) return {RegionTag::InteriorK, std::min(pos, neg)};
    return {RegionTag::JointBoundary, 0.0};
}

double signed_k_margin(const ConeSpec& cone, const Vec& d) {
    const Vec c = cone.to_cone_coords(d);
    return std::min(c.maxCoeff(), (-c).maxCoeff());
}

OrderRelation order_relate(const ConeSpec& cone, const Vec& x, const Vec& y) {
    if (x.size() != y.size() || x.size() != cone.dimension()) {
        throw std::invalid_argument("order_relate: dimension mismatch");
    }
    const Vec d = y - x;
    const OrderRegion region = classify_difference(cone, d);
    switch (region.tag) {
        case RegionTag::Zero: return OrderRelation::Equal;
        case RegionTag::InteriorCPlus: return OrderRelation::StrictlyBelow;
        case RegionTag::InteriorCMinus: return OrderRelation::StrictlyAbove;
        case RegionTag::InteriorK: return OrderRelation::Unordered;
        case RegionTag::JointBoundary: break;
    }
    // On the joint boundary: exact zeros give a non-strict relation, anything
    // else sits inside the eta band and could go either way.
    const Vec c = cone.to_cone_coords(d);
    const double eta = cone.eta();
    bool fuzzy = false;
    for (int i = 0; i < c.size(); ++i) {
        if (c[i] != 0.0 && std::abs(c[i]) <= eta) fuzzy = true;
    }
    if (fuzzy) return OrderRelation::Marginal;
    if (c.minCoeff() >= 0.0) return OrderRelation::Leq;
    if (c.maxCoeff() <= 0.0) return OrderRelation::Geq;
    return OrderRelation::Marginal;
}

UnorderedVerdict is_unordered_set(const ConeSpec& cone, const PointSet& points, double margin,
                                  double skip_within) {
    UnorderedVerdict verdict;
    verdict.min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            const Vec d = points[j] - points[i];
            if (skip_within > 0.0 && d.norm() <= skip_within) continue;
            const OrderRegion r = classify_difference(cone, d);
            const double m = r.in_k() ? r.margin : 0.0;
            verdict.min_margin = std::min(verdict.min_margin, m);
            if (!r.in_k() || r.margin < margin) {
                if (verdict.unordered) verdict.witness = std::make_pair(i, j);
                verdict.unordered = false;
                return verdict;
            }
        }
    }
    return verdict;
}

ChainParameterization order_parameterize(const ConeSpec& cone, const PointSet& points) {
    ChainParameterization out;
    const Vec& v = cone.interior_direction();
    out.order.resize(points.size());
    std::iota(out.order.begin(), out.order.end(), std::size_t{0});
    std::vector<double> proj(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) proj[i] = points[i].dot(v);
    std::stable_sort(out.order.begin(), out.order.end(),
                     [&](std::size_t a, std::size_t b) { return proj[a] < proj[b]; });

    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            if (!classify_difference(cone, points[j] - points[i]).in_c()) {
                out.witness = std::make_pair(i, j);
                return out;
            }
        }
    }
    for (std::size_t idx : out.order) out.projections.push_back(proj[idx]);
    for (std::size_t i = 1; i < out.projections.size(); ++i) {
        if (!(out.projections[i] > out.projections[i - 1])) {
            out.witness = std::make_pair(out.order[i - 1], out.order[i]);
            out.projections.clear();
            return out;
        }
    }
    out.strongly_ordered = true;
    return out;
}

namespace {

Vec lattice_bound(const ConeSpec& cone, const PointSet& points, bool upper) {
    if (points.empty()) throw std::invalid_argument("sup/inf of an empty set");
    Vec acc = cone.to_cone_coords(points.front());
    for (std::size_t i = 1; i < points.size(); ++i) {
        const Vec c = cone.to_cone_coords(points[i]);
        if (upper) {
            acc = acc.cwiseMax(c);
        } else {
            acc = acc.cwiseMin(c);
        }
    }
    return cone.from_cone_coords(acc);
}

void require_nonempty(const PointSet& a, const PointSet& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("set metric of an empty set");
}

}  // namespace

Vec sup_points(const ConeSpec& cone, const PointSet& points) { return lattice_bound(cone, points, true); }
Vec inf_points(const ConeSpec& cone, const PointSet& points) { return lattice_bound(cone, points, false); }

double point_set_distance(const Vec& x, const PointSet& set) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec& y : set) best = std::min(best, (x - y).squaredNorm());
    return std::sqrt(best);
}

double hausdorff(const PointSet& a, const PointSet& b) {
    require_nonempty(a, b);
    double h = 0.0;
    for (const Vec& x : a) h = std::max(h, point_set_distance(x, b));
    for (const Vec& y : b) h = std::max(h, point_set_distance(y, a));
    return h;
}

double separation_index(const PointSet& a, const PointSet& b) {
    require_nonempty(a, b);
    double best = std::numeric_limits<double>::infinity();
    for (const Vec& x : a) best = std::min(best, point_set_distance(x, b));
    return best;
}

}  // namespace birkhoff
