#pragma once

#include "birkhoff/order_geometry.hpp"

#include <functional>
#include <map>
#include <string>

namespace birkhoff {

/// Axis-aligned box [lo, hi].
struct Box {
    Vec lo;
    Vec hi;

    Box() = default;
    Box(Vec lo_, Vec hi_);

    int dimension() const { return static_cast<int>(lo.size()); }
    Vec center() const { return 0.5 * (lo + hi); }
    Vec radius() const { return 0.5 * (hi - lo); }
    double diameter() const { return (hi - lo).norm(); }
    bool contains(const Vec& x, double slack = 0.0) const;
    Box inflated(double fraction) const;
};

enum class FieldKind { Linear, Bistable, LotkaVolterra, MayLeonard, Custom };

std::string to_string(FieldKind kind);

/// A named vector field together with the box on which strong competition
/// is asserted. Immutable after construction.
class Scenario {
public:
    using FieldFn = std::function<Vec(const Vec&)>;

    static Scenario linear(std::string name, Mat a, Box domain);
    static Scenario bistable(int n, double k, Box domain);
    static Scenario lotka_volterra(std::string name, Vec r, Mat a, Box domain);
    static Scenario may_leonard(double alpha, double beta, Box domain);
    /// Jacobian by central differences (step cbrt(eps) * scale).
    static Scenario custom(std::string name, int n, FieldFn field, Box domain);

    const std::string& name() const { return name_; }
    int dimension() const { return dimension_; }
    FieldKind kind() const { return kind_; }
    const Box& valid_domain() const { return domain_; }
    const std::map<std::string, double>& parameters() const { return parameters_; }
    double escape_radius() const { return escape_radius_; }
    Scenario with_escape_radius(double r) const;

    Vec field(const Vec& x) const;
    void field(const double* x, double* dx) const;
    Mat jacobian(const Vec& x) const;

    /// Interaction matrix (linear A, Lotka-Volterra A); empty otherwise.
    const Mat& matrix() const { return matrix_; }
    const Vec& growth() const { return growth_; }

private:
    Scenario() = default;

    std::string name_;
    int dimension_ = 0;
    FieldKind kind_ = FieldKind::Linear;
    Box domain_;
    std::map<std::string, double> parameters_;
    double escape_radius_ = 0.0;
    Mat matrix_;
    Vec growth_;
    double k_ = 0.0;
    FieldFn custom_;
};

/// Named scenarios used by the CLI and the acceptance suite.
/// Known names: linear1, linear2, bistable, lv2, may_leonard, lv_cycle.
/// `params` overrides the documented defaults; unknown keys throw.
Scenario make_scenario(const std::string& name, const std::map<std::string, double>& params,
                       const Box* domain_override = nullptr);

std::vector<std::string> scenario_names();

}  // namespace birkhoff
