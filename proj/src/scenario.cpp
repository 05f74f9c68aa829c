#include "birkhoff/scenario.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace birkhoff {

Box::Box(Vec lo_, Vec hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    if (lo.size() != hi.size() || lo.size() == 0) {
        throw std::invalid_argument("box bounds must be nonempty and of equal dimension");
    }
    if (!lo.allFinite() || !hi.allFinite() || (hi - lo).minCoeff() <= 0.0) {
        throw std::invalid_argument("box must satisfy lo < hi with finite bounds");
    }
}

bool Box::contains(const Vec& x, double slack) const {
    for (int i = 0; i < x.size(); ++i) {
        if (x[i] < lo[i] - slack || x[i] > hi[i] + slack) return false;
    }
    return true;
}

Box Box::inflated(double fraction) const {
    const Vec pad = fraction * (hi - lo);
    return Box(lo - pad, hi + pad);
}

std::string to_string(FieldKind kind) {
    switch (kind) {
        case FieldKind::Linear: return "linear";
        case FieldKind::Bistable: return "bistable";
        case FieldKind::LotkaVolterra: return "lotka_volterra";
        case FieldKind::MayLeonard: return "may_leonard";
        case FieldKind::Custom: return "custom";
    }
    return "?";
}

namespace {

void check_domain(const Box& domain, int n) {
    if (domain.dimension() != n) throw std::invalid_argument("valid domain has wrong dimension");
}

}  // namespace

Scenario Scenario::linear(std::string name, Mat a, Box domain) {
    if (a.rows() != a.cols() || a.rows() == 0) throw std::invalid_argument("linear field needs a square matrix");
    const int n = static_cast<int>(a.rows());
    check_domain(domain, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i != j && a(i, j) > 0.0) {
                throw std::invalid_argument("linear field: positive off-diagonal entry, not competitive");
            }
        }
    }
    Scenario s;
    s.name_ = std::move(name);
    s.dimension_ = n;
    s.kind_ = FieldKind::Linear;
    s.domain_ = std::move(domain);
    s.matrix_ = std::move(a);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            s.parameters_["a" + std::to_string(i + 1) + std::to_string(j + 1)] = s.matrix_(i, j);
        }
    }
    s.escape_radius_ = 1e3 * s.domain_.diameter();
    return s;
}

Scenario Scenario::bistable(int n, double k, Box domain) {
    if (n < 1) throw std::invalid_argument("bistable: dimension must be positive");
    if (!(k > 0.0) || (n > 1 && !(k < 1.0 / (n - 1)))) {
        throw std::invalid_argument("bistable: coupling must satisfy 0 < k < 1/(n-1)");
    }
    check_domain(domain, n);
    Scenario s;
    s.name_ = "bistable";
    s.dimension_ = n;
    s.kind_ = FieldKind::Bistable;
    s.domain_ = std::move(domain);
    s.k_ = k;
    s.parameters_ = {{"n", static_cast<double>(n)}, {"k", k}};
    s.escape_radius_ = 1e3 * s.domain_.diameter();
    return s;
}

Scenario Scenario::lotka_volterra(std::string name, Vec r, Mat a, Box domain) {
    const int n = static_cast<int>(r.size());
    if (n == 0 || a.rows() != n || a.cols() != n) throw std::invalid_argument("lotka_volterra: shape mismatch");
    if (r.minCoeff() <= 0.0) throw std::invalid_argument("lotka_volterra: growth rates must be positive");
    if (a.minCoeff() <= 0.0) throw std::invalid_argument("lotka_volterra: interaction entries must be positive");
    check_domain(domain, n);
    if (domain.lo.minCoeff() <= 0.0) {
        throw std::invalid_argument("lotka_volterra: valid domain must lie in the open positive orthant");
    }
    Scenario s;
    s.name_ = std::move(name);
    s.dimension_ = n;
    s.kind_ = FieldKind::LotkaVolterra;
    s.domain_ = std::move(domain);
    s.growth_ = std::move(r);
    s.matrix_ = std::move(a);
    for (int i = 0; i < n; ++i) {
        s.parameters_["r" + std::to_string(i + 1)] = s.growth_[i];
        for (int j = 0; j < n; ++j) {
            s.parameters_["a" + std::to_string(i + 1) + std::to_string(j + 1)] = s.matrix_(i, j);
        }
    }
    s.escape_radius_ = 1e3 * s.domain_.diameter();
    return s;
}

Scenario Scenario::may_leonard(double alpha, double beta, Box domain) {
    Mat a(3, 3);
    a << 1.0, alpha, beta,
         beta, 1.0, alpha,
         alpha, beta, 1.0;
    Scenario s = lotka_volterra("may_leonard", Vec::Ones(3), a, std::move(domain));
    s.kind_ = FieldKind::MayLeonard;
    s.parameters_ = {{"alpha", alpha}, {"beta", beta}};
    return s;
}

Scenario Scenario::custom(std::string name, int n, FieldFn field, Box domain) {
    if (n <= 0 || !field) throw std::invalid_argument("custom field needs a dimension and a callable");
    check_domain(domain, n);
    Scenario s;
    s.name_ = std::move(name);
    s.dimension_ = n;
    s.kind_ = FieldKind::Custom;
    s.domain_ = std::move(domain);
    s.custom_ = std::move(field);
    s.escape_radius_ = 1e3 * s.domain_.diameter();
    return s;
}

Scenario Scenario::with_escape_radius(double r) const {
    if (!(r > 0.0)) throw std::invalid_argument("escape radius must be positive");
    Scenario s = *this;
    s.escape_radius_ = r;
    return s;
}

void Scenario::field(const double* x, double* dx) const {
    const int n = dimension_;
    switch (kind_) {
        case FieldKind::Linear:
            for (int i = 0; i < n; ++i) {
                double acc = 0.0;
                for (int j = 0; j < n; ++j) acc += matrix_(i, j) * x[j];
                dx[i] = acc;
            }
            return;
        case FieldKind::Bistable: {
            double total = 0.0;
            for (int j = 0; j < n; ++j) total += x[j];
            for (int i = 0; i < n; ++i) {
                dx[i] = x[i] - x[i] * x[i] * x[i] - k_ * (total - x[i]);
            }
            return;
        }
        case FieldKind::LotkaVolterra:
        case FieldKind::MayLeonard:
            for (int i = 0; i < n; ++i) {
                double acc = growth_[i];
                for (int j = 0; j < n; ++j) acc -= matrix_(i, j) * x[j];
                dx[i] = x[i] * acc;
            }
            return;
        case FieldKind::Custom: {
            const Vec out = custom_(Eigen::Map<const Vec>(x, n));
            for (int i = 0; i < n; ++i) dx[i] = out[i];
            return;
        }
    }
}

Vec Scenario::field(const Vec& x) const {
    Vec dx(dimension_);
    field(x.data(), dx.data());
    return dx;
}

Mat Scenario::jacobian(const Vec& x) const {
    const int n = dimension_;
    Mat j(n, n);
    switch (kind_) {
        case FieldKind::Linear:
            return matrix_;
        case FieldKind::Bistable:
            j.setConstant(-k_);
            for (int i = 0; i < n; ++i) j(i, i) = 1.0 - 3.0 * x[i] * x[i];
            return j;
        case FieldKind::LotkaVolterra:
        case FieldKind::MayLeonard: {
            const Vec inner = growth_ - matrix_ * x;
            for (int i = 0; i < n; ++i) {
                for (int k = 0; k < n; ++k) j(i, k) = -matrix_(i, k) * x[i];
                j(i, i) += inner[i];
            }
            return j;
        }
        case FieldKind::Custom: {
            const double eps = std::cbrt(std::numeric_limits<double>::epsilon());
            for (int k = 0; k < n; ++k) {
                const double h = eps * std::max(1.0, std::abs(x[k]));
                Vec xp = x, xm = x;
                xp[k] += h;
                xm[k] -= h;
                j.col(k) = (custom_(xp) - custom_(xm)) / (2.0 * h);
            }
            return j;
        }
    }
    return j;
}

namespace {

double take(std::map<std::string, double>& params, const std::string& key, double fallback) {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    const double v = it->second;
    params.erase(it);
    return v;
}

void reject_leftovers(const std::map<std::string, double>& params, const std::string& name) {
    if (!params.empty()) {
        throw std::invalid_argument("scenario '" + name + "': unknown parameter '" + params.begin()->first + "'");
    }
}

Box uniform_box(int n, double lo, double hi) { return Box(Vec::Constant(n, lo), Vec::Constant(n, hi)); }

}  // namespace

std::vector<std::string> scenario_names() {
    return {"linear1", "linear2", "bistable", "lv2", "may_leonard", "lv_cycle"};
}

Scenario make_scenario(const std::string& name, const std::map<std::string, double>& params_in,
                       const Box* domain_override) {
    auto params = params_in;
    auto domain = [&](const Box& fallback) { return domain_override ? *domain_override : fallback; };

    if (name == "linear1") {
        Mat a(1, 1);
        a(0, 0) = take(params, "a11", -1.0);
        reject_leftovers(params, name);
        return Scenario::linear(name, a, domain(uniform_box(1, -2.0, 2.0)));
    }
    if (name == "linear2") {
        Mat a(2, 2);
        a << take(params, "a11", -1.0), take(params, "a12", -0.5),
             take(params, "a21", -0.5), take(params, "a22", -1.0);
        reject_leftovers(params, name);
        return Scenario::linear(name, a, domain(uniform_box(2, -1.0, 1.0)));
    }
    if (name == "bistable") {
        const double nd = take(params, "n", 2.0);
        const double k = take(params, "k", 0.1);
        reject_leftovers(params, name);
        const int n = static_cast<int>(std::lround(nd));
        if (n < 1 || std::abs(nd - n) > 0) throw std::invalid_argument("bistable: n must be a positive integer");
        return Scenario::bistable(n, k, domain(uniform_box(n, -1.5, 1.5)));
    }
    if (name == "lv2") {
        Vec r(2);
        r << take(params, "r1", 1.0), take(params, "r2", 1.0);
        Mat a(2, 2);
        a << take(params, "a11", 1.0), take(params, "a12", 0.5),
             take(params, "a21", 0.5), take(params, "a22", 1.0);
        reject_leftovers(params, name);
        return Scenario::lotka_volterra(name, r, a, domain(uniform_box(2, 0.05, 1.5)));
    }
    if (name == "may_leonard") {
        const double alpha = take(params, "alpha", 0.5);
        const double beta = take(params, "beta", 0.5);
        reject_leftovers(params, name);
        return Scenario::may_leonard(alpha, beta, domain(uniform_box(3, 0.05, 1.5)));
    }
    if (name == "lv_cycle") {
        // Interior equilibrium is a weakly repelling focus on the carrying
        // simplex and the simplex boundary repels, so orbits settle on a cycle.
        Vec r(3);
        r << take(params, "r1", 1.1569), take(params, "r2", 2.8087), take(params, "r3", 0.7417);
        Mat a(3, 3);
        a << 1.0, take(params, "a12", 0.29), take(params, "a13", 1.328),
             take(params, "a21", 2.639), 1.0, take(params, "a23", 2.5173),
             take(params, "a31", 0.1933), take(params, "a32", 1.1218), 1.0;
        reject_leftovers(params, name);
        return Scenario::lotka_volterra(name, r, a, domain(uniform_box(3, 0.05, 1.5)));
    }
    throw std::invalid_argument("unknown scenario '" + name + "'");
}

}  // namespace birkhoff
