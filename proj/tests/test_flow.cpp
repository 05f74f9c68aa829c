#include <catch_amalgamated.hpp>

#include "birkhoff/flow.hpp"
#include "generators.hpp"

#include <cmath>
#include <sstream>

using namespace birkhoff;
using Catch::Approx;

namespace {

// exp(tA) x for symmetric A through its eigen decomposition.
Vec symmetric_exponential(const Mat& a, double t, const Vec& x) {
    Eigen::SelfAdjointEigenSolver<Mat> es(a);
    const Vec growth = (es.eigenvalues() * t).array().exp().matrix();
    return es.eigenvectors() * growth.asDiagonal() * es.eigenvectors().transpose() * x;
}

}  // namespace

TEST_CASE("scalar linear flow matches the exponential", "[flow]") {
    const Scenario s = make_scenario("linear1", {{"a11", -0.7}});
    Vec x(1);
    x << 1.3;
    for (double t : {0.1, 1.0, 5.0, -2.0}) {
        const FlowResult r = flow_map(s, x, t);
        REQUIRE(r.ok());
        CHECK(r.state[0] == Approx(1.3 * std::exp(-0.7 * t)).epsilon(1e-8));
        CHECK(r.time == Approx(t));
    }
}

TEST_CASE("planar linear flow matches the matrix exponential", "[flow][property]") {
    const Scenario s = make_scenario("linear2", {});
    gen::Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Vec x = rng.vec(2, -1.0, 1.0);
        const double t = rng.uniform(-1.0, 3.0);
        const FlowResult r = flow_map(s, x, t);
        REQUIRE(r.ok());
        CHECK((r.state - symmetric_exponential(s.matrix(), t, x)).norm() < 1e-8);
    }
}

TEST_CASE("flow composes and reverses", "[flow][property]") {
    const Scenario s = make_scenario("may_leonard", {});
    gen::Rng rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        const Vec x = rng.vec(3, 0.2, 1.2);
        CHECK(semigroup_residual(s, x, rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0)) < 1e-7);
        const FlowResult fwd = flow_map(s, x, 1.5);
        const FlowResult back = flow_map(s, fwd.state, -1.5);
        REQUIRE(back.ok());
        CHECK((back.state - x).norm() < 1e-7);
    }
}

TEST_CASE("sampled trajectory agrees with direct flow maps", "[flow]") {
    const Scenario s = make_scenario("lv2", {});
    Vec x(2);
    x << 0.3, 0.9;
    const Trajectory tr = sample_trajectory(s, x, 2.0, 0.25);
    REQUIRE(tr.states.size() == 9);
    CHECK(tr.times.back() == Approx(2.0));
    for (std::size_t k = 0; k < tr.states.size(); ++k) {
        CHECK((tr.states[k] - flow_map(s, x, tr.times[k]).state).norm() < 1e-8);
    }
    const Trajectory back = sample_trajectory(s, x, -1.0, 0.5);
    REQUIRE(back.times.size() == 3);
    CHECK(back.times[2] == Approx(-1.0));

    std::ostringstream os;
    write_trajectory_csv(os, tr);
    CHECK(os.str().rfind("t,x1,x2\n", 0) == 0);
}

TEST_CASE("integrate_visit stops when the visitor asks", "[flow]") {
    const Scenario s = make_scenario("linear2", {});
    Vec x(2);
    x << 1.0, 0.0;
    int visits = 0;
    const FlowResult r = integrate_visit(s, x, 10.0, 0.5, IntegratorConfig{}, [&](double t, const Vec&) {
        ++visits;
        return t < 2.0;
    });
    CHECK(visits == 5);
    CHECK(r.time == Approx(2.0));
}

TEST_CASE("backward blow-up is reported, not hidden", "[flow]") {
    const Scenario s = make_scenario("bistable", {{"n", 2.0}});
    Vec x(2);
    x << 1.4, 1.4;
    const FlowResult r = flow_map(s, x, -20.0);
    CHECK_FALSE(r.ok());
    CHECK(std::abs(r.time) < 20.0);
}

TEST_CASE("integrator configuration is validated", "[flow]") {
    IntegratorConfig cfg;
    cfg.rel_tol = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("competitive scenarios pass the Jacobian sign check", "[flow]") {
    for (const auto& name : {"lv2", "may_leonard", "lv_cycle"}) {
        const Scenario s = make_scenario(name, {});
        const auto rep = check_strong_competitiveness(s, ConeSpec::orthant(s.dimension()), 200, 1);
        CHECK(rep.nonpositive);
        CHECK(rep.irreducible);
        CHECK(rep.samples == 200);
    }
    const Scenario b = make_scenario("bistable", {{"n", 3.0}});
    CHECK(check_strong_competitiveness(b, ConeSpec::orthant(3), 200, 1).nonpositive);

    Mat flip = Mat::Identity(2, 2);
    flip(1, 1) = -1.0;
    const auto bad = check_strong_competitiveness(make_scenario("lv2", {}), ConeSpec(flip), 50, 1);
    CHECK_FALSE(bad.nonpositive);
}

TEST_CASE("scenario registry rejects unknown names and parameters", "[flow]") {
    CHECK_THROWS_AS(make_scenario("lorenz", {}), std::invalid_argument);
    CHECK_THROWS_AS(make_scenario("lv2", {{"r9", 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(make_scenario("bistable", {{"n", 2.5}}), std::invalid_argument);
    CHECK(scenario_names().size() == 6);
}
