#include <catch_amalgamated.hpp>

#include "birkhoff/entropy.hpp"
#include "generators.hpp"

#include <cmath>
#include <sstream>

using namespace birkhoff;
using Catch::Approx;

namespace {

PointSet line(int count, double spacing) {
    PointSet out;
    for (int i = 0; i < count; ++i) out.push_back(Vec::Constant(1, spacing * i));
    return out;
}

// For x' = a x the sup-norm orbit distance over [0, T] is |x - y| e^{aT} when a > 0.
std::size_t greedy_expanding(const PointSet& sorted, double a, double T, double eps) {
    std::vector<double> centers;
    for (const auto& p : sorted) {
        bool covered = false;
        for (double c : centers) covered = covered || std::abs(p[0] - c) * std::exp(a * T) <= eps;
        if (!covered) centers.push_back(p[0]);
    }
    return centers.size();
}

}  // namespace

TEST_CASE("spanning count of an expanding line matches the closed form", "[entropy]") {
    const Scenario s = make_scenario("linear1", {{"a11", 0.5}});
    const PointSet base = line(21, 0.01);
    for (double T : {1.0, 2.0, 3.0}) {
        CHECK(spanning_count(s, base, T, 0.1) == greedy_expanding(base, 0.5, T, 0.1));
    }
    CHECK(spanning_count(s, base, 2.0, 0.1) == 6);
}

TEST_CASE("spanning count does not depend on base order", "[entropy][property]") {
    const Scenario s = make_scenario("lv2", {});
    gen::Rng rng(23);
    PointSet base = rng.points(30, 2, 0.2, 1.0);
    const std::size_t a = spanning_count(s, base, 5.0, 0.05);
    std::reverse(base.begin(), base.end());
    CHECK(spanning_count(s, base, 5.0, 0.05) == a);
    CHECK(a >= 1);
    CHECK(a <= base.size());
}

TEST_CASE("a contraction has zero growth", "[entropy]") {
    const Scenario s = make_scenario("linear2", {});
    gen::Rng rng(29);
    const PointSet base = rng.points(60, 2, -0.5, 0.5);
    const auto r = entropy_estimate(s, base, {20.0, 40.0, 80.0}, {0.05, 0.1});
    CHECK(r.monotone);
    CHECK(r.headline == Approx(0.0).margin(1e-12));
    for (const auto& row : r.counts) CHECK(row == r.counts.front());
}

TEST_CASE("entropy counts are monotone in both arguments", "[entropy][property]") {
    const Scenario s = make_scenario("linear1", {{"a11", 0.3}});
    gen::Rng rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        const PointSet base = rng.points(25, 1, -0.05, 0.05);
        const auto r = entropy_estimate(s, base, {1.0, 3.0, 5.0}, {0.02, 0.05, 0.1});
        CHECK(r.monotone);
        CHECK(r.headline > 0.0);
        for (std::size_t k = 1; k < r.horizons.size(); ++k) {
            for (std::size_t j = 0; j < r.epsilons.size(); ++j) CHECK(r.counts[k][j] >= r.counts[k - 1][j]);
        }
    }
}

TEST_CASE("entropy arguments are checked", "[entropy]") {
    const Scenario s = make_scenario("linear2", {});
    const PointSet base{Vec::Zero(2)};
    CHECK_THROWS_AS(entropy_estimate(s, base, {1.0, 2.0}, {0.1, 0.2}), std::invalid_argument);
    CHECK_THROWS_AS(entropy_estimate(s, base, {1.0, 2.0, 3.0}, {0.1}), std::invalid_argument);
    CHECK_THROWS_AS(entropy_estimate(s, base, {-1.0, 2.0, 3.0}, {0.1, 0.2}), std::invalid_argument);
    CHECK_THROWS_AS(spanning_count(s, base, 0.0, 0.1), std::invalid_argument);
    CHECK(spanning_count(s, {}, 1.0, 0.1) == 0);
    CHECK(entropy_estimate(s, {}, {1.0, 2.0, 3.0}, {0.1, 0.2}).degenerate);
}

TEST_CASE("escaping orbits are reported", "[entropy]") {
    const Scenario s = make_scenario("linear1", {{"a11", 5.0}});
    CHECK_THROWS_AS(spanning_count(s, {Vec::Constant(1, 1.0)}, 50.0, 0.1), std::runtime_error);
}

TEST_CASE("entropy artifacts", "[entropy]") {
    const Scenario s = make_scenario("linear2", {});
    const auto r = entropy_estimate(s, {Vec::Zero(2), Vec::Constant(2, 0.3)}, {1.0, 2.0, 3.0}, {0.1, 0.2});
    std::ostringstream csv, verdict;
    write_entropy_csv(csv, r);
    CHECK(csv.str().rfind("T,N_eps_0.10000000000000001,N_eps_0.20000000000000001\n", 0) == 0);
    write_entropy_verdict(verdict, r, 0.05);
    CHECK(verdict.str().find("verdict ZERO") != std::string::npos);
}
