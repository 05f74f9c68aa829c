#include <catch_amalgamated.hpp>

#include "birkhoff/equilibria.hpp"
#include "birkhoff/recurrence.hpp"
#include "generators.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

using namespace birkhoff;
using Catch::Approx;

namespace {

Box unit_square() { return Box(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)); }

// Fixed-step classical Runge-Kutta, independent of the library integrator.
Vec rk4(const Scenario& s, Vec x, double t, int steps) {
    const double h = t / steps;
    for (int i = 0; i < steps; ++i) {
        const Vec k1 = s.field(x);
        const Vec k2 = s.field(x + 0.5 * h * k1);
        const Vec k3 = s.field(x + 0.5 * h * k2);
        const Vec k4 = s.field(x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return x;
}

TransitionGraph graph(std::vector<std::vector<BoxIndex>> targets) {
    TransitionGraph g;
    for (std::size_t i = 0; i < targets.size(); ++i) g.nodes.push_back(i);
    g.targets = std::move(targets);
    g.padding.assign(g.nodes.size(), 0.0);
    return g;
}

}  // namespace

TEST_CASE("box indices round-trip", "[recurrence][property]") {
    gen::Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = rng.integer(1, 3);
        const int depth = rng.integer(1, 5);
        const BoxCover cover = BoxCover::full(Box(Vec::Constant(n, -2.0), Vec::Constant(n, 3.0)), depth);
        const BoxIndex idx = static_cast<BoxIndex>(rng.integer(0, static_cast<int>(cover.total_boxes()) - 1));
        CHECK(cover.flat_index(cover.multi_index(idx)) == idx);
        CHECK(cover.locate(cover.center(idx)) == idx);
        CHECK(cover.box(idx).contains(cover.center(idx)));
        const Vec x = rng.vec(n, -2.0, 3.0);
        const auto at = cover.locate(x);
        REQUIRE(at);
        CHECK(cover.box(*at).contains(x, 1e-12));
    }
}

TEST_CASE("subdivision and coarsening are inverse on full covers", "[recurrence]") {
    const BoxCover c = BoxCover::full(unit_square(), 2);
    const BoxCover fine = c.subdivided(2);
    CHECK(fine.depth() == 4);
    CHECK(fine.active().size() == 256);
    CHECK(fine.coarsened(2) == c.active());
    CHECK((fine.box_radius() - Vec::Constant(2, 1.0 / 16.0)).norm() < 1e-15);
    CHECK_THROWS(fine.coarsened(5));
}

TEST_CASE("strongly connected components of a small digraph", "[recurrence]") {
    // 0 <-> 1, 2 -> 2, 3 -> 0, 4 -> EXIT
    const TransitionGraph g = graph({{1}, {0}, {2}, {0}, {TransitionGraph::kExit}});
    const auto sccs = strongly_connected_components(g);
    std::set<std::vector<std::size_t>> got(sccs.begin(), sccs.end());
    CHECK(got.count({0, 1}) == 1);
    CHECK(got.count({2}) == 1);
    CHECK(chain_recurrent(g) == std::vector<BoxIndex>{0, 1, 2});
    CHECK(g.has_self_loop(2));
    CHECK_FALSE(g.has_self_loop(3));

    std::ostringstream os;
    write_edge_list(os, g);
    CHECK(os.str().find("4 EXIT") != std::string::npos);
}

TEST_CASE("linear contraction localizes at the origin", "[recurrence]") {
    const Scenario s = make_scenario("linear2", {});
    BoxMapOptions opts;
    opts.map_time = 2.0;
    const auto r = subdivide_iterate(s, s.valid_domain(), {4, 5, 6}, opts);
    REQUIRE_FALSE(r.cover.empty());
    CHECK(r.cover.covers(Vec::Zero(2)));
    const Box hull = r.cover.hull();
    CHECK((hull.hi - hull.lo).maxCoeff() <= 4.0 * r.cover.box_radius().maxCoeff() + 1e-12);
    CHECK(r.log.size() == 3);
    CHECK(spatial_components(r.cover).size() == 1);
}

TEST_CASE("box map seeds are deterministic", "[recurrence]") {
    const Scenario s = make_scenario("bistable", {{"n", 2.0}});
    const BoxCover cover = BoxCover::full(s.valid_domain(), 3);
    BoxMapOptions opts;
    opts.seed = 42;
    const auto a = box_map(cover, s, opts);
    const auto b = box_map(cover, s, opts);
    CHECK(a.targets == b.targets);
    CHECK(a.padding == b.padding);
}

TEST_CASE("spatial components follow face adjacency", "[recurrence]") {
    const Box dom = unit_square();
    const BoxCover cover(dom, 2, {0, 1, 5, 15});   // (0,0),(1,0),(1,1) joined; (3,3) alone
    const auto comps = spatial_components(cover);
    REQUIRE(comps.size() == 2);
    CHECK(comps[0].boxes == std::vector<BoxIndex>{0, 1, 5});
    CHECK(comps[1].boxes == std::vector<BoxIndex>{15});
}

TEST_CASE("close return on the limit cycle survives an independent integrator", "[recurrence]") {
    const Scenario s = make_scenario("lv_cycle", {});
    const Vec x = flow_map(s, s.valid_domain().center(), 500.0).state;
    const auto cr = refine_close_return(s, x, 1.0, 60.0, 0.5);
    REQUIRE(cr);
    CHECK(cr->error < 1e-8);
    CHECK((rk4(s, cr->z, cr->t, 40000) - cr->z).norm() < 1e-6);
    // Half the period is far from a return.
    CHECK((rk4(s, cr->z, 0.5 * cr->t, 20000) - cr->z).norm() > 0.1);
}

TEST_CASE("subset sums enumerate every nonempty mask", "[recurrence]") {
    const auto sums = subset_sums({1.0, 2.0, 4.0});
    REQUIRE(sums.size() == 7);
    for (std::size_t i = 0; i < sums.size(); ++i) {
        CHECK(sums[i].first == Approx(static_cast<double>(i + 1)));
        CHECK(sums[i].second == i + 1);
    }
    CHECK(subset_sums(std::vector<double>(10, 1.5)).size() == 1023);
}

TEST_CASE("recurrence times of an equilibrium cover the horizon", "[recurrence]") {
    const Scenario s = make_scenario("lv2", {});
    const Vec z = Vec::Constant(2, 2.0 / 3.0);
    const auto rts = recurrent_times(s, z, 0.05, 100.0, 0.01);
    REQUIRE(rts.intervals.size() == 1);
    CHECK(rts.intervals[0].second == Approx(100.0));
    CHECK(rts.contains(37.5));
    const auto w = verify_A1(s, rts, 7.3, 0.2);
    CHECK(w.found);
    CHECK(w.n == 1);

    const IPSet ip = ip_generate(s, z, 0.05, 10, 1e4);
    CHECK(ip.generators.size() == 10);
    CHECK(ip_verify(s, z, 0.05, ip.generators).passed);
}

TEST_CASE("IP generators on the cycle keep every finite sum close", "[recurrence][property]") {
    const Scenario s = make_scenario("lv_cycle", {});
    const Vec x = flow_map(s, s.valid_domain().center(), 500.0).state;
    const auto cr = refine_close_return(s, x, 1.0, 60.0, 0.5);
    REQUIRE(cr);
    const double theta = 0.07;
    const IPSet ip = ip_generate(s, cr->z, theta, 6, 1e4);
    REQUIRE(ip.generators.size() == 6);
    // Independent re-check of every sum.
    double worst = 0.0;
    for (const auto& [t, mask] : subset_sums(ip.generators)) {
        worst = std::max(worst, (flow_map(s, cr->z, t).state - cr->z).norm());
        CHECK(mask > 0);
    }
    CHECK(worst < theta);
    CHECK(ip_verify(s, cr->z, theta, ip.generators).worst_error == Approx(worst).margin(1e-9));
}

TEST_CASE("return-time witnesses are re-validated by a direct flow", "[recurrence]") {
    const Scenario s = make_scenario("lv_cycle", {});
    const Vec x = flow_map(s, s.valid_domain().center(), 500.0).state;
    const auto cr = refine_close_return(s, x, 1.0, 60.0, 0.5);
    REQUIRE(cr);
    const auto rts = recurrent_times(s, cr->z, 0.07, 2000.0, 0.01);
    CHECK_FALSE(rts.intervals.empty());
    gen::Rng rng(4);
    for (int k = 0; k < 10; ++k) {
        const double tau = rng.uniform(0.5, 50.0);
        const auto w = verify_A1(s, rts, tau, 0.05 * tau);
        if (!w.found) continue;
        CHECK(std::abs(w.s - w.n * tau) < 0.05 * tau);
        CHECK((flow_map(s, cr->z, w.s).state - cr->z).norm() == Approx(w.error).margin(1e-9));
        CHECK(w.error < 0.07);
    }
    CHECK_THROWS(verify_A1(s, rts, 1.0, 0.6));
}

TEST_CASE("occupation support of a contraction sits on the origin", "[recurrence]") {
    const Scenario s = make_scenario("linear2", {});
    PointSet samples;
    const BoxCover support =
        occupation_support(s, Vec::Constant(2, 0.9), 50.0, 20.0, s.valid_domain(), 4, 0.01, {}, &samples);
    REQUIRE_FALSE(support.empty());
    CHECK(support.hull().contains(Vec::Zero(2)));
    CHECK(support.active().size() <= 4);
    for (const auto& p : samples) CHECK(support.covers(p));
}
