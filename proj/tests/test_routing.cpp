#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "navlab/geometry.hpp"
#include "navlab/measure.hpp"
#include "navlab/routing.hpp"
#include "navlab/sampler.hpp"

using namespace navlab;

namespace {

EdgeSet no_edges(const Geometry& g) {
    EdgeSet e;
    e.n = g.size();
    e.gamma = g.gamma();
    return e;
}

EdgeSet complete(const Geometry& g) {
    EdgeSet e = no_edges(g);
    for (VertexId u = 0; u < g.size(); ++u) {
        for (VertexId v = u + 1; v < g.size(); ++v) {
            e.edges.push_back({u, v});
        }
    }
    return e;
}

}

TEST_CASE("nav graph adjacency") {
    auto g = Geometry::cycle(16);
    auto sub = Substrate::build(g);
    EdgeSet e = no_edges(g);
    e.edges = {{0, 1}, {0, 8}, {3, 9}};
    NavGraph ng(sub, e);
    CHECK(ng.long_edge_count() == 2);
    CHECK(ng.edge_count() == 18);
    CHECK(ng.is_long(0, 8));
    CHECK(ng.is_long(8, 0));
    CHECK_FALSE(ng.is_long(0, 1));
    auto n0 = ng.neighbors(0);
    CHECK(std::vector<VertexId>(n0.begin(), n0.end()) == std::vector<VertexId>{1, 8, 15});
    auto l0 = ng.long_neighbors(0);
    CHECK(std::vector<VertexId>(l0.begin(), l0.end()) == std::vector<VertexId>{8});
    for (VertexId v = 0; v < 16; ++v) {
        for (VertexId u : ng.neighbors(v)) {
            auto back = ng.neighbors(u);
            REQUIRE(std::find(back.begin(), back.end(), v) != back.end());
        }
    }
    EdgeSet bad = no_edges(g);
    bad.edges = {{0, 99}};
    CHECK_THROWS_AS(NavGraph(sub, bad), std::invalid_argument);
}

TEST_CASE("greedy routing basics") {
    auto g = Geometry::cycle(8);
    NavGraph plain(Substrate::build(g), no_edges(g));
    auto same = greedy_route(plain, 3, 3, 10);
    CHECK(same.success);
    CHECK(same.hops == 0);
    auto r = greedy_route(plain, 0, 3, 10);
    CHECK(r.success);
    CHECK(r.hops == 3);
    CHECK(r.path == std::vector<VertexId>{0, 1, 2, 3});
    CHECK(r.long_edges_used == 0);
    auto cut = greedy_route(plain, 0, 4, 2);
    CHECK_FALSE(cut.success);
    CHECK(cut.hops == 2);
    CHECK_THROWS_AS(greedy_route(plain, 0, 3, 0), std::invalid_argument);
    CHECK_THROWS_AS(greedy_route(plain, 0, 30, 5), std::invalid_argument);

    auto t = Geometry::torus(6, 2);
    NavGraph full(Substrate::build(t), complete(t));
    for (VertexId s = 0; s < 36; ++s) {
        for (VertexId d = 0; d < 36; ++d) {
            if (s != d) {
                REQUIRE(greedy_route(full, s, d, 5).hops == 1);
            }
        }
    }
    auto stats = route_trial_batch(full, 500, 5, 1);
    CHECK(stats.success_rate == 1.0);
    CHECK(stats.p50 == 1.0);
}

TEST_CASE("greedy routes make monotone progress") {
    auto g = Geometry::torus(32, 2);
    auto cg = CostGeometry::build(g, CostSpec::parse("logdensity:alpha=1"));
    auto sol = solve_profile(cg, *thresholds(cg, 1.0).Ba);
    NavGraph ng(Substrate::build(g), sample_product(cg, sol.qStar, 3));
    for (std::size_t i = 0; i < 300; ++i) {
        auto [s, t] = trial_pair(g.size(), 5, i);
        auto r = greedy_route(ng, s, t, 1000);
        REQUIRE(r.success);
        REQUIRE(r.path.front() == s);
        REQUIRE(r.path.back() == t);
        REQUIRE(r.hops == r.path.size() - 1);
        REQUIRE(r.hops <= g.distance(s, t));
        std::size_t longs = 0;
        for (std::size_t j = 1; j < r.path.size(); ++j) {
            REQUIRE(g.distance(r.path[j], t) < g.distance(r.path[j - 1], t));
            longs += ng.is_long(r.path[j - 1], r.path[j]);
        }
        REQUIRE(longs == r.long_edges_used);
        auto again = greedy_route(ng, s, t, 1000);
        REQUIRE(again.path == r.path);
    }
}

TEST_CASE("greedy picks the best improving neighbor") {
    auto g = Geometry::cycle(32);
    EdgeSet e = no_edges(g);
    e.edges = {{0, 10}, {0, 14}, {10, 16}};
    NavGraph ng(Substrate::build(g), e);
    auto r = greedy_route(ng, 0, 16, 50);
    // 14 is closer to 16 than 10 is
    CHECK(r.path == std::vector<VertexId>{0, 14, 15, 16});
    CHECK(r.long_edges_used == 1);

    NavGraph pure(g, e);
    auto stall = greedy_route(pure, 0, 16, 50, GreedyMode::Pure);
    CHECK_FALSE(stall.success);
    CHECK(stall.path == std::vector<VertexId>{0, 14});
    auto fallback_without_substrate = greedy_route(pure, 0, 16, 50);
    CHECK_FALSE(fallback_without_substrate.success);
}

TEST_CASE("batch statistics") {
    auto g = Geometry::cycle(64);
    NavGraph plain(Substrate::build(g), no_edges(g));
    auto stats = route_trial_batch(plain, 2000, 64, 3);
    CHECK(stats.success_rate == 1.0);
    // mean ring distance is n/4 = 16
    CHECK(stats.mean_hops == doctest::Approx(16.0).epsilon(0.05));
    CHECK(stats.p50 == doctest::Approx(16.0).epsilon(0.15));
    CHECK(stats.mean_long_edges == 0.0);
    auto again = route_trial_batch(plain, 2000, 64, 3);
    CHECK(again.p90 == stats.p90);
    CHECK(again.mean_hops == stats.mean_hops);

    auto low = route_trial_batch(plain, 500, 4, 3);
    CHECK(low.success_rate < 0.5);
    CHECK_THROWS_AS(route_trial_batch(plain, 0, 4, 3), std::invalid_argument);

    for (std::size_t i = 0; i < 100; ++i) {
        auto [s, t] = trial_pair(64, 3, i);
        REQUIRE(s != t);
        REQUIRE(s < 64);
        REQUIRE(t < 64);
    }
    CHECK(default_budget(4096) == static_cast<std::size_t>(std::ceil(10 * std::pow(std::log(4096.0), 2))));

    std::vector<double> xs{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    CHECK(nearest_rank(xs, 0.5) == 5);
    CHECK(nearest_rank(xs, 0.9) == 9);
    CHECK(nearest_rank(xs, 0.99) == 10);
    CHECK(nearest_rank(xs, 0.05) == 1);
}

TEST_CASE("reducibility probes") {
    auto g = Geometry::cycle(256);
    auto sub = Substrate::build(g);
    EdgeSet e = no_edges(g);
    e.edges = {{0, 100}, {5, 70}};
    NavGraph ng(sub, e);
    auto direct = probe_reducibility(ng, 0, 100, 1.0, 1.0, 0.5);
    CHECK(direct.has_witness);
    CHECK(direct.witness_u == 0);
    CHECK(direct.witness_v == 100);

    // d(100, 60) = 40 misses 0.5 d(0, 60) = 30; d(70, 60) = 10 does not
    auto later = probe_reducibility(ng, 0, 60, 1.0, 2.0, 0.5);
    CHECK(later.has_witness);
    CHECK(later.witness_u == 5);
    CHECK(later.witness_v == 70);
    CHECK(later.examined == 6);
    CHECK_FALSE(probe_reducibility(ng, 0, 60, 1.0, 0.5, 0.5).has_witness);

    NavGraph bare(sub, no_edges(g));
    auto none = probe_reducibility(bare, 0, 100, 1.0, 1.0, 0.5);
    CHECK_FALSE(none.has_witness);
    CHECK(none.limit == static_cast<std::size_t>(std::ceil(std::log(256.0))));
    CHECK(none.examined == none.limit);

    // the local path itself reaches rho d(s, t) within the scan
    auto close = probe_reducibility(bare, 0, 4, 1.0, 1.0, 0.5);
    CHECK(close.has_witness);
    CHECK(close.witness_u == close.witness_v);
    CHECK(g.distance(close.witness_u, 4) <= 2.0);

    CHECK(reducibility_index(bare, 0, 100, 0.5) == 51);
    CHECK(reducibility_index(ng, 0, 60, 0.5) == 6);
    CHECK_THROWS_AS(probe_reducibility(bare, 3, 3, 1.0, 1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(probe_reducibility(bare, 3, 4, 1.0, 0.0, 0.5), std::invalid_argument);
    NavGraph pure(g, e);
    CHECK_THROWS_AS(probe_reducibility(pure, 3, 4, 1.0, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("product graphs above Bminus are reducible") {
    auto g = Geometry::cycle(4096);
    auto cg = CostGeometry::build(g, CostSpec::parse("logdensity:alpha=1"));
    auto t = thresholds(cg, 1.0);
    auto sol = solve_profile(cg, t.Bminus);
    NavGraph ng(Substrate::build(g), sample_product(cg, sol.qStar, 1));
    std::size_t found = 0;
    for (std::size_t i = 0; i < 1000; ++i) {
        auto [s, tt] = trial_pair(g.size(), 2, i);
        found += probe_reducibility(ng, s, tt, 2.0, 1.0, 0.5).has_witness;
    }
    CHECK(found >= 990);
}

TEST_CASE("rba on a torus routes within budget") {
    auto g = Geometry::torus(32, 2);
    NavGraph ng(Substrate::build(g), sample_rba(g, 1, 1));
    auto stats = route_trial_batch(ng, 1000, default_budget(g.size()), 1);
    CHECK(stats.success_rate >= 0.99);
    CHECK(stats.mean_long_edges > 0.0);
}
