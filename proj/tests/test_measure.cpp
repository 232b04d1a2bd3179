#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "navlab/geometry.hpp"
#include "navlab/measure.hpp"

using namespace navlab;

namespace {

double direct_g(const std::vector<double>& p, const std::vector<double>& c, double lambda) {
    double total = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        total += c[k] * p[k] / (1.0 + std::exp(lambda * c[k]));
    }
    return total;
}

double lbinom(double P, double m) {
    return std::lgamma(P + 1) - std::lgamma(m + 1) - std::lgamma(P - m + 1);
}

// plain odometer over the whole box, no pruning
std::vector<std::uint64_t> oracle_profile(const std::vector<std::uint64_t>& P, const std::vector<double>& c,
                                          double cap) {
    std::vector<std::uint64_t> m(P.size(), 0), best = m;
    double best_h = -1.0;
    while (true) {
        double cost = 0.0, h = 0.0;
        for (std::size_t k = 0; k < P.size(); ++k) {
            cost += c[k] * static_cast<double>(m[k]);
            h += lbinom(static_cast<double>(P[k]), static_cast<double>(m[k]));
        }
        if (cost <= cap * (1 + 1e-12) && h > best_h + 1e-12) {
            best_h = h;
            best = m;
        }
        std::size_t k = 0;
        while (k < P.size() && m[k] == P[k]) {
            m[k] = 0;
            ++k;
        }
        if (k == P.size()) {
            break;
        }
        ++m[k];
    }
    return best;
}

}

TEST_CASE("cost geometry from lattices") {
    auto g = Geometry::cycle(64);
    auto idx = CostGeometry::build(g, CostSpec::parse("indexing:alpha=1"));
    CHECK(idx.K() == 5);
    for (int k = 1; k <= 5; ++k) {
        CHECK(idx.c(k) == doctest::Approx(k));
    }
    CHECK(idx.P(1) == 128);
    CHECK(idx.total_pairs() == 64 * 63 / 2);

    auto ld = CostGeometry::build(g, CostSpec::parse("logdensity:alpha=2"));
    for (int k = 1; k <= 5; ++k) {
        CHECK(ld.c(k) == doctest::Approx(std::log(ld.p(k)) / 2.0));
    }

    auto ex = CostGeometry::build(g, CostSpec::parse("explicit:2,2,2,2,2"));
    CHECK(ex.c(3) == 2.0);
    CHECK_THROWS_AS(CostGeometry::build(g, CostSpec::parse("explicit:1,2,3")), std::invalid_argument);
    CHECK_THROWS_AS(CostGeometry::build(g, CostSpec::parse("explicit:1,2,3,4,-5")), std::invalid_argument);
    CHECK_THROWS_AS(CostSpec::parse("indexing"), std::invalid_argument);
    CHECK_THROWS_AS(CostSpec::parse("indexing:alpha=0"), std::invalid_argument);
    CHECK_THROWS_AS(CostSpec::parse("quadratic:alpha=1"), std::invalid_argument);
    CHECK(CostSpec::parse("logdensity:alpha=1.5").describe() == "logdensity:alpha=1.5");

    // class sizes against pair enumeration
    for (auto geo : {Geometry::cycle(50), Geometry::torus(6, 2)}) {
        auto cg = CostGeometry::build(geo, CostSpec::parse("indexing:alpha=1"));
        std::vector<std::uint64_t> count(cg.K(), 0);
        for (VertexId u = 0; u < geo.size(); ++u) {
            for (VertexId v = u + 1; v < geo.size(); ++v) {
                ++count[geo.scale_index(u, v) - 1];
            }
        }
        for (int k = 1; k <= cg.K(); ++k) {
            CHECK(cg.P(k) == count[k - 1]);
        }
    }
}

TEST_CASE("entropy") {
    auto cg = CostGeometry::from_classes(4, {4}, {1.0});
    CHECK(profile_entropy(cg, {{2}}) == doctest::Approx(std::log(6.0)));
    CHECK(profile_entropy(cg, {{0}}) == 0.0);
    CHECK(profile_entropy(cg, {{4}}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(profile_entropy(cg, {{5}}), std::invalid_argument);
    CHECK(log_binomial(std::uint64_t{10}, std::uint64_t{3}) == doctest::Approx(std::log(120.0)));
    std::vector<double> m{2.0};
    CHECK(continuous_entropy(cg, m) == doctest::Approx(4.0 * std::log(2.0)));
}

TEST_CASE("g of lambda") {
    auto one = CostGeometry::from_classes(5, {10}, {1.0});
    CHECK(g_of_lambda(one, 0.0) == doctest::Approx(1.0));
    CHECK(g_of_lambda(one, 800.0) == doctest::Approx(0.0));

    auto two = CostGeometry::from_classes(10, {20, 40}, {1.0, 2.0});
    CHECK(g_of_lambda(two, 1.0) == doctest::Approx(direct_g({2, 4}, {1, 2}, 1.0)).epsilon(1e-14));
    CHECK(g_of_lambda(two, 1.0) == doctest::Approx(1.4915062189169308).epsilon(1e-14));
    CHECK(g_of_lambda(two, 0.0) == doctest::Approx(two.unconstrained_budget()));
    CHECK_THROWS_AS(g_of_lambda(two, -1.0), std::invalid_argument);

    auto cg = CostGeometry::build(Geometry::cycle(1024), CostSpec::parse("logdensity:alpha=1"));
    double prev = g_of_lambda(cg, 0.0);
    for (double lam = 0.05; lam < 30; lam *= 1.3) {
        double cur = g_of_lambda(cg, lam);
        REQUIRE(cur < prev);
        prev = cur;
    }
}

TEST_CASE("budget inversion") {
    auto one = CostGeometry::from_classes(5, {10}, {1.0});
    CHECK(invert_budget(one, 0.5) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(invert_budget(one, one.unconstrained_budget()) == 0.0);
    CHECK(invert_budget(one, 5.0) == 0.0);
    CHECK(std::isinf(invert_budget(one, 0.0)));
    CHECK_THROWS_AS(invert_budget(one, -0.1), std::invalid_argument);

    auto cg = CostGeometry::build(Geometry::torus(16, 2), CostSpec::parse("indexing:alpha=1"));
    double B = g_of_lambda(cg, 2.0);
    CHECK(std::fabs(invert_budget(cg, B) - 2.0) <= 1e-9 * 3.0);
}

TEST_CASE("entropic solution") {
    auto one = CostGeometry::from_classes(5, {10}, {1.0});
    auto s = solve_profile(one, 0.5);
    CHECK(s.aStar[0] == doctest::Approx(0.5));
    CHECK(s.qStar[0] == doctest::Approx(0.25));
    CHECK(s.mStar[0] == doctest::Approx(2.5));

    auto cg = CostGeometry::build(Geometry::cycle(256), CostSpec::parse("indexing:alpha=1"));
    auto free = solve_profile(cg, cg.unconstrained_budget() * 1.5);
    CHECK(free.lambda == 0.0);
    for (int k = 1; k <= cg.K(); ++k) {
        CHECK(free.aStar[k - 1] == doctest::Approx(cg.p(k) / 2));
        CHECK(free.qStar[k - 1] == doctest::Approx(0.5));
    }

    auto zero = solve_profile(cg, 0.0);
    for (int k = 1; k <= cg.K(); ++k) {
        CHECK(zero.aStar[k - 1] == 0.0);
        CHECK(zero.qStar[k - 1] == 0.0);
    }
    CHECK(zero.stationarity_residual(cg) == 0.0);

    for (double frac : {0.01, 0.1, 0.4, 0.8, 0.99}) {
        double B = frac * cg.unconstrained_budget();
        auto sol = solve_profile(cg, B);
        CHECK(sol.budget_residual(cg) <= 1e-9 * std::max(1.0, B));
        CHECK(sol.stationarity_residual(cg) <= 1e-9);
        for (int k = 1; k <= cg.K(); ++k) {
            CHECK(sol.aStar[k - 1] > 0.0);
            CHECK(sol.aStar[k - 1] < cg.p(k));
            CHECK(sol.mStar[k - 1] == doctest::Approx(256 * sol.aStar[k - 1]));
        }
    }

    auto ld = CostGeometry::build(Geometry::cycle(1024), CostSpec::parse("logdensity:alpha=1"));
    auto t = thresholds(ld, 1.0);
    auto sa = solve_profile(ld, *t.Ba);
    CHECK(sa.lambda == doctest::Approx(1.0).epsilon(1e-9));
    for (int k = 1; k <= ld.K(); ++k) {
        CHECK(sa.aStar[k - 1] == doctest::Approx(ld.p(k) / (1 + ld.p(k))).epsilon(1e-9));
    }
}

TEST_CASE("sandwich parameters") {
    auto cg = CostGeometry::build(Geometry::cycle(256), CostSpec::parse("indexing:alpha=1"));
    auto free = solve_profile(cg, cg.unconstrained_budget());
    auto sp = sandwich_params(cg, free);
    double want = 1e300;
    for (int k = 1; k <= cg.K(); ++k) {
        want = std::min(want, cg.P(k) / 2.0);
    }
    CHECK(sp.mu == doctest::Approx(want));
    CHECK(sp.tau == doctest::Approx(5.0 * cg.K() * std::log(256.0) / sp.mu));
    CHECK(sp.epsilon == doctest::Approx(std::sqrt(24.0 / std::log(256.0))));
    CHECK(sp.delta == doctest::Approx(2 * std::exp(-sp.mu * (sp.epsilon * sp.epsilon / 12 - sp.tau))));
    CHECK(sp.delta_asymptotic == doctest::Approx(2 * std::pow(256.0, -5.0 * cg.K())));
    CHECK(sp.valid == (sp.epsilon * sp.epsilon > 12 * sp.tau));

    CHECK_THROWS_AS(sandwich_params(cg, solve_profile(cg, 0.0)), std::domain_error);

    auto big = CostGeometry::build(Geometry::cycle(4096), CostSpec::parse("logdensity:alpha=1"));
    auto t = thresholds(big, 1.0);
    auto bs = sandwich_params(big, solve_profile(big, *t.Ba));
    CHECK(bs.valid);
    CHECK(bs.mu > 0.0);
}

TEST_CASE("thresholds") {
    auto cg = CostGeometry::build(Geometry::cycle(4096), CostSpec::parse("logdensity:alpha=1"));
    auto t = thresholds(cg, 1.0);
    double lln = std::log(std::log(4096.0));
    double pK = cg.p(cg.K());
    CHECK(t.lambda_theta == doctest::Approx(1.0 + lln / std::log(pK)));
    CHECK(t.Lambda_theta == doctest::Approx(1.0 - lln / std::log(pK)));
    CHECK(t.Bminus <= *t.Ba);
    CHECK(*t.Ba <= t.Bplus);
    CHECK(t.Bplus / t.Bminus > 1.0);
    CHECK(t.Bplus == doctest::Approx(g_of_lambda(cg, t.Lambda_theta)));
    CHECK(t.Bminus == doctest::Approx(std::max(t.B0, g_of_lambda(cg, t.lambda_theta))));
    CHECK(t.k_theta == doctest::Approx((lln - std::log(cg.alpha_growth())) / std::log(2.0)));

    auto idx = CostGeometry::build(Geometry::cycle(4096), CostSpec::parse("indexing:alpha=2"));
    auto ti = thresholds(idx, 1.0);
    CHECK(*ti.Ba == doctest::Approx(g_of_lambda(idx, 2.0)));

    auto t0 = thresholds(cg, 0.0);
    CHECK(t0.lambda_theta == doctest::Approx(1.0));
    CHECK(t0.Lambda_theta == doctest::Approx(1.0));
    CHECK(t0.Bplus == doctest::Approx(*t0.Ba));

    auto small = CostGeometry::build(Geometry::cycle(16), CostSpec::parse("logdensity:alpha=1"));
    CHECK_THROWS_AS(thresholds(small, 50.0), std::domain_error);
    CHECK_THROWS_AS(thresholds(cg, -1.0), std::invalid_argument);
}

TEST_CASE("brute force oracle") {
    auto cg = CostGeometry::from_classes(2, {4}, {1.0});
    CHECK(brute_force_profile(cg, 1.0).m == std::vector<std::uint64_t>{2});
    auto many = CostGeometry::from_classes(10, {12, 30, 7}, {0.5, 1.5, 3.0});
    CHECK(brute_force_profile(many, 0.0).m == std::vector<std::uint64_t>{0, 0, 0});
    auto full = brute_force_profile(many, 1000.0);
    CHECK(full.m == std::vector<std::uint64_t>{6, 15, 3});
    CHECK_THROWS_AS(brute_force_profile(CostGeometry::from_classes(10, {100}, {1.0}), 1.0),
                    std::invalid_argument);

    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 40; ++trial) {
        int K = 1 + static_cast<int>(rng() % 3);
        std::vector<std::uint64_t> P;
        std::vector<double> c;
        for (int k = 0; k < K; ++k) {
            P.push_back(1 + rng() % 20);
            c.push_back(0.2 + 4.8 * std::uniform_real_distribution<double>()(rng));
        }
        std::size_t n = 2 + rng() % 10;
        auto inst = CostGeometry::from_classes(n, P, c);
        double B = 1.2 * inst.unconstrained_budget() * std::uniform_real_distribution<double>()(rng);
        auto got = brute_force_profile(inst, B);
        auto want = oracle_profile(P, c, B * static_cast<double>(n));
        REQUIRE(profile_entropy(inst, got) == doctest::Approx(profile_entropy(inst, EdgeProfile{want})));
        auto sol = solve_profile(inst, B);
        CHECK(continuous_entropy(inst, sol.mStar) + 1e-9 >= profile_entropy(inst, got));
    }
}
