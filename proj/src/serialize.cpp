#include "navlab/serialize.hpp"

#include <cmath>

namespace navlab {

std::string to_string(GeometryKind kind) {
    switch (kind) {
        case GeometryKind::Cycle:
            return "cycle";
        case GeometryKind::Torus:
            return "torus";
        case GeometryKind::SetSystem:
            return "setsystem";
    }
    return "unknown";
}

json number(double x) {
    return std::isfinite(x) ? json(x) : json(nullptr);
}

namespace {

json numbers(const std::vector<double>& xs) {
    json out = json::array();
    for (double x : xs) {
        out.push_back(number(x));
    }
    return out;
}

}

json to_json(const CoherenceReport& r) {
    return {
        {"kind", to_string(r.kind)},
        {"geometry", r.geometry},
        {"n", r.n},
        {"gamma", r.gamma},
        {"K", r.K},
        {"alphaGrowth", number(r.alpha_growth)},
        {"AGrowth", number(r.A_growth)},
        {"phi", number(r.phi)},
        {"rho", r.rho},
        {"passH1", r.pass_h1},
        {"passH2", r.pass_h2},
        {"interiorScales", r.interior_scales},
        {"shellRatioMin", numbers(r.shell_ratio_min)},
        {"shellRatioMax", numbers(r.shell_ratio_max)},
        {"phiByScale", numbers(r.phi_by_scale)},
        {"pairsScanned", r.pairs_scanned},
        {"exhaustivePairs", r.exhaustive_pairs},
    };
}

json to_json(const AxiomReport& r) {
    json k2 = json::array(), k3 = json::array();
    for (auto [id, t] : r.k2_violations) {
        k2.push_back({id, t});
    }
    for (auto [v, L] : r.k3_violations) {
        k3.push_back({v, L});
    }
    return {
        {"k1", r.k1},
        {"k2", r.k2},
        {"k3", r.k3},
        {"pass", r.pass()},
        {"lambda", r.lambda},
        {"beta", r.beta},
        {"tightestLambda", r.tightest_lambda},
        {"tightestBeta", r.tightest_beta},
        {"k2ViolationCount", r.k2_violation_count},
        {"k3ViolationCount", r.k3_violation_count},
        {"k2Violations", k2},
        {"k3Violations", k3},
    };
}

json to_json(const ShrinkageReport& r) {
    json bad = json::array();
    for (auto [id, t] : r.violations) {
        bad.push_back({id, t});
    }
    return {
        {"minSize", r.min_size},
        {"setsChecked", r.sets_checked},
        {"pairsChecked", r.pairs_checked},
        {"violationCount", r.violation_count},
        {"violations", bad},
    };
}

json to_json(const ScaleSetReport& r) {
    json missing = json::array();
    for (auto [t, k] : r.missing) {
        missing.push_back({t, k});
    }
    return {
        {"M", r.M},
        {"cellsChecked", r.cells_checked},
        {"missingCount", r.missing_count},
        {"missing", missing},
    };
}

json to_json(const CoherenceConstants& c) {
    return {
        {"lambda", c.lambda}, {"beta", c.beta},         {"r", c.r},
        {"gamma", c.gamma},   {"alphaGrowth", c.alpha_growth}, {"AGrowth", c.A_growth},
    };
}

json to_json(const IsotropyLemmaReport& r) {
    return {
        {"boundFactor", r.bound_factor},
        {"minRatio", number(r.min_ratio)},
        {"pairsChecked", r.pairs_checked},
        {"violationCount", r.violation_count},
        {"exhaustive", r.exhaustive},
    };
}

json to_json(const CostGeometry& cg) {
    json P = json::array();
    for (auto Pk : cg.class_sizes()) {
        P.push_back(Pk);
    }
    return {
        {"n", cg.n()},
        {"gamma", cg.gamma()},
        {"K", cg.K()},
        {"cost", cg.spec().describe()},
        {"P", P},
        {"p", std::vector<double>(cg.densities().begin(), cg.densities().end())},
        {"c", std::vector<double>(cg.costs().begin(), cg.costs().end())},
        {"Bbar", cg.unconstrained_budget()},
        {"alphaGrowth", number(cg.alpha_growth())},
    };
}

json to_json(const EntropicSolution& s) {
    return {
        {"B", s.B},
        {"lambda", number(s.lambda)},
        {"aStar", numbers(s.aStar)},
        {"mStar", numbers(s.mStar)},
        {"qStar", numbers(s.qStar)},
        {"Bbar", s.Bbar},
    };
}

json to_json(const SandwichParams& s) {
    return {
        {"mu", number(s.mu)},
        {"tau", number(s.tau)},
        {"epsilon", number(s.epsilon)},
        {"delta", number(s.delta)},
        {"deltaAsymptotic", number(s.delta_asymptotic)},
        {"valid", s.valid},
    };
}

json to_json(const Thresholds& t) {
    return {
        {"theta", t.theta},
        {"kTheta", t.k_theta},
        {"kMin", t.k_min},
        {"lambda0", number(t.lambda0)},
        {"B0", number(t.B0)},
        {"lambda0Exact", number(t.lambda0_exact)},
        {"B0Exact", number(t.B0_exact)},
        {"lambdaTheta", number(t.lambda_theta)},
        {"LambdaTheta", number(t.Lambda_theta)},
        {"Bminus", number(t.Bminus)},
        {"Bplus", number(t.Bplus)},
        {"Ba", t.Ba ? number(*t.Ba) : json(nullptr)},
        {"excludedScales", t.excluded_scales},
    };
}

json to_json(const BatchStats& b) {
    return {
        {"pairs", b.pairs},
        {"budget", b.budget},
        {"success_rate", b.success_rate},
        {"p50", number(b.p50)},
        {"p90", number(b.p90)},
        {"p99", number(b.p99)},
        {"mean_hops", b.mean_hops},
        {"mean_long_edges", b.mean_long_edges},
    };
}

json to_json(const EdgeProfile& m) {
    return json(m.m);
}

json summary_json(const EdgeSet& e) {
    return {
        {"n", e.n},
        {"gamma", e.gamma},
        {"seed", e.seed},
        {"edges", e.edges.size()},
        {"byScale", e.by_scale},
    };
}

}
