#ifndef navlab_harness_hpp
#define navlab_harness_hpp

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <optional>
#include <string>
#include <vector>

#include "navlab/geometry.hpp"
#include "navlab/measure.hpp"
#include "navlab/routing.hpp"
#include "navlab/serialize.hpp"
#include "navlab/stats.hpp"

namespace navlab {

inline constexpr const char* kVersion = "navlab 0.1.0";

/// Bad specs, configs or flags; the CLI maps these to exit code 2.
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// "cycle:n=1024[,gamma=2]", "torus:side=64,dims=2[,gamma=2]",
/// "setsystem:branch=2,depth=10" or "setsystem:file=<path>".
Geometry parse_geometry(const std::string& spec);

enum class SamplerKind { Product, Rba, Exact };

struct SweepGrid {
    int points = 7;
    /// Grid is geometric over [Bminus * low, Bplus * high].
    double low = 0.25;
    double high = 1.0;
};

struct ExperimentConfig {
    std::string geometry = "cycle:n=1024";
    std::string cost = "logdensity:alpha=1";
    double theta = 1.0;
    double rho = 0.5;
    /// Numbers or symbolic names: "Ba", "Bminus", "Bplus", "Bbar", "B0",
    /// optionally scaled as "Ba*0.5". Empty means the sweep grid.
    std::vector<json> budgets;
    SweepGrid sweep;
    SamplerKind sampler = SamplerKind::Product;
    std::size_t edges_per_vertex = 1;
    std::size_t pairs = 1000;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    /// Route step budget; 0 means ceil(10 (ln n)^2).
    std::size_t route_budget = 0;
    GreedyMode greedy = GreedyMode::Fallback;
    std::size_t sample_pairs = 100000;
    std::size_t samples = 10000;
    double perturb = 1.0;
    std::vector<double> exponents{0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4};
    std::string out = "results";

    static ExperimentConfig from_json(const json& j);
    json to_json() const;
    /// FNV-1a 64 of to_json().dump(), as 16 hex digits.
    std::string hash() const;
};

std::string fnv1a_hex(const std::string& text);

/// Resolves a budget entry against a cost geometry.
double resolve_budget(const json& entry, const CostGeometry& cg, double theta);

struct ScaleComparison {
    int k = 0;
    double mean_exact = 0.0;
    double mean_product = 0.0;
    double pooled_se = 0.0;
    /// (mean_exact - mean_product) / pooled_se.
    double z = 0.0;
    double ks = 0.0;
    /// Exact-law mean of m_k when the profile law is tabulated.
    std::optional<double> mean_law;
};

struct SandwichCheck {
    double B = 0.0;
    std::size_t samples = 0;
    double perturb = 1.0;
    std::string method;
    double acceptance_rate = 1.0;
    std::vector<ScaleComparison> scales;
    /// Every scale within 3 pooled standard errors.
    bool consistent = false;
    /// Exact draws against the tabulated profile law (Enumerate only).
    std::optional<ChiSquare> exact_vs_law;
    std::optional<ChiSquare> product_vs_law;
};

/// N exact-law profiles against N product profiles at qStar(B) * perturb
/// (capped at 1). Throws std::invalid_argument("no samples") for N = 0.
SandwichCheck sandwich_check(const CostGeometry& cg, double B, std::size_t N, double perturb, std::uint64_t seed);

json to_json(const SandwichCheck& s);

/// Runs the CLI; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Comma-separated CSV value for a double: shortest round-trip form, empty
/// when not finite.
std::string csv_number(double x);

}

#endif /* navlab_harness_hpp */
