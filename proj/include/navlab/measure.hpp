#ifndef navlab_measure_hpp
#define navlab_measure_hpp

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "navlab/geometry.hpp"

namespace navlab {

enum class CostFamily { Explicit, Indexing, LogDensity };

/// "indexing:alpha=1", "logdensity:alpha=1" or "explicit:1,2,3".
struct CostSpec {
    CostFamily family = CostFamily::Indexing;
    double alpha = 1.0;
    std::vector<double> values;

    static CostSpec parse(const std::string& text);
    std::string describe() const;
};

/*
 * Per-scale edge classes of a geometry with a scale-consistent cost.
 *
 * Class k holds the P_k unordered pairs whose scale index is k, and every such
 * pair costs c_k. K is the top nonempty scale; the budget constraint is
 * sum_k c_k m_k <= B n.
 */
class CostGeometry {
public:
    static CostGeometry build(const Geometry& g, const CostSpec& spec);
    /// Abstract instance without a vertex geometry. alpha_growth defaults to
    /// min_k p_k / gamma^k.
    static CostGeometry from_classes(std::size_t n, std::vector<std::uint64_t> P, std::vector<double> costs,
                                     double gamma = 2.0, std::optional<double> alpha_growth = std::nullopt);

    std::size_t n() const { return n_; }
    int K() const { return static_cast<int>(P_.size()); }
    double gamma() const { return gamma_; }
    std::uint64_t P(int k) const { return P_[k - 1]; }
    double p(int k) const { return p_[k - 1]; }
    double c(int k) const { return c_[k - 1]; }
    std::span<const std::uint64_t> class_sizes() const { return P_; }
    std::span<const double> densities() const { return p_; }
    std::span<const double> costs() const { return c_; }
    std::uint64_t total_pairs() const;
    /// (H1) growth constant used by the richness threshold k_theta.
    double alpha_growth() const { return alpha_growth_; }
    const CostSpec& spec() const { return spec_; }
    bool has_geometry() const { return geometry_.has_value(); }
    const Geometry& geometry() const;

    /// Bbar = sum_k p_k c_k / 2.
    double unconstrained_budget() const;

private:
    CostGeometry() = default;
    void validate() const;

    std::size_t n_ = 0;
    double gamma_ = 2.0;
    std::vector<std::uint64_t> P_;
    std::vector<double> p_;
    std::vector<double> c_;
    double alpha_growth_ = 0.0;
    CostSpec spec_;
    std::optional<Geometry> geometry_;
};

struct EdgeProfile {
    std::vector<std::uint64_t> m;
};

/// log binom(P, m) via lgamma.
double log_binomial(std::uint64_t P, std::uint64_t m);
double log_binomial(double P, double m);

/// sum_k log binom(P_k, m_k).
double profile_entropy(const CostGeometry& cg, const EdgeProfile& m);

/// sum_k -[m log(m/P) + (P-m) log((P-m)/P)] at real counts m_k.
double continuous_entropy(const CostGeometry& cg, std::span<const double> m);

/// 1 / (1 + exp(x)) without overflow.
double logistic_tail(double x);

/// g(lambda) = sum_k c_k p_k / (1 + exp(lambda c_k)).
double g_of_lambda(const CostGeometry& cg, double lambda);

/// The lambda >= 0 with g(lambda) = B; 0 for B >= Bbar, +inf for B = 0.
double invert_budget(const CostGeometry& cg, double B);

struct EntropicSolution {
    double B = 0.0;
    double lambda = 0.0;
    double Bbar = 0.0;
    std::vector<double> aStar;
    std::vector<double> mStar;
    std::vector<double> qStar;

    /// |sum_k aStar_k c_k - min(B, Bbar)|.
    double budget_residual(const CostGeometry& cg) const;
    /// max_k |log(aStar_k / (p_k - aStar_k)) + lambda c_k|; 0 at B = 0.
    double stationarity_residual(const CostGeometry& cg) const;
};

EntropicSolution solve_profile(const CostGeometry& cg, double B);

struct SandwichParams {
    double mu = 0.0;
    double tau = 0.0;
    double epsilon = 0.0;
    /// 2 exp(-mu (epsilon^2 / 12 - tau)).
    double delta = 0.0;
    /// 2 n^{-5K}.
    double delta_asymptotic = 0.0;
    /// epsilon^2 > 12 tau.
    bool valid = false;
};

/// Throws std::domain_error("degenerate budget: mu = 0") when some class is
/// empty or full at the optimum.
SandwichParams sandwich_params(const CostGeometry& cg, const EntropicSolution& sol);

struct Thresholds {
    double theta = 0.0;
    double k_theta = 0.0;
    int k_min = 1;
    /// min_k (1/c_k) log(n p_k / (5K log^2 n)), over k with p_k > 1.
    double lambda0 = 0.0;
    double B0 = 0.0;
    /// Largest lambda with mu(lambda) >= 5K log^2 n exactly:
    /// min_k (1/c_k) log(n p_k / (5K log^2 n) - 1).
    double lambda0_exact = 0.0;
    double B0_exact = 0.0;
    double lambda_theta = 0.0;
    double Lambda_theta = 0.0;
    /// max(B0, g(lambda_theta)).
    double Bminus = 0.0;
    /// g(max(0, Lambda_theta)).
    double Bplus = 0.0;
    /// g(alpha) for indexing and log-density costs.
    std::optional<double> Ba;
    /// Scales left out of lambda0 because p_k <= 1.
    std::vector<int> excluded_scales;
};

/// Throws std::domain_error when no scale k >= k_theta has p_k > 1.
Thresholds thresholds(const CostGeometry& cg, double theta);

/// Exhaustive integer maximizer of profile_entropy under sum c_k m_k <= B n;
/// ties go to the lexicographically smallest profile. K <= 4, P_k <= 64.
EdgeProfile brute_force_profile(const CostGeometry& cg, double B);

}

#endif /* navlab_measure_hpp */
