#ifndef navlab_sampler_hpp
#define navlab_sampler_hpp

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "navlab/geometry.hpp"
#include "navlab/measure.hpp"
#include "navlab/rng.hpp"

namespace navlab {

using Edge = std::pair<VertexId, VertexId>;

/// Undirected long-range edges, stored as sorted (u < v) pairs.
struct EdgeSet {
    std::size_t n = 0;
    double gamma = 2.0;
    std::uint64_t seed = 0;
    std::vector<Edge> edges;
    /// Realized edge profile m(E); empty when the set was read from a file.
    std::vector<std::uint64_t> by_scale;

    std::size_t size() const { return edges.size(); }

    /// "n <count> gamma <g> seed <s>" then one "u v" line per edge.
    void write(std::ostream& out) const;
    static EdgeSet read(std::istream& in);
};

/// Sorts, orients (u < v) and removes duplicate edges.
void normalize_edges(std::vector<Edge>& edges);

/*
 * Bijection between [0, P_k) and the unordered pairs at scale k.
 *
 * Lattices group the nonzero offsets of each class into one representative
 * per {o, -o}. An offset with o != -o yields n pairs (u, u + o); a
 * self-inverse offset yields n/2 pairs, indexed by the vertices whose
 * coordinate is below side/2 on the first axis where the offset is side/2.
 * Set-system geometries keep an explicit pair list.
 */
class ClassEnumerator {
public:
    explicit ClassEnumerator(const CostGeometry& cg);

    int K() const { return static_cast<int>(sizes_.size()); }
    std::uint64_t class_size(int k) const { return sizes_[k - 1]; }
    /// The pair with the given index in class k, as (u, v) with u < v.
    Edge pair_at(int k, std::uint64_t index) const;

private:
    Edge lattice_pair(int k, std::uint64_t index) const;

    const Geometry* geometry_;
    std::vector<std::uint64_t> sizes_;
    // lattice classes
    std::vector<std::vector<VertexId>> half_;
    std::vector<std::vector<VertexId>> self_inverse_;
    // set-system classes
    std::vector<std::vector<Edge>> pairs_;
};

/// count distinct values drawn uniformly from [0, range), sorted.
std::vector<std::uint64_t> sample_distinct(Philox4x32& rng, std::uint64_t range, std::uint64_t count);

/// Binomial(P, q) draw.
std::uint64_t sample_binomial(Philox4x32& rng, std::uint64_t P, double q);

/// Per-class counts of one product-measure draw, from a single stream.
EdgeProfile sample_product_profile(const CostGeometry& cg, std::span<const double> qStar, Philox4x32& rng);

/// Independent inclusion of every pair with its class probability.
EdgeSet sample_product(const CostGeometry& cg, std::span<const double> qStar, std::uint64_t seed);

struct RbaWeights {
    /// weight[u] = 1 / N_u(d(v, u)); weight[v] = 0.
    std::vector<double> weight;
    double Z = 0.0;
};

RbaWeights rba_weights(const Geometry& g, VertexId v);

/// The destinations v draws (with replacement) in sample_rba(g, count, seed).
std::vector<VertexId> rba_targets(const Geometry& g, VertexId v, std::size_t count, std::uint64_t seed);

/// Per vertex, edges_per_vertex draws from the RBA law with replacement.
EdgeSet sample_rba(const Geometry& g, std::size_t edges_per_vertex, std::uint64_t seed);

enum class ExactMethod { Auto, Enumerate, Rejection };

/*
 * Uniform sampler on G(B) = {E : sum_k c_k m_k(E) <= B n}.
 *
 * The profile law is P(m) proportional to prod_k binom(P_k, m_k) over the
 * feasible box. Enumerate tabulates it when the box has at most 10^7
 * feasible points. Rejection proposes m_k ~ Binomial(P_k, q_k(lambda(B)))
 * and accepts a feasible proposal with probability
 * exp(-lambda (B n - sum_k c_k m_k)), which leaves the same law. Given the
 * profile, pairs are uniform within each class.
 */
class ExactBoundedCostSampler {
public:
    static constexpr std::size_t kMaxProfiles = 10000000;

    ExactBoundedCostSampler(const CostGeometry& cg, double B, ExactMethod method = ExactMethod::Auto);

    ExactMethod method() const { return method_; }
    /// Feasible profile count (Enumerate only).
    std::size_t profile_count() const { return profiles_.size() / std::max(1, cg_->K()); }
    double budget() const { return B_; }

    EdgeProfile sample_profile(Philox4x32& rng) const;
    EdgeSet sample(std::uint64_t seed) const;
    /// Proposals made by Rejection so far.
    std::uint64_t proposals() const { return proposals_; }
    std::uint64_t acceptances() const { return acceptances_; }

private:
    const CostGeometry* cg_;
    double B_;
    double cap_;
    ExactMethod method_;
    std::vector<std::uint64_t> profiles_;
    std::vector<double> cdf_;
    double lambda_ = 0.0;
    std::vector<double> q_;
    mutable std::uint64_t proposals_ = 0;
    mutable std::uint64_t acceptances_ = 0;
};

/// Throws std::invalid_argument("lattice too large") when Enumerate is
/// forced on a box with more than 10^7 feasible profiles.
EdgeSet sample_bounded_cost_exact(const CostGeometry& cg, double B, std::uint64_t seed,
                                  ExactMethod method = ExactMethod::Auto);

/// Per-class counts of an edge set.
EdgeProfile edge_profile_of(const CostGeometry& cg, const EdgeSet& e);

}

#endif /* navlab_sampler_hpp */
