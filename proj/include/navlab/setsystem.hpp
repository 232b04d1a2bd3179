#ifndef navlab_setsystem_hpp
#define navlab_setsystem_hpp

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "navlab/geometry.hpp"

namespace navlab {

/*
 * A collection of subsets of V = {0, ..., n-1} with the induced semi-metric
 * d(u, v) = (size of the smallest set containing both) - 1.
 *
 * Sets are stored sorted and deduplicated, ordered by (size, contents), so
 * set ids increase with set size. Each vertex keeps the ids of the sets that
 * contain it; the first common id of two membership lists is the smallest
 * common set.
 */
class SetSystem {
public:
    /// lambda and beta default to the tightest values witnessed by the (K2)
    /// and (K3) scans (lambda 1/2 when no pair constrains it, beta at least 1).
    SetSystem(std::size_t n, std::vector<std::vector<VertexId>> sets,
              std::optional<double> lambda = std::nullopt,
              std::optional<double> beta = std::nullopt);

    /// Aligned blocks of size branch^j, j = 0..depth, over branch^depth
    /// vertices; lambda = 1/branch and beta measured.
    static SetSystem hierarchy(std::size_t branch, std::size_t depth);

    /// Line format: "n <count>", then one whitespace-separated set per line.
    static SetSystem load(std::istream& in);
    static SetSystem load_file(const std::string& path);
    void save(std::ostream& out) const;

    std::size_t size() const { return n_; }
    std::size_t set_count() const { return offsets_.size() - 1; }
    std::span<const VertexId> set(std::size_t id) const;
    std::size_t set_size(std::size_t id) const { return offsets_[id + 1] - offsets_[id]; }
    /// Ids of the sets containing v, ascending (hence by size).
    std::span<const std::uint32_t> memberships(VertexId v) const;
    bool contains(std::size_t id, VertexId v) const;

    double lambda() const { return lambda_; }
    double beta() const { return beta_; }

    std::size_t distance(VertexId u, VertexId v) const;
    /// |{t != u : d(u, t) <= radius}|.
    std::size_t ball_count(VertexId u, double radius) const;
    /// |S_L(v)|: size of the union of sets containing v with size <= L.
    std::size_t union_size(VertexId v, std::size_t L) const;

private:
    void build_index();

    std::size_t n_ = 0;
    std::vector<std::size_t> offsets_;
    std::vector<VertexId> members_;
    std::vector<std::size_t> membership_offsets_;
    std::vector<std::uint32_t> membership_;
    // per vertex: (set size, |union of its sets up to that size|), one entry
    // per distinct size, ascending
    std::vector<std::size_t> profile_offsets_;
    std::vector<std::pair<std::size_t, std::size_t>> profile_;
    double lambda_ = 0.5;
    double beta_ = 1.0;
};

struct AxiomReport {
    bool k1 = false;
    bool k2 = false;
    bool k3 = false;
    double lambda = 0.0;
    double beta = 0.0;
    /// Largest lambda for which (K2) holds; 1 when no pair constrains it.
    double tightest_lambda = 1.0;
    /// max over v, L of |S_L(v)| / L.
    double tightest_beta = 0.0;
    std::size_t k2_violation_count = 0;
    std::size_t k3_violation_count = 0;
    /// (set id, t), sorted, at most kMaxListed entries.
    std::vector<std::pair<std::size_t, VertexId>> k2_violations;
    std::vector<std::pair<VertexId, std::size_t>> k3_violations;

    bool pass() const { return k1 && k2 && k3; }
    static constexpr std::size_t kMaxListed = 64;
};

AxiomReport check_axioms(const SetSystem& ss);

struct ShrinkageReport {
    double min_size = 0.0;
    std::size_t sets_checked = 0;
    std::size_t pairs_checked = 0;
    std::size_t violation_count = 0;
    std::vector<std::pair<std::size_t, VertexId>> violations;
};

/// For every S with |S| >= 1/(lambda - lambda^2) and t in S, looks for a
/// t-bound S' with lambda^2 |S| <= |S'| <= lambda |S|.
ShrinkageReport check_shrinkage(const SetSystem& ss);

/// Intervals I_k = (lambda^{-2(k-1)}, lambda^{-2k}], k = 1..M, with M the
/// smallest integer such that lambda^{-2M} >= n. M is capped at 64.
struct ScalePartition {
    int M = 0;
    std::vector<double> upper;  // upper[k] = lambda^{-2k}, k = 0..M
    int interval_of(double size) const;  // 0 if outside (1, upper[M]]
};
ScalePartition scale_partition(const SetSystem& ss);

struct ScaleSetReport {
    int M = 0;
    std::size_t cells_checked = 0;
    std::size_t missing_count = 0;
    /// (t, k) cells without a t-bound set of size in I_k; sorted.
    std::vector<std::pair<VertexId, int>> missing;
};
ScaleSetReport check_scale_sets(const SetSystem& ss);

struct CoherenceConstants {
    double lambda = 0.0;
    double beta = 0.0;
    int r = 0;
    double gamma = 0.0;
    double alpha_growth = 0.0;
    double A_growth = 0.0;
};
/// r is the smallest integer >= 2 with lambda^{-2(r-1)} > beta, gamma =
/// lambda^{-2r}, alpha = lambda^2 - beta/gamma, A = beta - lambda^2/gamma.
CoherenceConstants coherence_constants(double lambda, double beta);

/// Throws std::domain_error when check_axioms fails.
Geometry as_geometry(std::shared_ptr<const SetSystem> ss);

struct IsotropyLemmaReport {
    double bound_factor = 0.0;  // alpha / gamma
    double min_ratio = 0.0;     // min |G_k ∪ G_{k-1}| / gamma^{k_st}
    std::size_t pairs_checked = 0;
    std::size_t violation_count = 0;
    bool exhaustive = false;
};

/// Counts, for pairs with |S_st| >= 1/(lambda - lambda^2), the vertices of
/// S_st in the top two scales from s that lie within lambda |S_st| of t.
IsotropyLemmaReport check_isotropy_lemma(const Geometry& g, std::size_t sample_pairs,
                                         std::uint64_t seed);

}

#endif /* navlab_setsystem_hpp */
