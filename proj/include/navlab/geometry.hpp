#ifndef navlab_geometry_hpp
#define navlab_geometry_hpp

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace navlab {

using VertexId = std::uint32_t;

class SetSystem;

enum class GeometryKind { Cycle, Torus, SetSystem };

/// True when d is at most limit, allowing for rounding in limits such as
/// gamma^k or rho * d(s, t).
inline bool within(double d, double limit) {
    return d <= limit + 1e-9 * (limit > 1.0 ? limit : 1.0);
}

/*
 * A vertex set with a semi-metric and its gamma-scale decomposition.
 *
 * Cycles and tori are lattices: vertex v of a torus with side s and D
 * dimensions has coordinates (v mod s, (v / s) mod s, ...), and distance is
 * the L1 norm with per-axis wraparound. A cycle is the one-dimensional case.
 * Set-system geometries delegate distances to the shared SetSystem.
 *
 * Geometry is an immutable value; copies share the set system.
 */
class Geometry {
public:
    static Geometry cycle(std::size_t n, double gamma = 2.0);
    static Geometry torus(std::size_t side, std::size_t dims, double gamma = 2.0);
    static Geometry set_system(std::shared_ptr<const SetSystem> system, double gamma);

    GeometryKind kind() const { return kind_; }
    std::size_t size() const { return n_; }
    double gamma() const { return gamma_; }
    /// Number of scales K, the smallest K >= 1 with gamma^K >= n.
    int scale_count() const { return scale_count_; }
    bool is_lattice() const { return kind_ != GeometryKind::SetSystem; }
    std::size_t side() const { return side_; }
    std::size_t dims() const { return dims_; }
    const SetSystem* system() const { return system_.get(); }
    std::shared_ptr<const SetSystem> shared_system() const { return system_; }

    double distance(VertexId u, VertexId v) const;
    double max_distance() const { return max_distance_; }

    /// gamma^k for k in [0, K].
    double scale_radius(int k) const;
    /// max(1, ceil(log_gamma d)); distances in (0, gamma] map to scale 1.
    int scale_of_distance(double d) const;
    int scale_index(VertexId u, VertexId v) const;
    /// Largest k with gamma^k <= max_distance(); scales above it are boundary
    /// scales that a finite geometry cannot fill. Zero when even gamma^1
    /// exceeds the diameter.
    int interior_scale_count() const { return interior_scales_; }

    /// |{t != u : d(u, t) <= radius}|.
    std::size_t ball_count(VertexId u, double radius) const;
    /// P_k(v), the number of vertices whose scale from v is k.
    std::size_t shell_count(VertexId v, int k) const;
    /// |{v : d(s, v) <= gamma^{k_st} and d(v, t) <= rho * d(s, t)}|.
    std::size_t helpful_count(VertexId s, VertexId t, double rho) const;

    /// Lattice only: number of vertices at exact distance j from any vertex.
    std::span<const std::size_t> distance_histogram() const { return histogram_; }
    /// Lattice only: v shifted by the coordinates of offset.
    VertexId translate(VertexId v, VertexId offset) const;
    /// Lattice only: the offset o with translate(o, offset) == 0.
    VertexId negate(VertexId offset) const;
    std::vector<std::size_t> coordinates(VertexId v) const;
    VertexId from_coordinates(std::span<const std::size_t> coords) const;

    /// CLI spec string, e.g. "cycle:n=1024".
    std::string describe() const;

private:
    Geometry() = default;
    void init_scales();
    void init_lattice();

    GeometryKind kind_ = GeometryKind::Cycle;
    std::size_t n_ = 0;
    double gamma_ = 2.0;
    int scale_count_ = 1;
    int interior_scales_ = 0;
    std::size_t side_ = 0;
    std::size_t dims_ = 0;
    double max_distance_ = 0.0;
    std::vector<double> powers_;
    std::vector<std::size_t> histogram_;
    // ball_prefix_[j] = number of vertices at distance <= j, center included
    std::vector<std::size_t> ball_prefix_;
    std::shared_ptr<const SetSystem> system_;
};

struct CoherenceReport {
    GeometryKind kind = GeometryKind::Cycle;
    std::string geometry;
    std::size_t n = 0;
    double gamma = 0.0;
    int K = 0;
    double rho = 0.0;
    /// Scales used for the pass flags: 1..interior (see Geometry).
    int interior_scales = 0;
    double alpha_growth = 0.0;
    double A_growth = 0.0;
    double phi = 0.0;
    bool pass_h1 = false;
    bool pass_h2 = false;
    /// Per scale k = 1..K, min and max over v of P_k(v) / gamma^k.
    std::vector<double> shell_ratio_min;
    std::vector<double> shell_ratio_max;
    /// Per scale k = 1..K, min over scanned pairs with k_st = k of
    /// |D_rho(s,t)| / gamma^k; NaN when no pair at that scale was scanned.
    std::vector<double> phi_by_scale;
    std::size_t pairs_scanned = 0;
    bool exhaustive_pairs = false;
};

/// Exact H1 scan only (all v, all k).
struct GrowthConstants {
    double alpha = 0.0;
    double A = 0.0;
    int interior_scales = 0;
    std::vector<double> ratio_min;
    std::vector<double> ratio_max;
};
GrowthConstants growth_constants(const Geometry& g);

/// Exact H1 scan; H2 over all ordered pairs when n^2 <= 10^6, otherwise over
/// sample_pairs seeded random pairs.
CoherenceReport verify_coherence(const Geometry& g, double rho, std::size_t sample_pairs,
                                 std::uint64_t seed);

/*
 * Base edge set E0 with the local t-connection resolver. Built for lattice
 * geometries from the unit-distance pairs.
 */
class Substrate {
public:
    /// Throws std::logic_error("substrate axiom violated") if some resolved
    /// pair fails d(v, t) <= d(s, t) - 1.
    static Substrate build(const Geometry& g);

    const Geometry& geometry() const { return geometry_; }
    std::span<const VertexId> neighbors(VertexId v) const;
    bool has_edge(VertexId u, VertexId v) const;
    std::size_t edge_count() const { return adjacency_.size() / 2; }

    /// The neighbor of s closest to t, ties broken by smallest index.
    VertexId local_connection(VertexId s, VertexId t) const;
    /// Iterates local t-connections from s for at most max_len steps.
    std::vector<VertexId> local_path(VertexId s, VertexId t, std::size_t max_len) const;

private:
    explicit Substrate(Geometry g) : geometry_(std::move(g)) {}

    Geometry geometry_;
    std::vector<std::size_t> offsets_;
    std::vector<VertexId> adjacency_;
};

}

#endif /* navlab_geometry_hpp */
