#ifndef navlab_routing_hpp
#define navlab_routing_hpp

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "navlab/geometry.hpp"
#include "navlab/sampler.hpp"

namespace navlab {

/*
 * G(V, E0 + E) with a merged, sorted adjacency per vertex. Long-range edges
 * that duplicate substrate edges are merged into them, so a hop is long only
 * when it leaves the substrate.
 */
class NavGraph {
public:
    NavGraph(const Substrate& substrate, const EdgeSet& long_edges);
    /// Long-range edges only; greedy routing without fallback.
    NavGraph(const Geometry& g, const EdgeSet& long_edges);

    const Geometry& geometry() const { return geometry_; }
    const Substrate* substrate() const { return substrate_ ? &*substrate_ : nullptr; }
    std::size_t size() const { return geometry_.size(); }

    std::span<const VertexId> neighbors(VertexId v) const;
    /// Neighbors over edges outside the substrate.
    std::span<const VertexId> long_neighbors(VertexId v) const;
    bool is_long(VertexId u, VertexId v) const;
    std::size_t long_edge_count() const { return long_adjacency_.size() / 2; }
    std::size_t edge_count() const { return adjacency_.size() / 2; }

private:
    void build(const std::vector<Edge>& edges);

    Geometry geometry_;
    std::optional<Substrate> substrate_;
    std::vector<std::size_t> offsets_;
    std::vector<VertexId> adjacency_;
    std::vector<std::size_t> long_offsets_;
    std::vector<VertexId> long_adjacency_;
};

struct RouteResult {
    VertexId source = 0;
    VertexId target = 0;
    std::size_t hops = 0;
    bool success = false;
    std::vector<VertexId> path;
    std::size_t long_edges_used = 0;
    std::size_t budget = 0;
};

enum class GreedyMode {
    /// Strict-improvement greedy with the local t-connection as fallback.
    Fallback,
    /// Best strictly improving neighbor; stalls when none exists.
    Pure,
};

/// Moves to the neighbor closest to t among those strictly closer than the
/// current vertex (smallest index on ties).
RouteResult greedy_route(const NavGraph& ng, VertexId s, VertexId t, std::size_t budget,
                         GreedyMode mode = GreedyMode::Fallback, bool record_path = true);

struct ReducibilityProbe {
    VertexId source = 0;
    VertexId target = 0;
    double p = 1.0;
    double C = 1.0;
    double rho = 0.5;
    /// ceil(C (ln n)^p) local-path vertices scanned at most.
    std::size_t limit = 0;
    std::size_t examined = 0;
    bool has_witness = false;
    /// u on the local path and v its long-range neighbor (v == u when the
    /// local path itself reached rho d(s, t)).
    VertexId witness_u = 0;
    VertexId witness_v = 0;
};

ReducibilityProbe probe_reducibility(const NavGraph& ng, VertexId s, VertexId t, double p, double C, double rho);

/// Local-path vertices scanned until a witness appears (unbounded scan; t
/// itself always qualifies). Needs a substrate.
std::size_t reducibility_index(const NavGraph& ng, VertexId s, VertexId t, double rho);

struct BatchStats {
    std::size_t pairs = 0;
    std::size_t budget = 0;
    double success_rate = 0.0;
    /// Nearest-rank hop quantiles over all trials.
    double p50 = 0.0;
    double p90 = 0.0;
    double p99 = 0.0;
    double mean_hops = 0.0;
    double mean_long_edges = 0.0;
};

/// ceil(10 (ln n)^2).
std::size_t default_budget(std::size_t n);

/// Trial i routes a uniform pair s != t drawn from stream (seed, i).
BatchStats route_trial_batch(const NavGraph& ng, std::size_t pairs, std::size_t budget, std::uint64_t seed,
                             GreedyMode mode = GreedyMode::Fallback);

/// The pair used by trial i of route_trial_batch.
std::pair<VertexId, VertexId> trial_pair(std::size_t n, std::uint64_t seed, std::size_t trial);

/// Nearest-rank quantile of sorted data, q in (0, 1].
double nearest_rank(std::span<const double> sorted, double q);

}

#endif /* navlab_routing_hpp */
