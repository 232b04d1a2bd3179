#include "navlab/routing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace navlab {

using namespace std;

NavGraph::NavGraph(const Substrate& substrate, const EdgeSet& long_edges)
    : geometry_(substrate.geometry()), substrate_(substrate) {
    build(long_edges.edges);
}

NavGraph::NavGraph(const Geometry& g, const EdgeSet& long_edges) : geometry_(g) {
    build(long_edges.edges);
}

void NavGraph::build(const vector<Edge>& edges) {
    const size_t n = geometry_.size();
    vector<vector<VertexId>> all(n), extra(n);
    if (substrate_) {
        for (VertexId v = 0; v < n; ++v) {
            auto nbrs = substrate_->neighbors(v);
            all[v].assign(nbrs.begin(), nbrs.end());
        }
    }
    for (auto [u, v] : edges) {
        if (u >= n || v >= n || u == v) {
            throw invalid_argument("long-range edge with invalid vertices");
        }
        all[u].push_back(v);
        all[v].push_back(u);
        if (!substrate_ || !substrate_->has_edge(u, v)) {
            extra[u].push_back(v);
            extra[v].push_back(u);
        }
    }
    auto flatten = [n](vector<vector<VertexId>>& lists, vector<size_t>& offsets, vector<VertexId>& flat) {
        offsets.assign(n + 1, 0);
        flat.clear();
        for (size_t v = 0; v < n; ++v) {
            auto& l = lists[v];
            sort(l.begin(), l.end());
            l.erase(unique(l.begin(), l.end()), l.end());
            flat.insert(flat.end(), l.begin(), l.end());
            offsets[v + 1] = flat.size();
        }
    };
    flatten(all, offsets_, adjacency_);
    flatten(extra, long_offsets_, long_adjacency_);
}

span<const VertexId> NavGraph::neighbors(VertexId v) const {
    return {adjacency_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
}

span<const VertexId> NavGraph::long_neighbors(VertexId v) const {
    return {long_adjacency_.data() + long_offsets_[v], long_offsets_[v + 1] - long_offsets_[v]};
}

bool NavGraph::is_long(VertexId u, VertexId v) const {
    auto nbrs = long_neighbors(u);
    return binary_search(nbrs.begin(), nbrs.end(), v);
}

RouteResult greedy_route(const NavGraph& ng, VertexId s, VertexId t, size_t budget, GreedyMode mode,
                         bool record_path) {
    if (budget < 1) {
        throw invalid_argument("budget must be >= 1");
    }
    const Geometry& g = ng.geometry();
    if (s >= g.size() || t >= g.size()) {
        throw invalid_argument("route endpoint out of range");
    }
    RouteResult r;
    r.source = s;
    r.target = t;
    r.budget = budget;
    if (record_path) {
        r.path.push_back(s);
    }
    VertexId v = s;
    double dv = g.distance(v, t);
    while (v != t && r.hops < budget) {
        VertexId best = v;
        double best_distance = dv;
        for (VertexId u : ng.neighbors(v)) {
            double du = g.distance(u, t);
            if (du < best_distance) {
                best_distance = du;
                best = u;
            }
        }
        if (best == v) {
            if (mode == GreedyMode::Pure || !ng.substrate()) {
                break;
            }
            best = ng.substrate()->local_connection(v, t);
            best_distance = g.distance(best, t);
        }
        if (ng.is_long(v, best)) {
            ++r.long_edges_used;
        }
        v = best;
        dv = best_distance;
        ++r.hops;
        if (record_path) {
            r.path.push_back(v);
        }
    }
    r.success = v == t;
    return r;
}

namespace {

// first witness at local-path vertex u: the path itself or a long edge
bool witness_at(const NavGraph& ng, VertexId u, VertexId t, double limit, VertexId& v_out) {
    const Geometry& g = ng.geometry();
    if (within(g.distance(u, t), limit)) {
        v_out = u;
        return true;
    }
    double best = numeric_limits<double>::infinity();
    for (VertexId v : ng.long_neighbors(u)) {
        double dv = g.distance(v, t);
        if (within(dv, limit) && dv < best) {
            best = dv;
            v_out = v;
        }
    }
    return isfinite(best);
}

}

ReducibilityProbe probe_reducibility(const NavGraph& ng, VertexId s, VertexId t, double p, double C, double rho) {
    if (s == t) {
        throw invalid_argument("probe needs s != t");
    }
    if (!(C > 0.0) || !(rho > 0.0 && rho < 1.0)) {
        throw invalid_argument("probe needs C > 0 and 0 < rho < 1");
    }
    if (!ng.substrate()) {
        throw invalid_argument("probe needs a substrate");
    }
    const Geometry& g = ng.geometry();
    ReducibilityProbe probe;
    probe.source = s;
    probe.target = t;
    probe.p = p;
    probe.C = C;
    probe.rho = rho;
    probe.limit = static_cast<size_t>(ceil(C * pow(log(static_cast<double>(g.size())), p) - 1e-12));
    const double limit = rho * g.distance(s, t);
    VertexId u = s;
    while (probe.examined < probe.limit) {
        ++probe.examined;
        VertexId v;
        if (witness_at(ng, u, t, limit, v)) {
            probe.has_witness = true;
            probe.witness_u = u;
            probe.witness_v = v;
            break;
        }
        u = ng.substrate()->local_connection(u, t);
    }
    return probe;
}

size_t reducibility_index(const NavGraph& ng, VertexId s, VertexId t, double rho) {
    if (s == t) {
        throw invalid_argument("probe needs s != t");
    }
    if (!ng.substrate()) {
        throw invalid_argument("probe needs a substrate");
    }
    const double limit = rho * ng.geometry().distance(s, t);
    VertexId u = s;
    for (size_t examined = 1;; ++examined) {
        VertexId v;
        if (witness_at(ng, u, t, limit, v)) {
            return examined;
        }
        u = ng.substrate()->local_connection(u, t);
    }
}

size_t default_budget(size_t n) {
    double ln = log(static_cast<double>(n));
    return static_cast<size_t>(ceil(10.0 * ln * ln - 1e-9));
}

pair<VertexId, VertexId> trial_pair(size_t n, uint64_t seed, size_t trial) {
    if (n < 2) {
        throw invalid_argument("routing needs n >= 2");
    }
    auto rng = make_stream(seed, StreamTag::RouteTrial, trial);
    VertexId s = static_cast<VertexId>(uniform_below(rng, n));
    VertexId t = static_cast<VertexId>(uniform_below(rng, n - 1));
    if (t >= s) {
        ++t;
    }
    return {s, t};
}

double nearest_rank(span<const double> sorted, double q) {
    if (sorted.empty()) {
        return numeric_limits<double>::quiet_NaN();
    }
    size_t rank = static_cast<size_t>(ceil(q * static_cast<double>(sorted.size()) - 1e-9));
    rank = clamp<size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

BatchStats route_trial_batch(const NavGraph& ng, size_t pairs, size_t budget, uint64_t seed, GreedyMode mode) {
    if (pairs < 1) {
        throw invalid_argument("pairs must be >= 1");
    }
    const size_t n = ng.size();
    vector<double> hops(pairs);
    vector<size_t> long_used(pairs);
    vector<char> ok(pairs);
#pragma omp parallel for schedule(dynamic, 16)
    for (long long i = 0; i < static_cast<long long>(pairs); ++i) {
        auto [s, t] = trial_pair(n, seed, static_cast<size_t>(i));
        RouteResult r = greedy_route(ng, s, t, budget, mode, false);
        hops[i] = static_cast<double>(r.hops);
        long_used[i] = r.long_edges_used;
        ok[i] = r.success;
    }
    BatchStats stats;
    stats.pairs = pairs;
    stats.budget = budget;
    size_t successes = 0, long_total = 0;
    double hop_total = 0.0;
    for (size_t i = 0; i < pairs; ++i) {
        successes += ok[i] ? 1 : 0;
        long_total += long_used[i];
        hop_total += hops[i];
    }
    stats.success_rate = static_cast<double>(successes) / static_cast<double>(pairs);
    stats.mean_hops = hop_total / static_cast<double>(pairs);
    stats.mean_long_edges = static_cast<double>(long_total) / static_cast<double>(pairs);
    sort(hops.begin(), hops.end());
    stats.p50 = nearest_rank(hops, 0.50);
    stats.p90 = nearest_rank(hops, 0.90);
    stats.p99 = nearest_rank(hops, 0.99);
    return stats;
}

}
