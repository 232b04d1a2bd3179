#include "navlab/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "navlab/setsystem.hpp"

namespace navlab {

using namespace std;

void EdgeSet::write(ostream& out) const {
    out.precision(17);
    out << "n " << n << " gamma " << gamma << " seed " << seed << '\n';
    for (auto [u, v] : edges) {
        out << u << ' ' << v << '\n';
    }
}

EdgeSet EdgeSet::read(istream& in) {
    EdgeSet e;
    string tag_n, tag_gamma, tag_seed;
    if (!(in >> tag_n >> e.n >> tag_gamma >> e.gamma >> tag_seed >> e.seed) || tag_n != "n" ||
        tag_gamma != "gamma" || tag_seed != "seed") {
        throw invalid_argument("edge set: bad header");
    }
    long long u, v;
    while (in >> u >> v) {
        if (u < 0 || v < 0 || static_cast<size_t>(u) >= e.n || static_cast<size_t>(v) >= e.n || u == v) {
            throw invalid_argument("edge set: invalid edge");
        }
        e.edges.emplace_back(static_cast<VertexId>(u), static_cast<VertexId>(v));
    }
    if (!in.eof()) {
        throw invalid_argument("edge set: bad edge line");
    }
    normalize_edges(e.edges);
    return e;
}

void normalize_edges(vector<Edge>& edges) {
    for (auto& [u, v] : edges) {
        if (u > v) {
            swap(u, v);
        }
    }
    sort(edges.begin(), edges.end());
    edges.erase(unique(edges.begin(), edges.end()), edges.end());
}

ClassEnumerator::ClassEnumerator(const CostGeometry& cg) : geometry_(&cg.geometry()) {
    const Geometry& g = *geometry_;
    const int K = cg.K();
    const size_t n = g.size();
    if (g.is_lattice()) {
        half_.assign(K, {});
        self_inverse_.assign(K, {});
        for (VertexId offset = 1; offset < n; ++offset) {
            int k = g.scale_of_distance(g.distance(0, offset));
            if (k > K) {
                throw logic_error("offset beyond the top class");
            }
            VertexId opposite = g.negate(offset);
            if (opposite == offset) {
                self_inverse_[k - 1].push_back(offset);
            }
            else if (offset < opposite) {
                half_[k - 1].push_back(offset);
            }
        }
        for (int k = 1; k <= K; ++k) {
            sizes_.push_back(static_cast<uint64_t>(n) * half_[k - 1].size() +
                             static_cast<uint64_t>(n / 2) * self_inverse_[k - 1].size());
        }
    }
    else {
        pairs_.assign(K, {});
        for (VertexId u = 0; u < n; ++u) {
            for (VertexId v = u + 1; v < n; ++v) {
                pairs_[g.scale_index(u, v) - 1].emplace_back(u, v);
            }
        }
        for (int k = 1; k <= K; ++k) {
            sizes_.push_back(pairs_[k - 1].size());
        }
    }
    for (int k = 1; k <= K; ++k) {
        if (sizes_[k - 1] != cg.P(k)) {
            throw logic_error("class enumerator disagrees with class size at scale " + to_string(k));
        }
    }
}

Edge ClassEnumerator::pair_at(int k, uint64_t index) const {
    if (k < 1 || k > K() || index >= sizes_[k - 1]) {
        throw out_of_range("class index out of range");
    }
    if (!geometry_->is_lattice()) {
        return pairs_[k - 1][index];
    }
    return lattice_pair(k, index);
}

Edge ClassEnumerator::lattice_pair(int k, uint64_t index) const {
    const Geometry& g = *geometry_;
    const uint64_t n = g.size();
    const auto& half = half_[k - 1];
    VertexId u, offset;
    if (index < n * half.size()) {
        offset = half[index / n];
        u = static_cast<VertexId>(index % n);
    }
    else {
        uint64_t rest = index - n * half.size();
        const uint64_t reps = n / 2;
        offset = self_inverse_[k - 1][rest / reps];
        uint64_t r = rest % reps;
        const size_t side = g.side();
        auto delta = g.coordinates(offset);
        size_t axis = 0;
        while (delta[axis] != side / 2) {
            ++axis;
        }
        vector<size_t> coords(g.dims());
        coords[axis] = r % (side / 2);
        r /= side / 2;
        for (size_t a = 0; a < g.dims(); ++a) {
            if (a != axis) {
                coords[a] = r % side;
                r /= side;
            }
        }
        u = g.from_coordinates(coords);
    }
    VertexId v = g.translate(u, offset);
    return u < v ? Edge{u, v} : Edge{v, u};
}

vector<uint64_t> sample_distinct(Philox4x32& rng, uint64_t range, uint64_t count) {
    if (count > range) {
        throw invalid_argument("cannot draw more distinct values than the range holds");
    }
    bool complement = count > range / 2;
    uint64_t draws = complement ? range - count : count;
    // Floyd's subset sampling
    unordered_set<uint64_t> chosen;
    chosen.reserve(draws * 2);
    for (uint64_t j = range - draws; j < range; ++j) {
        uint64_t t = uniform_below(rng, j + 1);
        if (!chosen.insert(t).second) {
            chosen.insert(j);
        }
    }
    vector<uint64_t> picked(chosen.begin(), chosen.end());
    sort(picked.begin(), picked.end());
    if (!complement) {
        return picked;
    }
    vector<uint64_t> result;
    result.reserve(count);
    size_t next = 0;
    for (uint64_t x = 0; x < range; ++x) {
        if (next < picked.size() && picked[next] == x) {
            ++next;
        }
        else {
            result.push_back(x);
        }
    }
    return result;
}

uint64_t sample_binomial(Philox4x32& rng, uint64_t P, double q) {
    if (!(q >= 0.0 && q <= 1.0)) {
        throw invalid_argument("probability must lie in [0, 1]");
    }
    if (P == 0 || q == 0.0) {
        return 0;
    }
    if (q == 1.0) {
        return P;
    }
    binomial_distribution<uint64_t> dist(P, q);
    return dist(rng);
}

EdgeProfile sample_product_profile(const CostGeometry& cg, span<const double> qStar, Philox4x32& rng) {
    if (static_cast<int>(qStar.size()) != cg.K()) {
        throw invalid_argument("qStar length does not match K");
    }
    EdgeProfile m{vector<uint64_t>(cg.K())};
    for (int k = 1; k <= cg.K(); ++k) {
        m.m[k - 1] = sample_binomial(rng, cg.P(k), qStar[k - 1]);
    }
    return m;
}

namespace {

// uniform pairs of the given per-class counts; class k reads stream (tag, k)
EdgeSet realize_profile(const CostGeometry& cg, const ClassEnumerator& classes, const vector<uint64_t>& counts,
                        uint64_t seed, StreamTag tag) {
    const int K = cg.K();
    vector<vector<Edge>> per_class(K);
#pragma omp parallel for schedule(dynamic, 1)
    for (int k = 1; k <= K; ++k) {
        auto rng = make_stream(seed, tag, static_cast<uint64_t>(k));
        auto indices = sample_distinct(rng, cg.P(k), counts[k - 1]);
        auto& out = per_class[k - 1];
        out.reserve(indices.size());
        for (uint64_t i : indices) {
            out.push_back(classes.pair_at(k, i));
        }
    }
    EdgeSet e;
    e.n = cg.n();
    e.gamma = cg.gamma();
    e.seed = seed;
    e.by_scale = counts;
    for (auto& part : per_class) {
        e.edges.insert(e.edges.end(), part.begin(), part.end());
    }
    sort(e.edges.begin(), e.edges.end());
    return e;
}

}

EdgeSet sample_product(const CostGeometry& cg, span<const double> qStar, uint64_t seed) {
    if (static_cast<int>(qStar.size()) != cg.K()) {
        throw invalid_argument("qStar length does not match K");
    }
    ClassEnumerator classes(cg);
    vector<uint64_t> counts(cg.K());
    for (int k = 1; k <= cg.K(); ++k) {
        auto rng = make_stream(seed, StreamTag::ProductCount, static_cast<uint64_t>(k));
        counts[k - 1] = sample_binomial(rng, cg.P(k), qStar[k - 1]);
    }
    return realize_profile(cg, classes, counts, seed, StreamTag::ProductClass);
}

RbaWeights rba_weights(const Geometry& g, VertexId v) {
    const size_t n = g.size();
    if (n < 2) {
        throw invalid_argument("RBA needs n >= 2");
    }
    RbaWeights w;
    w.weight.assign(n, 0.0);
    for (VertexId u = 0; u < n; ++u) {
        if (u == v) {
            continue;
        }
        w.weight[u] = 1.0 / static_cast<double>(g.ball_count(u, g.distance(v, u)));
        w.Z += w.weight[u];
    }
    return w;
}

namespace {

vector<double> rba_cdf(const Geometry& g, VertexId v) {
    RbaWeights w = rba_weights(g, v);
    vector<double> cdf(g.size());
    partial_sum(w.weight.begin(), w.weight.end(), cdf.begin());
    return cdf;
}

// lattice cdfs are built around vertex 0 and translated to v
void draw_rba(const Geometry& g, VertexId v, const vector<double>& cdf, size_t count, uint64_t seed,
              vector<VertexId>& out) {
    auto rng = make_stream(seed, StreamTag::RbaVertex, v);
    for (size_t j = 0; j < count; ++j) {
        double x = rng.uniform() * cdf.back();
        auto it = upper_bound(cdf.begin(), cdf.end(), x);
        if (it == cdf.end()) {
            --it;
        }
        // zero-weight entries (the center) can never be hit: cdf is flat there
        auto u = static_cast<VertexId>(it - cdf.begin());
        out.push_back(g.is_lattice() ? g.translate(v, u) : u);
    }
}

}

vector<VertexId> rba_targets(const Geometry& g, VertexId v, size_t count, uint64_t seed) {
    vector<VertexId> out;
    draw_rba(g, v, rba_cdf(g, g.is_lattice() ? 0 : v), count, seed, out);
    return out;
}

EdgeSet sample_rba(const Geometry& g, size_t edges_per_vertex, uint64_t seed) {
    if (edges_per_vertex < 1) {
        throw invalid_argument("edges_per_vertex must be >= 1");
    }
    const size_t n = g.size();
    vector<vector<Edge>> per_vertex(n);
    // N_u(d) is the same for every center of a lattice, so one offset law
    // serves all v
    vector<double> shared;
    if (g.is_lattice()) {
        shared = rba_cdf(g, 0);
    }
#pragma omp parallel for schedule(dynamic, 8)
    for (long long vi = 0; vi < static_cast<long long>(n); ++vi) {
        VertexId v = static_cast<VertexId>(vi);
        vector<double> own;
        if (!g.is_lattice()) {
            own = rba_cdf(g, v);
        }
        vector<VertexId> targets;
        draw_rba(g, v, g.is_lattice() ? shared : own, edges_per_vertex, seed, targets);
        for (VertexId u : targets) {
            per_vertex[v].emplace_back(v, u);
        }
    }
    EdgeSet e;
    e.n = n;
    e.gamma = g.gamma();
    e.seed = seed;
    for (auto& part : per_vertex) {
        e.edges.insert(e.edges.end(), part.begin(), part.end());
    }
    normalize_edges(e.edges);
    e.by_scale.assign(g.scale_count(), 0);
    for (auto [u, v] : e.edges) {
        ++e.by_scale[g.scale_index(u, v) - 1];
    }
    while (e.by_scale.size() > 1 && e.by_scale.back() == 0) {
        e.by_scale.pop_back();
    }
    return e;
}

ExactBoundedCostSampler::ExactBoundedCostSampler(const CostGeometry& cg, double B, ExactMethod method)
    : cg_(&cg), B_(B), cap_(B * static_cast<double>(cg.n())), method_(method) {
    if (!(B >= 0.0)) {
        throw invalid_argument("budget must be >= 0");
    }
    const int K = cg.K();
    const double slack = 1e-12 * max(1.0, cap_);

    if (method_ != ExactMethod::Rejection) {
        // count feasible profiles, stopping once the limit is passed
        size_t count = 0;
        auto counter = [&](auto&& self, int k, double spent) -> void {
            if (count > kMaxProfiles) {
                return;
            }
            if (k == K) {
                ++count;
                return;
            }
            for (uint64_t x = 0; x <= cg.P(k + 1); ++x) {
                double cost = spent + cg.c(k + 1) * static_cast<double>(x);
                if (cost > cap_ + slack || count > kMaxProfiles) {
                    break;
                }
                self(self, k + 1, cost);
            }
        };
        counter(counter, 0, 0.0);
        if (count > kMaxProfiles) {
            if (method_ == ExactMethod::Enumerate) {
                throw invalid_argument("lattice too large");
            }
            method_ = ExactMethod::Rejection;
        }
        else {
            method_ = ExactMethod::Enumerate;
        }
    }

    if (method_ == ExactMethod::Enumerate) {
        vector<double> log_weights;
        vector<uint64_t> m(K, 0);
        auto collect = [&](auto&& self, int k, double spent, double entropy) -> void {
            if (k == K) {
                profiles_.insert(profiles_.end(), m.begin(), m.end());
                log_weights.push_back(entropy);
                return;
            }
            for (uint64_t x = 0; x <= cg.P(k + 1); ++x) {
                double cost = spent + cg.c(k + 1) * static_cast<double>(x);
                if (cost > cap_ + slack) {
                    break;
                }
                m[k] = x;
                self(self, k + 1, cost, entropy + log_binomial(cg.P(k + 1), x));
            }
            m[k] = 0;
        };
        collect(collect, 0, 0.0, 0.0);
        double top = *max_element(log_weights.begin(), log_weights.end());
        cdf_.resize(log_weights.size());
        double running = 0.0;
        for (size_t i = 0; i < log_weights.size(); ++i) {
            running += exp(log_weights[i] - top);
            cdf_[i] = running;
        }
    }
    else {
        lambda_ = invert_budget(cg, B);
        for (int k = 1; k <= K; ++k) {
            q_.push_back(isinf(lambda_) ? 0.0 : logistic_tail(lambda_ * cg.c(k)));
        }
    }
}

EdgeProfile ExactBoundedCostSampler::sample_profile(Philox4x32& rng) const {
    const int K = cg_->K();
    if (method_ == ExactMethod::Enumerate) {
        double x = rng.uniform() * cdf_.back();
        size_t i = static_cast<size_t>(upper_bound(cdf_.begin(), cdf_.end(), x) - cdf_.begin());
        i = min(i, cdf_.size() - 1);
        return EdgeProfile{vector<uint64_t>(profiles_.begin() + static_cast<ptrdiff_t>(i * K),
                                            profiles_.begin() + static_cast<ptrdiff_t>((i + 1) * K))};
    }
    if (isinf(lambda_)) {
        return EdgeProfile{vector<uint64_t>(K, 0)};
    }
    const double slack = 1e-12 * max(1.0, cap_);
    constexpr uint64_t kMaxProposals = 1000000000ULL;
    for (uint64_t attempt = 0; attempt < kMaxProposals; ++attempt) {
        ++proposals_;
        EdgeProfile m = sample_product_profile(*cg_, q_, rng);
        double cost = 0.0;
        for (int k = 1; k <= K; ++k) {
            cost += cg_->c(k) * static_cast<double>(m.m[k - 1]);
        }
        if (cost > cap_ + slack) {
            continue;
        }
        double accept = exp(-lambda_ * max(0.0, cap_ - cost));
        if (rng.uniform() < accept) {
            ++acceptances_;
            return m;
        }
    }
    throw runtime_error("rejection sampler exceeded its proposal limit");
}

EdgeSet ExactBoundedCostSampler::sample(uint64_t seed) const {
    auto rng = make_stream(seed, StreamTag::ExactProfile, 0);
    EdgeProfile m = sample_profile(rng);
    ClassEnumerator classes(*cg_);
    return realize_profile(*cg_, classes, m.m, seed, StreamTag::ExactPairs);
}

EdgeSet sample_bounded_cost_exact(const CostGeometry& cg, double B, uint64_t seed, ExactMethod method) {
    ExactBoundedCostSampler sampler(cg, B, method);
    return sampler.sample(seed);
}

EdgeProfile edge_profile_of(const CostGeometry& cg, const EdgeSet& e) {
    const Geometry& g = cg.geometry();
    EdgeProfile m{vector<uint64_t>(cg.K(), 0)};
    for (auto [u, v] : e.edges) {
        if (u >= g.size() || v >= g.size() || u == v) {
            throw invalid_argument("edge with invalid vertices");
        }
        int k = g.scale_index(u, v);
        if (k > cg.K()) {
            throw invalid_argument("edge beyond the top scale class");
        }
        ++m.m[k - 1];
    }
    return m;
}

}
