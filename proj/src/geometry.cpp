#include "navlab/geometry.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "navlab/rng.hpp"
#include "navlab/setsystem.hpp"

namespace navlab {

using namespace std;

Geometry Geometry::cycle(size_t n, double gamma) {
    if (n < 2) {
        throw invalid_argument("cycle needs at least 2 vertices");
    }
    Geometry g;
    g.kind_ = GeometryKind::Cycle;
    g.n_ = n;
    g.gamma_ = gamma;
    g.side_ = n;
    g.dims_ = 1;
    g.init_lattice();
    g.init_scales();
    return g;
}

Geometry Geometry::torus(size_t side, size_t dims, double gamma) {
    if (side < 2 || dims < 1) {
        throw invalid_argument("torus needs side >= 2 and dims >= 1");
    }
    double total = pow(static_cast<double>(side), static_cast<double>(dims));
    if (total > 4.0e9) {
        throw invalid_argument("torus too large");
    }
    Geometry g;
    g.kind_ = GeometryKind::Torus;
    g.n_ = static_cast<size_t>(llround(total));
    g.gamma_ = gamma;
    g.side_ = side;
    g.dims_ = dims;
    g.init_lattice();
    g.init_scales();
    return g;
}

Geometry Geometry::set_system(shared_ptr<const SetSystem> system, double gamma) {
    if (!system || system->size() < 1) {
        throw invalid_argument("empty set system");
    }
    Geometry g;
    g.kind_ = GeometryKind::SetSystem;
    g.n_ = system->size();
    g.gamma_ = gamma;
    g.max_distance_ = system->size() > 1 ? static_cast<double>(system->size() - 1) : 0.0;
    // the largest realized distance is the smallest set containing a
    // farthest pair; V itself bounds it
    size_t largest = 0;
    for (VertexId v = 1; v < system->size(); ++v) {
        largest = max(largest, system->distance(0, v));
    }
    for (VertexId u = 1; u < system->size() && largest < system->size() - 1; ++u) {
        for (VertexId v = u + 1; v < system->size(); ++v) {
            largest = max(largest, system->distance(u, v));
        }
    }
    g.max_distance_ = static_cast<double>(largest);
    g.system_ = std::move(system);
    g.init_scales();
    return g;
}

void Geometry::init_scales() {
    if (!(gamma_ > 1.0) || !isfinite(gamma_)) {
        throw invalid_argument("gamma must be a finite number > 1");
    }
    powers_.assign(1, 1.0);
    int k = 0;
    do {
        powers_.push_back(powers_.back() * gamma_);
        ++k;
    } while (!within(static_cast<double>(n_), powers_.back()));
    scale_count_ = k;
    interior_scales_ = 0;
    for (int j = 1; j <= scale_count_; ++j) {
        if (within(powers_[j], max_distance_)) {
            interior_scales_ = j;
        }
    }
}

void Geometry::init_lattice() {
    // per-axis ring histogram, convolved over the dimensions
    vector<size_t> ring(side_ / 2 + 1, 2);
    ring[0] = 1;
    if (side_ % 2 == 0) {
        ring[side_ / 2] = 1;
    }
    histogram_ = {1};
    for (size_t d = 0; d < dims_; ++d) {
        vector<size_t> next(histogram_.size() + ring.size() - 1, 0);
        for (size_t i = 0; i < histogram_.size(); ++i) {
            for (size_t j = 0; j < ring.size(); ++j) {
                next[i + j] += histogram_[i] * ring[j];
            }
        }
        histogram_ = std::move(next);
    }
    ball_prefix_.resize(histogram_.size());
    size_t running = 0;
    for (size_t j = 0; j < histogram_.size(); ++j) {
        running += histogram_[j];
        ball_prefix_[j] = running;
    }
    max_distance_ = static_cast<double>(histogram_.size() - 1);
}

double Geometry::distance(VertexId u, VertexId v) const {
    if (kind_ == GeometryKind::SetSystem) {
        return static_cast<double>(system_->distance(u, v));
    }
    if (dims_ == 1) {
        size_t diff = u > v ? u - v : v - u;
        return static_cast<double>(min(diff, side_ - diff));
    }
    size_t total = 0;
    size_t a = u, b = v;
    for (size_t d = 0; d < dims_; ++d) {
        size_t x = a % side_, y = b % side_;
        size_t diff = x > y ? x - y : y - x;
        total += min(diff, side_ - diff);
        a /= side_;
        b /= side_;
    }
    return static_cast<double>(total);
}

double Geometry::scale_radius(int k) const {
    if (k < 0 || k > scale_count_) {
        throw out_of_range("scale index out of range");
    }
    return powers_[k];
}

int Geometry::scale_of_distance(double d) const {
    if (!(d > 0.0)) {
        throw invalid_argument("no scale for zero distance");
    }
    for (int k = 1; k <= scale_count_; ++k) {
        if (within(d, powers_[k])) {
            return k;
        }
    }
    throw out_of_range("distance beyond the top scale");
}

int Geometry::scale_index(VertexId u, VertexId v) const {
    if (u == v) {
        throw invalid_argument("no scale for zero distance");
    }
    return scale_of_distance(distance(u, v));
}

size_t Geometry::ball_count(VertexId u, double radius) const {
    if (radius < 0.0) {
        return 0;
    }
    if (kind_ == GeometryKind::SetSystem) {
        return system_->ball_count(u, radius);
    }
    double r = floor(radius + 1e-9 * max(1.0, radius));
    size_t j = r >= max_distance_ ? histogram_.size() - 1 : static_cast<size_t>(r);
    return ball_prefix_[j] - 1;
}

size_t Geometry::shell_count(VertexId v, int k) const {
    if (k < 1 || k > scale_count_) {
        throw out_of_range("scale index out of range");
    }
    size_t outer = ball_count(v, powers_[k]);
    return k == 1 ? outer : outer - ball_count(v, powers_[k - 1]);
}

size_t Geometry::helpful_count(VertexId s, VertexId t, double rho) const {
    if (s == t) {
        throw invalid_argument("helpful_count needs s != t");
    }
    double dst = distance(s, t);
    double radius = powers_[scale_of_distance(dst)];
    double limit = rho * dst;
    size_t count = 0;
    for (VertexId v = 0; v < n_; ++v) {
        if (within(distance(v, t), limit) && within(distance(s, v), radius)) {
            ++count;
        }
    }
    return count;
}

vector<size_t> Geometry::coordinates(VertexId v) const {
    vector<size_t> coords(dims_);
    size_t a = v;
    for (size_t d = 0; d < dims_; ++d) {
        coords[d] = a % side_;
        a /= side_;
    }
    return coords;
}

VertexId Geometry::from_coordinates(span<const size_t> coords) const {
    size_t v = 0;
    for (size_t d = dims_; d-- > 0;) {
        v = v * side_ + coords[d] % side_;
    }
    return static_cast<VertexId>(v);
}

VertexId Geometry::translate(VertexId v, VertexId offset) const {
    if (!is_lattice()) {
        throw logic_error("translate on a non-lattice geometry");
    }
    if (dims_ == 1) {
        return static_cast<VertexId>((static_cast<size_t>(v) + offset) % side_);
    }
    size_t result = 0, scale = 1;
    size_t a = v, b = offset;
    for (size_t d = 0; d < dims_; ++d) {
        result += ((a % side_ + b % side_) % side_) * scale;
        a /= side_;
        b /= side_;
        scale *= side_;
    }
    return static_cast<VertexId>(result);
}

VertexId Geometry::negate(VertexId offset) const {
    if (!is_lattice()) {
        throw logic_error("negate on a non-lattice geometry");
    }
    size_t result = 0, scale = 1;
    size_t a = offset;
    for (size_t d = 0; d < dims_; ++d) {
        result += ((side_ - a % side_) % side_) * scale;
        a /= side_;
        scale *= side_;
    }
    return static_cast<VertexId>(result);
}

string Geometry::describe() const {
    ostringstream out;
    switch (kind_) {
        case GeometryKind::Cycle:
            out << "cycle:n=" << n_;
            break;
        case GeometryKind::Torus:
            out << "torus:side=" << side_ << ",dims=" << dims_;
            break;
        case GeometryKind::SetSystem:
            out << "setsystem:n=" << n_;
            break;
    }
    if (kind_ != GeometryKind::SetSystem && gamma_ != 2.0) {
        out << ",gamma=" << gamma_;
    }
    return out.str();
}

GrowthConstants growth_constants(const Geometry& g) {
    const int K = g.scale_count();
    GrowthConstants result;
    result.interior_scales = g.interior_scale_count();
    result.ratio_min.assign(K, numeric_limits<double>::infinity());
    result.ratio_max.assign(K, 0.0);
    for (VertexId v = 0; v < g.size(); ++v) {
        for (int k = 1; k <= K; ++k) {
            double ratio = static_cast<double>(g.shell_count(v, k)) / g.scale_radius(k);
            result.ratio_min[k - 1] = min(result.ratio_min[k - 1], ratio);
            result.ratio_max[k - 1] = max(result.ratio_max[k - 1], ratio);
        }
    }
    int evaluated = max(1, result.interior_scales);
    result.alpha = numeric_limits<double>::infinity();
    result.A = 0.0;
    for (int k = 1; k <= evaluated; ++k) {
        result.alpha = min(result.alpha, result.ratio_min[k - 1]);
        result.A = max(result.A, result.ratio_max[k - 1]);
    }
    return result;
}

CoherenceReport verify_coherence(const Geometry& g, double rho, size_t sample_pairs, uint64_t seed) {
    if (!(rho > 0.0 && rho < 1.0)) {
        throw invalid_argument("rho must lie in (0, 1)");
    }
    if (sample_pairs < 1) {
        throw invalid_argument("sample_pairs must be >= 1");
    }
    const size_t n = g.size();
    const int K = g.scale_count();

    CoherenceReport report;
    report.kind = g.kind();
    report.geometry = g.describe();
    report.n = n;
    report.gamma = g.gamma();
    report.K = K;
    report.rho = rho;

    GrowthConstants growth = growth_constants(g);
    report.interior_scales = growth.interior_scales;
    report.alpha_growth = growth.alpha;
    report.A_growth = growth.A;
    report.shell_ratio_min = growth.ratio_min;
    report.shell_ratio_max = growth.ratio_max;
    report.pass_h1 = growth.alpha > 0.0 && isfinite(growth.A);

    const double nan = numeric_limits<double>::quiet_NaN();
    vector<double> phi(K, numeric_limits<double>::infinity());
    auto fold = [&](vector<double>& acc, int k, double ratio) {
        acc[k - 1] = min(acc[k - 1], ratio);
    };

    if (n * n <= 1000000) {
        report.exhaustive_pairs = true;
        report.pairs_scanned = n * (n - 1);
        vector<float> table(n * n);
        for (VertexId u = 0; u < n; ++u) {
            for (VertexId v = 0; v < n; ++v) {
                table[static_cast<size_t>(u) * n + v] = static_cast<float>(g.distance(u, v));
            }
        }
        vector<vector<double>> partial(n, vector<double>(K, numeric_limits<double>::infinity()));
#pragma omp parallel for schedule(dynamic, 8)
        for (long long si = 0; si < static_cast<long long>(n); ++si) {
            size_t s = static_cast<size_t>(si);
            const float* row_s = &table[s * n];
            for (size_t t = 0; t < n; ++t) {
                if (t == s) {
                    continue;
                }
                const float* row_t = &table[t * n];
                double dst = row_s[t];
                int k = g.scale_of_distance(dst);
                double radius = g.scale_radius(k);
                double limit = rho * dst;
                size_t count = 0;
                for (size_t v = 0; v < n; ++v) {
                    if (within(row_t[v], limit) && within(row_s[v], radius)) {
                        ++count;
                    }
                }
                fold(partial[s], k, static_cast<double>(count) / radius);
            }
        }
        for (const auto& row : partial) {
            for (int k = 1; k <= K; ++k) {
                fold(phi, k, row[k - 1]);
            }
        }
    }
    else {
        report.pairs_scanned = sample_pairs;
        auto rng = make_stream(seed, StreamTag::CoherencePairs, 0);
        vector<pair<VertexId, VertexId>> pairs(sample_pairs);
        for (auto& p : pairs) {
            VertexId s = static_cast<VertexId>(uniform_below(rng, n));
            VertexId t = static_cast<VertexId>(uniform_below(rng, n - 1));
            if (t >= s) {
                ++t;
            }
            p = {s, t};
        }
        vector<pair<int, double>> ratios(sample_pairs);
#pragma omp parallel for schedule(dynamic, 4)
        for (long long i = 0; i < static_cast<long long>(sample_pairs); ++i) {
            auto [s, t] = pairs[i];
            int k = g.scale_index(s, t);
            ratios[i] = {k, static_cast<double>(g.helpful_count(s, t, rho)) / g.scale_radius(k)};
        }
        for (auto [k, ratio] : ratios) {
            fold(phi, k, ratio);
        }
    }

    report.phi_by_scale.resize(K);
    int evaluated = max(1, report.interior_scales);
    double phi_min = numeric_limits<double>::infinity();
    for (int k = 1; k <= K; ++k) {
        report.phi_by_scale[k - 1] = isinf(phi[k - 1]) ? nan : phi[k - 1];
        if (k <= evaluated) {
            phi_min = min(phi_min, phi[k - 1]);
        }
    }
    report.phi = isinf(phi_min) ? nan : phi_min;
    report.pass_h2 = report.phi > 0.0;
    return report;
}

Substrate Substrate::build(const Geometry& g) {
    if (!g.is_lattice()) {
        throw invalid_argument("substrates are only built for cycle and torus geometries");
    }
    Substrate sub(g);
    const size_t n = g.size();
    sub.offsets_.assign(n + 1, 0);
    for (VertexId v = 0; v < n; ++v) {
        vector<VertexId> nbrs;
        auto coords = g.coordinates(v);
        for (size_t d = 0; d < g.dims(); ++d) {
            auto up = coords, down = coords;
            up[d] = (coords[d] + 1) % g.side();
            down[d] = (coords[d] + g.side() - 1) % g.side();
            nbrs.push_back(g.from_coordinates(up));
            nbrs.push_back(g.from_coordinates(down));
        }
        sort(nbrs.begin(), nbrs.end());
        nbrs.erase(unique(nbrs.begin(), nbrs.end()), nbrs.end());
        sub.adjacency_.insert(sub.adjacency_.end(), nbrs.begin(), nbrs.end());
        sub.offsets_[v + 1] = sub.adjacency_.size();
    }

    // check every resolved pair (sampled above 4096 vertices)
    atomic<bool> ok{true};
    auto check = [&](VertexId s, VertexId t) {
        double dst = g.distance(s, t);
        double best = numeric_limits<double>::infinity();
        for (VertexId v : sub.neighbors(s)) {
            best = min(best, g.distance(v, t));
        }
        if (!(best <= dst - 1.0)) {
            ok = false;
        }
    };
    if (n <= 4096) {
#pragma omp parallel for schedule(static)
        for (long long s = 0; s < static_cast<long long>(n); ++s) {
            for (VertexId t = 0; t < n; ++t) {
                if (t != s) {
                    check(static_cast<VertexId>(s), t);
                }
            }
        }
    }
    else {
        auto rng = make_stream(0, StreamTag::CoherencePairs, 1);
        for (int i = 0; i < 1000000; ++i) {
            VertexId s = static_cast<VertexId>(uniform_below(rng, n));
            VertexId t = static_cast<VertexId>(uniform_below(rng, n));
            if (s != t) {
                check(s, t);
            }
        }
    }
    if (!ok) {
        throw logic_error("substrate axiom violated");
    }
    return sub;
}

span<const VertexId> Substrate::neighbors(VertexId v) const {
    return {adjacency_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
}

bool Substrate::has_edge(VertexId u, VertexId v) const {
    auto nbrs = neighbors(u);
    return binary_search(nbrs.begin(), nbrs.end(), v);
}

VertexId Substrate::local_connection(VertexId s, VertexId t) const {
    if (s == t) {
        throw invalid_argument("local connection needs s != t");
    }
    VertexId best = s;
    double best_distance = numeric_limits<double>::infinity();
    // neighbors are sorted, so strict comparison keeps the smallest index
    for (VertexId v : neighbors(s)) {
        double d = geometry_.distance(v, t);
        if (d < best_distance) {
            best_distance = d;
            best = v;
        }
    }
    if (!(best_distance <= geometry_.distance(s, t) - 1.0)) {
        throw logic_error("substrate axiom violated");
    }
    return best;
}

vector<VertexId> Substrate::local_path(VertexId s, VertexId t, size_t max_len) const {
    vector<VertexId> path{s};
    VertexId current = s;
    while (current != t && path.size() <= max_len) {
        current = local_connection(current, t);
        path.push_back(current);
    }
    return path;
}

}
