#include "navlab/setsystem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "navlab/rng.hpp"

namespace navlab {

using namespace std;

namespace {

// largest t-bound proper subset of set id, 0 if none
size_t largest_bound_subset(const SetSystem& ss, size_t id, VertexId t, const vector<uint32_t>& stamp,
                            uint32_t mark) {
    size_t size = ss.set_size(id);
    auto sets = ss.memberships(t);
    for (size_t i = sets.size(); i-- > 0;) {
        size_t candidate = sets[i];
        size_t csize = ss.set_size(candidate);
        if (csize >= size) {
            continue;
        }
        bool inside = true;
        for (VertexId v : ss.set(candidate)) {
            if (stamp[v] != mark) {
                inside = false;
                break;
            }
        }
        if (inside) {
            return csize;
        }
    }
    return 0;
}

}

SetSystem::SetSystem(size_t n, vector<vector<VertexId>> sets, optional<double> lambda, optional<double> beta)
    : n_(n) {
    if (n < 1) {
        throw invalid_argument("set system needs at least one vertex");
    }
    if (n > numeric_limits<VertexId>::max()) {
        throw invalid_argument("set system too large");
    }
    for (auto& s : sets) {
        sort(s.begin(), s.end());
        s.erase(unique(s.begin(), s.end()), s.end());
        if (s.empty()) {
            throw invalid_argument("empty set in set system");
        }
        if (s.back() >= n) {
            throw invalid_argument("set member out of range");
        }
    }
    sort(sets.begin(), sets.end(), [](const auto& a, const auto& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    sets.erase(unique(sets.begin(), sets.end()), sets.end());
    if (sets.size() > numeric_limits<uint32_t>::max()) {
        throw invalid_argument("too many sets");
    }

    offsets_.assign(1, 0);
    for (const auto& s : sets) {
        members_.insert(members_.end(), s.begin(), s.end());
        offsets_.push_back(members_.size());
    }
    build_index();

    AxiomReport report = check_axioms(*this);
    lambda_ = lambda.value_or(report.tightest_lambda < 1.0 ? report.tightest_lambda : 0.5);
    beta_ = beta.value_or(max(1.0, report.tightest_beta));
    if (!(lambda_ > 0.0 && lambda_ < 1.0)) {
        throw invalid_argument("lambda must lie in (0, 1)");
    }
    if (!(beta_ > 0.0)) {
        throw invalid_argument("beta must be positive");
    }
}

void SetSystem::build_index() {
    vector<size_t> counts(n_ + 1, 0);
    for (VertexId v : members_) {
        ++counts[v + 1];
    }
    membership_offsets_.assign(n_ + 1, 0);
    for (size_t v = 0; v < n_; ++v) {
        membership_offsets_[v + 1] = membership_offsets_[v] + counts[v + 1];
    }
    membership_.assign(members_.size(), 0);
    vector<size_t> fill(membership_offsets_.begin(), membership_offsets_.end() - 1);
    for (size_t id = 0; id < set_count(); ++id) {
        for (VertexId v : set(id)) {
            membership_[fill[v]++] = static_cast<uint32_t>(id);
        }
    }

    vector<uint32_t> stamp(n_, 0);
    profile_offsets_.assign(1, 0);
    for (VertexId v = 0; v < n_; ++v) {
        uint32_t mark = v + 1;
        size_t united = 0;
        auto sets = memberships(v);
        for (size_t i = 0; i < sets.size(); ++i) {
            for (VertexId u : set(sets[i])) {
                if (stamp[u] != mark) {
                    stamp[u] = mark;
                    ++united;
                }
            }
            size_t size = set_size(sets[i]);
            if (i + 1 == sets.size() || set_size(sets[i + 1]) != size) {
                profile_.emplace_back(size, united);
            }
        }
        profile_offsets_.push_back(profile_.size());
    }
}

SetSystem SetSystem::hierarchy(size_t branch, size_t depth) {
    if (branch < 2 || depth < 1) {
        throw invalid_argument("hierarchy needs branch >= 2 and depth >= 1");
    }
    size_t n = 1;
    for (size_t j = 0; j < depth; ++j) {
        if (n > 1000000 / branch) {
            throw invalid_argument("hierarchy size overflow: branch^depth must be <= 10^6");
        }
        n *= branch;
    }
    vector<vector<VertexId>> sets;
    for (size_t block = 1; block <= n; block *= branch) {
        for (size_t start = 0; start < n; start += block) {
            vector<VertexId> s(block);
            for (size_t i = 0; i < block; ++i) {
                s[i] = static_cast<VertexId>(start + i);
            }
            sets.push_back(std::move(s));
        }
    }
    return SetSystem(n, std::move(sets), 1.0 / static_cast<double>(branch));
}

SetSystem SetSystem::load(istream& in) {
    string line;
    size_t n = 0;
    bool header = false;
    vector<vector<VertexId>> sets;
    size_t line_no = 0;
    while (getline(in, line)) {
        ++line_no;
        auto first = line.find_first_not_of(" \t\r");
        if (first == string::npos || line[first] == '#') {
            continue;
        }
        istringstream fields(line);
        if (!header) {
            string tag;
            if (!(fields >> tag >> n) || tag != "n") {
                throw invalid_argument("set system file: expected 'n <count>' on line " + to_string(line_no));
            }
            header = true;
            continue;
        }
        vector<VertexId> s;
        long long v;
        while (fields >> v) {
            if (v < 0 || static_cast<size_t>(v) >= n) {
                throw invalid_argument("set system file: vertex out of range on line " + to_string(line_no));
            }
            s.push_back(static_cast<VertexId>(v));
        }
        if (!fields.eof()) {
            throw invalid_argument("set system file: bad token on line " + to_string(line_no));
        }
        sets.push_back(std::move(s));
    }
    if (!header) {
        throw invalid_argument("set system file: missing header");
    }
    return SetSystem(n, std::move(sets));
}

SetSystem SetSystem::load_file(const string& path) {
    ifstream in(path);
    if (!in) {
        throw invalid_argument("cannot open set system file: " + path);
    }
    return load(in);
}

void SetSystem::save(ostream& out) const {
    out << "n " << n_ << '\n';
    for (size_t id = 0; id < set_count(); ++id) {
        const char* sep = "";
        for (VertexId v : set(id)) {
            out << sep << v;
            sep = " ";
        }
        out << '\n';
    }
}

span<const VertexId> SetSystem::set(size_t id) const {
    return {members_.data() + offsets_[id], offsets_[id + 1] - offsets_[id]};
}

span<const uint32_t> SetSystem::memberships(VertexId v) const {
    return {membership_.data() + membership_offsets_[v], membership_offsets_[v + 1] - membership_offsets_[v]};
}

bool SetSystem::contains(size_t id, VertexId v) const {
    auto s = set(id);
    return binary_search(s.begin(), s.end(), v);
}

size_t SetSystem::distance(VertexId u, VertexId v) const {
    if (u == v) {
        return 0;
    }
    auto a = memberships(u);
    auto b = memberships(v);
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) {
            return set_size(a[i]) - 1;
        }
        if (a[i] < b[j]) {
            ++i;
        }
        else {
            ++j;
        }
    }
    throw domain_error("no set contains both vertices");
}

size_t SetSystem::union_size(VertexId v, size_t L) const {
    auto begin = profile_.begin() + static_cast<ptrdiff_t>(profile_offsets_[v]);
    auto end = profile_.begin() + static_cast<ptrdiff_t>(profile_offsets_[v + 1]);
    auto it = upper_bound(begin, end, L, [](size_t value, const auto& entry) { return value < entry.first; });
    return it == begin ? 0 : prev(it)->second;
}

size_t SetSystem::ball_count(VertexId u, double radius) const {
    if (radius < 0.0) {
        return 0;
    }
    double r = floor(radius + 1e-9 * max(1.0, radius));
    size_t L = r >= static_cast<double>(n_) ? n_ : static_cast<size_t>(r) + 1;
    size_t united = union_size(u, L);
    return united > 0 ? united - 1 : 0;
}

AxiomReport check_axioms(const SetSystem& ss) {
    AxiomReport report;
    const size_t n = ss.size();
    report.lambda = ss.lambda();
    report.beta = ss.beta();

    report.k1 = ss.set_count() > 0 && ss.set_size(ss.set_count() - 1) == n;

    // (K2): largest t-bound proper subset for every (S, t)
    vector<uint32_t> stamp(n, 0);
    uint32_t mark = 0;
    double tightest = 1.0;
    vector<pair<size_t, VertexId>> k2_bad;
    for (size_t id = 0; id < ss.set_count(); ++id) {
        size_t size = ss.set_size(id);
        if (size <= 1) {
            continue;
        }
        ++mark;
        for (VertexId v : ss.set(id)) {
            stamp[v] = mark;
        }
        for (VertexId t : ss.set(id)) {
            size_t best = largest_bound_subset(ss, id, t, stamp, mark);
            if (best == 0) {
                k2_bad.emplace_back(id, t);
                continue;
            }
            if (best + 1 < size) {
                tightest = min(tightest, static_cast<double>(best) / static_cast<double>(size));
            }
            double need = min(report.lambda * static_cast<double>(size), static_cast<double>(size - 1));
            if (static_cast<double>(best) + 1e-9 < need) {
                k2_bad.emplace_back(id, t);
            }
        }
    }
    report.tightest_lambda = tightest;
    report.k2_violation_count = k2_bad.size();
    sort(k2_bad.begin(), k2_bad.end());
    k2_bad.resize(min(k2_bad.size(), AxiomReport::kMaxListed));
    report.k2_violations = std::move(k2_bad);
    report.k2 = report.k2_violation_count == 0;

    // (K3): |S_L(v)| / L peaks where L equals a set size (or at L = 2)
    double beta_seen = 0.0;
    vector<pair<VertexId, size_t>> k3_bad;
    for (VertexId v = 0; v < n; ++v) {
        vector<size_t> sizes{2};
        for (uint32_t id : ss.memberships(v)) {
            size_t size = ss.set_size(id);
            if (size > 2 && size != sizes.back()) {
                sizes.push_back(size);
            }
        }
        for (size_t L : sizes) {
            if (L > n && L != 2) {
                continue;
            }
            double ratio = static_cast<double>(ss.union_size(v, L)) / static_cast<double>(L);
            beta_seen = max(beta_seen, ratio);
            if (ratio > report.beta * (1.0 + 1e-12)) {
                k3_bad.emplace_back(v, L);
            }
        }
    }
    report.tightest_beta = beta_seen;
    report.k3_violation_count = k3_bad.size();
    k3_bad.resize(min(k3_bad.size(), AxiomReport::kMaxListed));
    report.k3_violations = std::move(k3_bad);
    report.k3 = report.k3_violation_count == 0;
    return report;
}

ShrinkageReport check_shrinkage(const SetSystem& ss) {
    const double lambda = ss.lambda();
    ShrinkageReport report;
    report.min_size = 1.0 / (lambda - lambda * lambda);
    vector<pair<size_t, VertexId>> bad;
    for (size_t id = 0; id < ss.set_count(); ++id) {
        double size = static_cast<double>(ss.set_size(id));
        if (size < report.min_size) {
            continue;
        }
        ++report.sets_checked;
        double lo = lambda * lambda * size;
        double hi = lambda * size;
        for (VertexId t : ss.set(id)) {
            ++report.pairs_checked;
            bool found = false;
            for (uint32_t other : ss.memberships(t)) {
                double s = static_cast<double>(ss.set_size(other));
                if (within(lo, s) && within(s, hi)) {
                    found = true;
                    break;
                }
            }
            if (!found) {
                bad.emplace_back(id, t);
            }
        }
    }
    report.violation_count = bad.size();
    bad.resize(min(bad.size(), AxiomReport::kMaxListed));
    report.violations = std::move(bad);
    return report;
}

int ScalePartition::interval_of(double size) const {
    for (int k = 1; k <= M; ++k) {
        if (size > upper[k - 1] * (1.0 + 1e-12) && within(size, upper[k])) {
            return k;
        }
    }
    return 0;
}

ScalePartition scale_partition(const SetSystem& ss) {
    const double step = 1.0 / (ss.lambda() * ss.lambda());
    ScalePartition partition;
    partition.upper.assign(1, 1.0);
    while (!within(static_cast<double>(ss.size()), partition.upper.back())) {
        if (partition.M == 64) {
            throw invalid_argument("scale partition needs more than 64 intervals");
        }
        partition.upper.push_back(partition.upper.back() * step);
        ++partition.M;
    }
    if (partition.M == 0) {
        partition.M = 1;
        partition.upper.push_back(step);
    }
    return partition;
}

ScaleSetReport check_scale_sets(const SetSystem& ss) {
    ScalePartition partition = scale_partition(ss);
    ScaleSetReport report;
    report.M = partition.M;
    vector<pair<VertexId, int>> missing;
    vector<char> hit(partition.M + 1);
    for (VertexId t = 0; t < ss.size(); ++t) {
        fill(hit.begin(), hit.end(), 0);
        for (uint32_t id : ss.memberships(t)) {
            hit[partition.interval_of(static_cast<double>(ss.set_size(id)))] = 1;
        }
        for (int k = 1; k <= partition.M; ++k) {
            ++report.cells_checked;
            if (!hit[k]) {
                missing.emplace_back(t, k);
            }
        }
    }
    report.missing_count = missing.size();
    missing.resize(min(missing.size(), AxiomReport::kMaxListed));
    report.missing = std::move(missing);
    return report;
}

CoherenceConstants coherence_constants(double lambda, double beta) {
    if (!(lambda > 0.0 && lambda < 1.0) || !(beta > 0.0)) {
        throw invalid_argument("coherence constants need 0 < lambda < 1 and beta > 0");
    }
    CoherenceConstants c;
    c.lambda = lambda;
    c.beta = beta;
    c.r = 2;
    while (!(pow(lambda, -2.0 * (c.r - 1)) > beta)) {
        ++c.r;
    }
    c.gamma = pow(lambda, -2.0 * c.r);
    c.alpha_growth = lambda * lambda - beta / c.gamma;
    c.A_growth = beta - lambda * lambda / c.gamma;
    return c;
}

Geometry as_geometry(shared_ptr<const SetSystem> ss) {
    if (!ss) {
        throw invalid_argument("null set system");
    }
    AxiomReport report = check_axioms(*ss);
    if (!report.pass()) {
        throw domain_error("set system fails the axioms");
    }
    CoherenceConstants c = coherence_constants(ss->lambda(), ss->beta());
    return Geometry::set_system(std::move(ss), c.gamma);
}

IsotropyLemmaReport check_isotropy_lemma(const Geometry& g, size_t sample_pairs, uint64_t seed) {
    const SetSystem* ss = g.system();
    if (!ss) {
        throw invalid_argument("isotropy lemma check needs a set-system geometry");
    }
    const double lambda = ss->lambda();
    CoherenceConstants c = coherence_constants(lambda, ss->beta());
    const size_t n = g.size();

    IsotropyLemmaReport report;
    report.bound_factor = c.alpha_growth / g.gamma();
    report.min_ratio = numeric_limits<double>::infinity();
    const double min_size = 1.0 / (lambda - lambda * lambda);

    auto check = [&](VertexId s, VertexId t) {
        size_t dst = ss->distance(s, t);
        double size = static_cast<double>(dst + 1);
        if (size < min_size) {
            return;
        }
        // the smallest common set is the first shared membership
        auto a = ss->memberships(s);
        auto b = ss->memberships(t);
        size_t common = 0;
        for (size_t i = 0, j = 0; i < a.size() && j < b.size();) {
            if (a[i] == b[j]) {
                common = a[i];
                break;
            }
            a[i] < b[j] ? ++i : ++j;
        }
        int kst = g.scale_of_distance(static_cast<double>(dst));
        double limit = lambda * size;
        size_t good = 0;
        for (VertexId v : ss->set(common)) {
            if (v == s) {
                continue;
            }
            int k = g.scale_of_distance(static_cast<double>(ss->distance(s, v)));
            if ((k == kst || k == kst - 1) && within(static_cast<double>(ss->distance(v, t)), limit)) {
                ++good;
            }
        }
        double ratio = static_cast<double>(good) / g.scale_radius(kst);
        ++report.pairs_checked;
        report.min_ratio = min(report.min_ratio, ratio);
        if (ratio + 1e-12 < report.bound_factor) {
            ++report.violation_count;
        }
    };

    if (n <= 512) {
        report.exhaustive = true;
        for (VertexId s = 0; s < n; ++s) {
            for (VertexId t = 0; t < n; ++t) {
                if (s != t) {
                    check(s, t);
                }
            }
        }
    }
    else {
        auto rng = make_stream(seed, StreamTag::CoherencePairs, 2);
        for (size_t i = 0; i < sample_pairs; ++i) {
            VertexId s = static_cast<VertexId>(uniform_below(rng, n));
            VertexId t = static_cast<VertexId>(uniform_below(rng, n - 1));
            if (t >= s) {
                ++t;
            }
            check(s, t);
        }
    }
    if (report.pairs_checked == 0) {
        report.min_ratio = numeric_limits<double>::quiet_NaN();
    }
    return report;
}

}
