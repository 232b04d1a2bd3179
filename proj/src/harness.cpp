#include "navlab/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "navlab/parallel.hpp"
#include "navlab/sampler.hpp"
#include "navlab/setsystem.hpp"

namespace navlab {

using namespace std;
namespace fs = std::filesystem;

namespace {

map<string, string> parse_fields(const string& args, const string& spec) {
    map<string, string> fields;
    stringstream in(args);
    string item;
    while (getline(in, item, ',')) {
        auto eq = item.find('=');
        if (eq == string::npos || eq == 0) {
            throw UsageError("malformed geometry spec '" + spec + "'");
        }
        if (!fields.emplace(item.substr(0, eq), item.substr(eq + 1)).second) {
            throw UsageError("duplicate key in geometry spec '" + spec + "'");
        }
    }
    return fields;
}

size_t parse_size(const string& text, const string& what) {
    size_t value = 0;
    auto [ptr, ec] = from_chars(text.data(), text.data() + text.size(), value);
    if (ec != errc() || ptr != text.data() + text.size()) {
        throw UsageError("cannot parse " + what + ": '" + text + "'");
    }
    return value;
}

double parse_real(const string& text, const string& what) {
    try {
        size_t used = 0;
        double value = stod(text, &used);
        if (used == text.size() && isfinite(value)) {
            return value;
        }
    }
    catch (const exception&) {
    }
    throw UsageError("cannot parse " + what + ": '" + text + "'");
}

string take(map<string, string>& fields, const string& key, const string& spec) {
    auto it = fields.find(key);
    if (it == fields.end()) {
        throw UsageError("geometry spec '" + spec + "' needs " + key);
    }
    string value = it->second;
    fields.erase(it);
    return value;
}

string utc_timestamp() {
    auto now = chrono::system_clock::to_time_t(chrono::system_clock::now());
    tm parts{};
    gmtime_r(&now, &parts);
    ostringstream out;
    out << put_time(&parts, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

string csv_field(const string& text) {
    if (text.find_first_of(",\"\n") == string::npos) {
        return text;
    }
    string quoted = "\"";
    for (char ch : text) {
        if (ch == '"') {
            quoted += '"';
        }
        quoted += ch;
    }
    return quoted + "\"";
}

string sampler_name(SamplerKind kind) {
    switch (kind) {
        case SamplerKind::Product:
            return "product";
        case SamplerKind::Rba:
            return "rba";
        case SamplerKind::Exact:
            return "exact";
    }
    return "product";
}

SamplerKind parse_sampler(const string& name) {
    if (name == "product") {
        return SamplerKind::Product;
    }
    if (name == "rba") {
        return SamplerKind::Rba;
    }
    if (name == "exact") {
        return SamplerKind::Exact;
    }
    throw UsageError("unknown sampler '" + name + "'");
}

CostGeometry build_costs(const ExperimentConfig& config, const Geometry& g) {
    CostSpec spec;
    try {
        spec = CostSpec::parse(config.cost);
    }
    catch (const invalid_argument& e) {
        throw UsageError(e.what());
    }
    try {
        return CostGeometry::build(g, spec);
    }
    catch (const invalid_argument& e) {
        throw UsageError(e.what());
    }
}

void write_file(const fs::path& path, const string& text) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    ofstream out(path, ios::binary);
    if (!out) {
        throw runtime_error("cannot write " + path.string());
    }
    out << text;
}

string csv_preamble(const string& command, const ExperimentConfig& config) {
    ostringstream out;
    out << "# " << kVersion << ' ' << command << '\n';
    out << "# generated " << utc_timestamp() << '\n';
    out << "# config_hash " << config.hash() << '\n';
    out << "# config " << config.to_json().dump() << '\n';
    return out.str();
}

struct GraphContext {
    Geometry geometry;
    optional<Substrate> substrate;
};

GraphContext graph_context(const Geometry& g) {
    GraphContext ctx{g, nullopt};
    if (g.is_lattice()) {
        ctx.substrate = Substrate::build(g);
    }
    return ctx;
}

NavGraph make_graph(const GraphContext& ctx, const EdgeSet& edges) {
    return ctx.substrate ? NavGraph(*ctx.substrate, edges) : NavGraph(ctx.geometry, edges);
}

GreedyMode mode_for(const GraphContext& ctx, const ExperimentConfig& config) {
    return ctx.substrate ? config.greedy : GreedyMode::Pure;
}

}

Geometry parse_geometry(const string& spec) {
    auto colon = spec.find(':');
    if (colon == string::npos) {
        throw UsageError("malformed geometry spec '" + spec + "'");
    }
    string kind = spec.substr(0, colon);
    auto fields = parse_fields(spec.substr(colon + 1), spec);
    double gamma = 2.0;
    if (fields.count("gamma")) {
        gamma = parse_real(take(fields, "gamma", spec), "gamma");
    }
    optional<Geometry> g;
    try {
        if (kind == "cycle") {
            g = Geometry::cycle(parse_size(take(fields, "n", spec), "n"), gamma);
        }
        else if (kind == "torus") {
            size_t side = parse_size(take(fields, "side", spec), "side");
            size_t dims = fields.count("dims") ? parse_size(take(fields, "dims", spec), "dims") : 2;
            g = Geometry::torus(side, dims, gamma);
        }
        else if (kind == "setsystem") {
            shared_ptr<const SetSystem> ss;
            if (fields.count("file")) {
                ss = make_shared<const SetSystem>(SetSystem::load_file(take(fields, "file", spec)));
            }
            else {
                size_t branch = parse_size(take(fields, "branch", spec), "branch");
                size_t depth = parse_size(take(fields, "depth", spec), "depth");
                ss = make_shared<const SetSystem>(SetSystem::hierarchy(branch, depth));
            }
            g = as_geometry(ss);
        }
        else {
            throw UsageError("unknown geometry kind '" + kind + "'");
        }
    }
    catch (const UsageError&) {
        throw;
    }
    catch (const invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (!fields.empty()) {
        throw UsageError("unknown key '" + fields.begin()->first + "' in geometry spec '" + spec + "'");
    }
    return *g;
}

string fnv1a_hex(const string& text) {
    uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        hash ^= ch;
        hash *= 0x100000001b3ULL;
    }
    ostringstream out;
    out << hex << setw(16) << setfill('0') << hash;
    return out.str();
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    if (!j.is_object()) {
        throw UsageError("config must be a JSON object");
    }
    ExperimentConfig c;
    try {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const string& key = it.key();
            const json& v = it.value();
            if (key == "geometry") {
                c.geometry = v.get<string>();
            }
            else if (key == "cost") {
                c.cost = v.get<string>();
            }
            else if (key == "theta") {
                c.theta = v.get<double>();
            }
            else if (key == "rho") {
                c.rho = v.get<double>();
            }
            else if (key == "budgets") {
                c.budgets = v.get<vector<json>>();
            }
            else if (key == "sweep") {
                for (auto s = v.begin(); s != v.end(); ++s) {
                    if (s.key() == "points") {
                        c.sweep.points = s.value().get<int>();
                    }
                    else if (s.key() == "low") {
                        c.sweep.low = s.value().get<double>();
                    }
                    else if (s.key() == "high") {
                        c.sweep.high = s.value().get<double>();
                    }
                    else {
                        throw UsageError("unknown sweep key '" + s.key() + "'");
                    }
                }
            }
            else if (key == "sampler") {
                c.sampler = parse_sampler(v.get<string>());
            }
            else if (key == "edges_per_vertex") {
                c.edges_per_vertex = v.get<size_t>();
            }
            else if (key == "pairs") {
                c.pairs = v.get<size_t>();
            }
            else if (key == "seeds") {
                c.seeds = v.get<vector<uint64_t>>();
            }
            else if (key == "route_budget") {
                c.route_budget = v.get<size_t>();
            }
            else if (key == "greedy") {
                string mode = v.get<string>();
                if (mode != "fallback" && mode != "pure") {
                    throw UsageError("greedy must be 'fallback' or 'pure'");
                }
                c.greedy = mode == "pure" ? GreedyMode::Pure : GreedyMode::Fallback;
            }
            else if (key == "sample_pairs") {
                c.sample_pairs = v.get<size_t>();
            }
            else if (key == "samples") {
                c.samples = v.get<size_t>();
            }
            else if (key == "perturb") {
                c.perturb = v.get<double>();
            }
            else if (key == "exponents") {
                c.exponents = v.get<vector<double>>();
            }
            else if (key == "out") {
                c.out = v.get<string>();
            }
            else {
                throw UsageError("unknown config key '" + key + "'");
            }
        }
    }
    catch (const json::exception& e) {
        throw UsageError(string("bad config value: ") + e.what());
    }
    if (c.seeds.empty()) {
        throw UsageError("seeds must be nonempty");
    }
    if (c.sweep.points < 1 || !(c.sweep.low > 0.0) || !(c.sweep.high > 0.0)) {
        throw UsageError("sweep grid must be nonempty with positive factors");
    }
    if (!(c.rho > 0.0 && c.rho < 1.0)) {
        throw UsageError("rho must lie in (0, 1)");
    }
    if (!(c.theta >= 0.0)) {
        throw UsageError("theta must be >= 0");
    }
    if (c.pairs < 1) {
        throw UsageError("pairs must be >= 1");
    }
    return c;
}

json ExperimentConfig::to_json() const {
    return {
        {"geometry", geometry},
        {"cost", cost},
        {"theta", theta},
        {"rho", rho},
        {"budgets", budgets},
        {"sweep", {{"points", sweep.points}, {"low", sweep.low}, {"high", sweep.high}}},
        {"sampler", sampler_name(sampler)},
        {"edges_per_vertex", edges_per_vertex},
        {"pairs", pairs},
        {"seeds", seeds},
        {"route_budget", route_budget},
        {"greedy", greedy == GreedyMode::Pure ? "pure" : "fallback"},
        {"sample_pairs", sample_pairs},
        {"samples", samples},
        {"perturb", perturb},
        {"exponents", exponents},
        {"out", out},
    };
}

string ExperimentConfig::hash() const {
    return fnv1a_hex(to_json().dump());
}

double resolve_budget(const json& entry, const CostGeometry& cg, double theta) {
    if (entry.is_number()) {
        double B = entry.get<double>();
        if (!(B >= 0.0) || !isfinite(B)) {
            throw UsageError("budget must be a finite number >= 0");
        }
        return B;
    }
    if (!entry.is_string()) {
        throw UsageError("budget entries must be numbers or names");
    }
    string text = entry.get<string>();
    double factor = 1.0;
    auto star = text.find('*');
    string name = text.substr(0, star);
    if (star != string::npos) {
        factor = parse_real(text.substr(star + 1), "budget factor");
    }
    double base;
    if (name == "Bbar") {
        base = cg.unconstrained_budget();
    }
    else {
        Thresholds t = thresholds(cg, theta);
        if (name == "Ba") {
            if (!t.Ba) {
                throw UsageError("Ba needs indexing or logdensity costs");
            }
            base = *t.Ba;
        }
        else if (name == "Bminus") {
            base = t.Bminus;
        }
        else if (name == "Bplus") {
            base = t.Bplus;
        }
        else if (name == "B0") {
            base = t.B0;
        }
        else {
            throw UsageError("unknown budget name '" + name + "'");
        }
    }
    return base * factor;
}

string csv_number(double x) {
    if (!isfinite(x)) {
        return "";
    }
    char buffer[64];
    auto [ptr, ec] = to_chars(buffer, buffer + sizeof(buffer), x);
    return ec == errc() ? string(buffer, ptr) : string();
}

SandwichCheck sandwich_check(const CostGeometry& cg, double B, size_t N, double perturb, uint64_t seed) {
    if (N == 0) {
        throw invalid_argument("no samples");
    }
    if (!(perturb > 0.0)) {
        throw invalid_argument("perturb must be positive");
    }
    const int K = cg.K();
    SandwichCheck check;
    check.B = B;
    check.samples = N;
    check.perturb = perturb;

    ExactBoundedCostSampler exact(cg, B);
    check.method = exact.method() == ExactMethod::Enumerate ? "enumerate" : "rejection";
    EntropicSolution sol = solve_profile(cg, B);
    vector<double> q(K);
    for (int k = 1; k <= K; ++k) {
        q[k - 1] = min(1.0, sol.qStar[k - 1] * perturb);
    }

    vector<vector<double>> exact_counts(K, vector<double>(N)), product_counts(K, vector<double>(N));
    uint64_t proposals = 0;
    for (size_t i = 0; i < N; ++i) {
        auto rng = make_stream(seed, StreamTag::ExactProfile, i);
        EdgeProfile m = exact.sample_profile(rng);
        auto prng = make_stream(seed, StreamTag::SandwichProduct, i);
        EdgeProfile mp = sample_product_profile(cg, q, prng);
        for (int k = 0; k < K; ++k) {
            exact_counts[k][i] = static_cast<double>(m.m[k]);
            product_counts[k][i] = static_cast<double>(mp.m[k]);
        }
    }
    proposals = exact.proposals();
    if (exact.method() == ExactMethod::Rejection && proposals > 0) {
        check.acceptance_rate = static_cast<double>(exact.acceptances()) / static_cast<double>(proposals);
    }

    // tabulated law: per-scale means and the profile-frequency tests
    vector<double> law_means;
    if (exact.method() == ExactMethod::Enumerate && exact.profile_count() <= 100000) {
        // profile probabilities by a second walk over the feasible box
        vector<vector<uint64_t>> profiles;
        vector<double> log_weights;
        vector<uint64_t> m(K, 0);
        const double cap = B * static_cast<double>(cg.n());
        const double slack = 1e-12 * max(1.0, cap);
        auto walk = [&](auto&& self, int k, double spent, double entropy) -> void {
            if (k == K) {
                profiles.push_back(m);
                log_weights.push_back(entropy);
                return;
            }
            for (uint64_t x = 0; x <= cg.P(k + 1); ++x) {
                double cost = spent + cg.c(k + 1) * static_cast<double>(x);
                if (cost > cap + slack) {
                    break;
                }
                m[k] = x;
                self(self, k + 1, cost, entropy + log_binomial(cg.P(k + 1), x));
            }
            m[k] = 0;
        };
        walk(walk, 0, 0.0, 0.0);
        double top = *max_element(log_weights.begin(), log_weights.end());
        vector<double> prob(profiles.size());
        double total = 0.0;
        for (size_t i = 0; i < prob.size(); ++i) {
            prob[i] = exp(log_weights[i] - top);
            total += prob[i];
        }
        law_means.assign(K, 0.0);
        for (size_t i = 0; i < prob.size(); ++i) {
            prob[i] /= total;
            for (int k = 0; k < K; ++k) {
                law_means[k] += prob[i] * static_cast<double>(profiles[i][k]);
            }
        }
        map<vector<uint64_t>, size_t> index;
        for (size_t i = 0; i < profiles.size(); ++i) {
            index[profiles[i]] = i;
        }
        vector<double> exact_observed(profiles.size(), 0.0), product_observed(profiles.size() + 1, 0.0);
        for (size_t i = 0; i < N; ++i) {
            vector<uint64_t> me(K), mp(K);
            for (int k = 0; k < K; ++k) {
                me[k] = static_cast<uint64_t>(exact_counts[k][i]);
                mp[k] = static_cast<uint64_t>(product_counts[k][i]);
            }
            exact_observed[index.at(me)] += 1.0;
            auto it = index.find(mp);
            // product draws outside the feasible box land in an extra cell
            product_observed[it == index.end() ? profiles.size() : it->second] += 1.0;
        }
        check.exact_vs_law = chi_square_test(exact_observed, prob);
        vector<double> prob_extended = prob;
        prob_extended.push_back(0.0);
        ChiSquare product_fit;
        if (product_observed.back() > 0.0) {
            product_fit.statistic = numeric_limits<double>::infinity();
            product_fit.dof = static_cast<double>(profiles.size());
            product_fit.p_value = 0.0;
        }
        else {
            product_observed.pop_back();
            product_fit = chi_square_test(product_observed, prob);
        }
        check.product_vs_law = product_fit;
    }

    check.consistent = true;
    for (int k = 0; k < K; ++k) {
        ScaleComparison s;
        s.k = k + 1;
        Moments a = moments(exact_counts[k]);
        Moments b = moments(product_counts[k]);
        s.mean_exact = a.mean;
        s.mean_product = b.mean;
        s.pooled_se = pooled_standard_error(a, b);
        double diff = a.mean - b.mean;
        s.z = s.pooled_se > 0.0 ? diff / s.pooled_se : (diff == 0.0 ? 0.0 : copysign(INFINITY, diff));
        s.ks = ks_statistic(exact_counts[k], product_counts[k]);
        if (!law_means.empty()) {
            s.mean_law = law_means[k];
        }
        if (!(fabs(s.z) <= 3.0)) {
            check.consistent = false;
        }
        check.scales.push_back(s);
    }
    return check;
}

json to_json(const SandwichCheck& s) {
    json scales = json::array();
    for (const auto& c : s.scales) {
        scales.push_back({
            {"k", c.k},
            {"meanExact", c.mean_exact},
            {"meanProduct", c.mean_product},
            {"pooledSE", c.pooled_se},
            {"z", number(c.z)},
            {"ks", c.ks},
            {"meanLaw", c.mean_law ? json(*c.mean_law) : json(nullptr)},
        });
    }
    auto chi = [](const optional<ChiSquare>& c) -> json {
        if (!c) {
            return nullptr;
        }
        return {{"statistic", number(c->statistic)}, {"dof", c->dof}, {"pValue", c->p_value}};
    };
    return {
        {"B", s.B},
        {"samples", s.samples},
        {"perturb", s.perturb},
        {"method", s.method},
        {"acceptanceRate", s.acceptance_rate},
        {"scales", scales},
        {"verdict", s.consistent ? "consistent" : "inconsistent"},
        {"exactVsLaw", chi(s.exact_vs_law)},
        {"productVsLaw", chi(s.product_vs_law)},
    };
}

namespace {

struct Context {
    ExperimentConfig config;
    ostream& out;
    ostream& err;
};

int cmd_coherence(Context& ctx) {
    const auto& config = ctx.config;
    Geometry g = parse_geometry(config.geometry);
    CoherenceReport report = verify_coherence(g, config.rho, config.sample_pairs, config.seeds.front());
    json result = {{"version", kVersion}, {"configHash", config.hash()}, {"coherence", to_json(report)}};
    bool pass = report.pass_h1 && report.pass_h2;
    if (const SetSystem* ss = g.system()) {
        AxiomReport axioms = check_axioms(*ss);
        ShrinkageReport shrink = check_shrinkage(*ss);
        ScaleSetReport scales = check_scale_sets(*ss);
        CoherenceConstants constants = coherence_constants(ss->lambda(), ss->beta());
        IsotropyLemmaReport iso = check_isotropy_lemma(g, config.sample_pairs, config.seeds.front());
        // the bounded-growth lemma, checked below the top scale
        bool growth_ok = true;
        for (int k = 1; k < g.scale_count(); ++k) {
            if (report.shell_ratio_min[k - 1] < constants.alpha_growth - 1e-12 ||
                report.shell_ratio_max[k - 1] > constants.A_growth + 1e-12) {
                growth_ok = false;
            }
        }
        result["axioms"] = to_json(axioms);
        result["shrinkage"] = to_json(shrink);
        result["scaleSets"] = to_json(scales);
        result["constants"] = to_json(constants);
        result["isotropyLemma"] = to_json(iso);
        result["growthWithinConstants"] = growth_ok;
        pass = pass && axioms.pass() && shrink.violation_count == 0 && scales.missing_count == 0 && growth_ok;
    }
    result["pass"] = pass;
    write_file(fs::path(config.out) / "coherence.json", result.dump(2) + "\n");
    ctx.out << result.dump(2) << '\n';
    return pass ? 0 : 1;
}

int cmd_optimize(Context& ctx) {
    const auto& config = ctx.config;
    Geometry g = parse_geometry(config.geometry);
    CostGeometry cg = build_costs(config, g);
    json result = {{"version", kVersion}, {"configHash", config.hash()}, {"costGeometry", to_json(cg)}};
    optional<Thresholds> t;
    try {
        t = thresholds(cg, config.theta);
        result["thresholds"] = to_json(*t);
        if (t->Ba) {
            result["window"] = {{"BminusLeBa", t->Bminus <= *t->Ba}, {"BaLeBplus", *t->Ba <= t->Bplus}};
        }
    }
    catch (const domain_error& e) {
        result["thresholds"] = nullptr;
        result["thresholdsError"] = e.what();
    }
    vector<json> budgets = config.budgets;
    if (budgets.empty()) {
        budgets = {"Bbar"};
        if (t) {
            budgets = {"Bminus", "Bplus"};
            if (t->Ba) {
                budgets.insert(budgets.begin() + 1, "Ba");
            }
        }
    }
    json solutions = json::array();
    for (const json& entry : budgets) {
        double B = resolve_budget(entry, cg, config.theta);
        EntropicSolution sol = solve_profile(cg, B);
        json row = {{"budget", entry}, {"solution", to_json(sol)}};
        row["roundtripResidual"] = isinf(sol.lambda) ? 0.0 : fabs(g_of_lambda(cg, sol.lambda) - min(B, sol.Bbar));
        row["budgetResidual"] = sol.budget_residual(cg);
        row["stationarityResidual"] = sol.stationarity_residual(cg);
        try {
            row["sandwich"] = to_json(sandwich_params(cg, sol));
        }
        catch (const domain_error& e) {
            row["sandwich"] = nullptr;
            row["sandwichError"] = e.what();
        }
        solutions.push_back(row);
    }
    result["solutions"] = solutions;
    write_file(fs::path(config.out) / "optimize.json", result.dump(2) + "\n");
    ctx.out << result.dump(2) << '\n';
    return 0;
}

const char* kSweepPlot = R"gp(set datafile separator ","
set key autotitle columnhead
set terminal pngcairo size 900,600
set logscale x
set xlabel "budget B"

set output "sweep_success.png"
set ylabel "routing success rate"
plot "sweep.csv" using (column("B")):(column("success_rate")) with points pt 7 title "success rate"

set output "sweep_edges.png"
set ylabel "|E| / (n (ln n)^(theta+1))"
plot "sweep.csv" using (column("B")):(column("edges_norm")) with points pt 7 title "normalized edge count"
)gp";

const char* kExponentPlot = R"gp(set datafile separator ","
set key autotitle columnhead
set terminal pngcairo size 900,600
set xlabel "exponent lambda / alpha"

set output "exponent_degree.png"
set ylabel "mean degree"
plot "exponent.csv" using (column("exponent")):(column("mean_degree")) with points pt 7 title "mean degree"

set output "exponent_success.png"
set ylabel "routing success rate"
plot "exponent.csv" using (column("exponent")):(column("success_rate")) with points pt 7 title "success rate"
)gp";

struct SweepRow {
    double B = 0.0;
    uint64_t seed = 0;
    string line;
    bool ok = true;
};

int cmd_sweep(Context& ctx) {
    const auto& config = ctx.config;
    Geometry g = parse_geometry(config.geometry);
    CostGeometry cg = build_costs(config, g);
    const int K = cg.K();
    const double n = static_cast<double>(g.size());
    const double logn = log(n);
    optional<Thresholds> t;
    try {
        t = thresholds(cg, config.theta);
    }
    catch (const domain_error&) {
    }

    vector<double> budgets;
    if (config.sampler == SamplerKind::Rba) {
        budgets = {numeric_limits<double>::quiet_NaN()};
    }
    else if (!config.budgets.empty()) {
        for (const json& entry : config.budgets) {
            budgets.push_back(resolve_budget(entry, cg, config.theta));
        }
    }
    else {
        if (!t) {
            throw UsageError("sweep grid needs thresholds; give explicit budgets");
        }
        // small geometries can put Bminus above Bplus; the grid then runs
        // between the two ends in increasing order
        double lo = t->Bminus * config.sweep.low;
        double hi = t->Bplus * config.sweep.high;
        if (lo > hi) {
            swap(lo, hi);
        }
        if (!(lo > 0.0) || !isfinite(hi)) {
            throw UsageError("sweep bounds invalid: grid ends must be positive and finite");
        }
        for (int i = 0; i < config.sweep.points; ++i) {
            double frac = config.sweep.points == 1 ? 0.0 : static_cast<double>(i) / (config.sweep.points - 1);
            budgets.push_back(lo * pow(hi / lo, frac));
        }
    }

    GraphContext graphs = graph_context(g);
    const size_t route_budget = config.route_budget ? config.route_budget : default_budget(g.size());
    const string hash = config.hash();

    ostringstream header;
    header << "config_hash,version,geometry,n,gamma,cost_spec,sampler,B,lambda,seed,pairs,route_budget,"
              "success_rate,p50,p90,p99,mean_long_edges,edges,edges_norm";
    for (int k = 1; k <= K; ++k) {
        header << ",m_" << k;
    }
    header << ",mu,tau,epsilon,delta,Bminus,Bplus,Ba,status";

    vector<SweepRow> rows;
    for (double B : budgets) {
        for (uint64_t seed : config.seeds) {
            SweepRow row;
            row.B = B;
            row.seed = seed;
            ostringstream line;
            line << hash << ',' << csv_field(kVersion) << ',' << csv_field(g.describe()) << ',' << g.size() << ','
                 << csv_number(g.gamma()) << ',' << csv_field(cg.spec().describe()) << ','
                 << sampler_name(config.sampler) << ',' << csv_number(B);
            string status = "ok";
            string tail;
            try {
                EdgeSet edges;
                optional<EntropicSolution> sol;
                optional<SandwichParams> sw;
                if (config.sampler == SamplerKind::Rba) {
                    edges = sample_rba(g, config.edges_per_vertex, seed);
                }
                else {
                    sol = solve_profile(cg, B);
                    try {
                        sw = sandwich_params(cg, *sol);
                    }
                    catch (const domain_error&) {
                    }
                    edges = config.sampler == SamplerKind::Product ? sample_product(cg, sol->qStar, seed)
                                                                   : sample_bounded_cost_exact(cg, B, seed);
                }
                EdgeProfile m = edge_profile_of(cg, edges);
                NavGraph ng = make_graph(graphs, edges);
                BatchStats stats = route_trial_batch(ng, config.pairs, route_budget, seed, mode_for(graphs, config));
                ostringstream rest;
                rest << ',' << csv_number(sol ? sol->lambda : NAN) << ',' << seed << ',' << config.pairs << ','
                     << route_budget << ',' << csv_number(stats.success_rate) << ',' << csv_number(stats.p50) << ','
                     << csv_number(stats.p90) << ',' << csv_number(stats.p99) << ','
                     << csv_number(stats.mean_long_edges) << ',' << edges.size() << ','
                     << csv_number(static_cast<double>(edges.size()) / (n * pow(logn, config.theta + 1.0)));
                for (int k = 0; k < K; ++k) {
                    rest << ',' << m.m[k];
                }
                rest << ',' << csv_number(sw ? sw->mu : NAN) << ',' << csv_number(sw ? sw->tau : NAN) << ','
                     << csv_number(sw ? sw->epsilon : NAN) << ',' << csv_number(sw ? sw->delta : NAN);
                tail = rest.str();
            }
            catch (const exception& e) {
                status = string("error: ") + e.what();
                row.ok = false;
                ostringstream rest;
                rest << ",," << seed << ',' << config.pairs << ',' << route_budget << ",,,,,,,";
                for (int k = 0; k < K; ++k) {
                    rest << ',';
                }
                rest << ",,,,";
                tail = rest.str();
            }
            line << tail << ',' << csv_number(t ? t->Bminus : NAN) << ',' << csv_number(t ? t->Bplus : NAN) << ','
                 << csv_number(t && t->Ba ? *t->Ba : NAN) << ',' << csv_field(status);
            row.line = line.str();
            rows.push_back(std::move(row));
        }
    }
    stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        if (a.B != b.B && !(std::isnan(a.B) && std::isnan(b.B))) {
            return a.B < b.B;
        }
        return a.seed < b.seed;
    });

    string csv = csv_preamble("sweep", config) + header.str() + "\n";
    size_t failed = 0;
    for (const auto& row : rows) {
        csv += row.line + "\n";
        failed += row.ok ? 0 : 1;
    }
    fs::path dir(config.out);
    write_file(dir / "sweep.csv", csv);
    write_file(dir / "sweep.gp", kSweepPlot);
    json summary = {{"version", kVersion},        {"configHash", hash},
                    {"rows", rows.size()},        {"failedRows", failed},
                    {"csv", (dir / "sweep.csv").string()}, {"plot", (dir / "sweep.gp").string()}};
    ctx.out << summary.dump(2) << '\n';
    return failed == 0 ? 0 : 1;
}

int cmd_sandwich_check(Context& ctx) {
    const auto& config = ctx.config;
    if (config.samples == 0) {
        throw UsageError("no samples");
    }
    Geometry g = parse_geometry(config.geometry);
    CostGeometry cg = build_costs(config, g);
    json entry = config.budgets.empty() ? json("Ba") : config.budgets.front();
    double B = resolve_budget(entry, cg, config.theta);
    SandwichCheck check = sandwich_check(cg, B, config.samples, config.perturb, config.seeds.front());
    json result = {{"version", kVersion}, {"configHash", config.hash()}, {"budget", entry}};
    result["check"] = to_json(check);
    EntropicSolution sol = solve_profile(cg, B);
    result["solution"] = to_json(sol);
    try {
        result["sandwich"] = to_json(sandwich_params(cg, sol));
    }
    catch (const domain_error& e) {
        result["sandwich"] = nullptr;
    }
    write_file(fs::path(config.out) / "sandwich.json", result.dump(2) + "\n");
    ctx.out << result.dump(2) << '\n';
    return check.consistent ? 0 : 1;
}

int cmd_exponent_sweep(Context& ctx) {
    const auto& config = ctx.config;
    Geometry g = parse_geometry(config.geometry);
    CostGeometry cg = build_costs(config, g);
    if (cg.spec().family != CostFamily::LogDensity) {
        throw UsageError("exponent-sweep needs a logdensity cost");
    }
    if (config.exponents.empty()) {
        throw UsageError("exponents must be nonempty");
    }
    GraphContext graphs = graph_context(g);
    const size_t route_budget = config.route_budget ? config.route_budget : default_budget(g.size());
    const string hash = config.hash();
    const double n = static_cast<double>(g.size());

    struct Row {
        double exponent;
        uint64_t seed;
        string line;
        bool ok;
    };
    vector<Row> rows;
    for (double e : config.exponents) {
        double lambda = e * cg.spec().alpha;
        double B = g_of_lambda(cg, lambda);
        EntropicSolution sol = solve_profile(cg, B);
        for (uint64_t seed : config.seeds) {
            ostringstream line;
            line << hash << ',' << csv_field(kVersion) << ',' << csv_field(g.describe()) << ',' << g.size() << ','
                 << csv_field(cg.spec().describe()) << ',' << csv_number(e) << ',' << csv_number(lambda) << ','
                 << csv_number(B) << ',' << seed << ',' << config.pairs << ',' << route_budget;
            bool ok = true;
            try {
                EdgeSet edges = sample_product(cg, sol.qStar, seed);
                NavGraph ng = make_graph(graphs, edges);
                BatchStats stats = route_trial_batch(ng, config.pairs, route_budget, seed, mode_for(graphs, config));
                double per_vertex = static_cast<double>(edges.size()) / n;
                line << ',' << edges.size() << ',' << csv_number(per_vertex) << ',' << csv_number(2.0 * per_vertex)
                     << ',' << csv_number(stats.success_rate) << ',' << csv_number(stats.p50) << ','
                     << csv_number(stats.p90) << ',' << csv_number(stats.p99) << ','
                     << csv_number(stats.mean_long_edges) << ",ok";
            }
            catch (const exception& ex) {
                ok = false;
                line << ",,,,,,,,," << csv_field(string("error: ") + ex.what());
            }
            rows.push_back({e, seed, line.str(), ok});
        }
    }
    stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return a.exponent != b.exponent ? a.exponent < b.exponent : a.seed < b.seed;
    });
    string csv = csv_preamble("exponent-sweep", config) +
                 "config_hash,version,geometry,n,cost_spec,exponent,lambda,B,seed,pairs,route_budget,edges,"
                 "edges_per_vertex,mean_degree,success_rate,p50,p90,p99,mean_long_edges,status\n";
    size_t failed = 0;
    for (const auto& row : rows) {
        csv += row.line + "\n";
        failed += row.ok ? 0 : 1;
    }
    fs::path dir(config.out);
    write_file(dir / "exponent.csv", csv);
    write_file(dir / "exponent.gp", kExponentPlot);
    json summary = {{"version", kVersion},          {"configHash", hash},
                    {"rows", rows.size()},          {"failedRows", failed},
                    {"csv", (dir / "exponent.csv").string()}, {"plot", (dir / "exponent.gp").string()}};
    ctx.out << summary.dump(2) << '\n';
    return failed == 0 ? 0 : 1;
}

}

int run_cli(const vector<string>& args, ostream& out, ostream& err) {
    configure_threads_from_env();

    CLI::App app{"Navigability experiments on coherent geometries", "navlab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    struct Options {
        string config_path;
        optional<uint64_t> seed;
        optional<string> out, geometry, cost, sampler;
        optional<double> theta, rho, perturb;
        optional<size_t> pairs, samples;
        vector<string> budgets;
    } opts;

    vector<CLI::App*> commands;
    for (const char* name : {"coherence", "optimize", "sweep", "sandwich-check", "exponent-sweep"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", opts.config_path, "JSON config file");
        sub->add_option("--seed", opts.seed, "single seed, replaces the config seed list");
        sub->add_option("--out", opts.out, "output directory");
        sub->add_option("--geometry", opts.geometry, "geometry spec, e.g. cycle:n=1024");
        sub->add_option("--cost", opts.cost, "cost spec, e.g. logdensity:alpha=1");
        sub->add_option("--theta", opts.theta, "richness exponent theta");
        sub->add_option("--rho", opts.rho, "contraction factor");
        sub->add_option("--sampler", opts.sampler, "product, rba or exact");
        sub->add_option("--pairs", opts.pairs, "routing pairs per cell");
        sub->add_option("--samples", opts.samples, "draws per law (sandwich-check)");
        sub->add_option("--perturb", opts.perturb, "qStar multiplier (sandwich-check)");
        sub->add_option("--budget", opts.budgets, "budget value or name (Ba, Bminus, Bplus, Bbar, B0)");
        commands.push_back(sub);
    }
    commands[0]->description("verify bounded growth and isotropy (and set-system axioms)");
    commands[1]->description("solve the entropy program and report thresholds");
    commands[2]->description("sample graphs across budgets and route");
    commands[3]->description("compare exact bounded-cost and product profile laws");
    commands[4]->description("sweep the exponent lambda/alpha for logdensity costs");

    vector<string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    }
    catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    }
    catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return 0;
    }
    catch (const CLI::ParseError& e) {
        err << "navlab: " << e.what() << '\n';
        return 2;
    }

    CLI::App* chosen = app.get_subcommands().front();
    try {
        json raw = json::object();
        if (!opts.config_path.empty()) {
            ifstream in(opts.config_path);
            if (!in) {
                throw UsageError("cannot open config file " + opts.config_path);
            }
            try {
                raw = json::parse(in);
            }
            catch (const json::parse_error& e) {
                throw UsageError(string("config is not valid JSON: ") + e.what());
            }
        }
        ExperimentConfig config = ExperimentConfig::from_json(raw);
        if (opts.seed) {
            config.seeds = {*opts.seed};
        }
        if (opts.out) {
            config.out = *opts.out;
        }
        if (opts.geometry) {
            config.geometry = *opts.geometry;
        }
        if (opts.cost) {
            config.cost = *opts.cost;
        }
        if (opts.sampler) {
            config.sampler = parse_sampler(*opts.sampler);
        }
        if (opts.theta) {
            config.theta = *opts.theta;
        }
        if (opts.rho) {
            config.rho = *opts.rho;
        }
        if (opts.perturb) {
            config.perturb = *opts.perturb;
        }
        if (opts.pairs) {
            config.pairs = *opts.pairs;
        }
        if (opts.samples) {
            config.samples = *opts.samples;
        }
        if (!opts.budgets.empty()) {
            config.budgets.clear();
            for (const string& b : opts.budgets) {
                try {
                    size_t used = 0;
                    double value = stod(b, &used);
                    config.budgets.push_back(used == b.size() ? json(value) : json(b));
                }
                catch (const exception&) {
                    config.budgets.push_back(b);
                }
            }
        }
        config = ExperimentConfig::from_json(config.to_json());

        Context ctx{config, out, err};
        string name = chosen->get_name();
        if (name == "coherence") {
            return cmd_coherence(ctx);
        }
        if (name == "optimize") {
            return cmd_optimize(ctx);
        }
        if (name == "sweep") {
            return cmd_sweep(ctx);
        }
        if (name == "sandwich-check") {
            return cmd_sandwich_check(ctx);
        }
        return cmd_exponent_sweep(ctx);
    }
    catch (const UsageError& e) {
        err << "navlab: " << e.what() << '\n';
        return 2;
    }
    catch (const exception& e) {
        err << "navlab: " << e.what() << '\n';
        return 1;
    }
}

}
