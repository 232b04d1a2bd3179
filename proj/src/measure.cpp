#include "navlab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>


namespace navlab {

using namespace std;

namespace {

double parse_double(const string& text, const string& what) {
    size_t used = 0;
    double value;
    try {
        value = stod(text, &used);
    }
    catch (const exception&) {
        throw invalid_argument("cannot parse " + what + ": '" + text + "'");
    }
    if (used != text.size() || !isfinite(value)) {
        throw invalid_argument("cannot parse " + what + ": '" + text + "'");
    }
    return value;
}

}

CostSpec CostSpec::parse(const string& text) {
    auto colon = text.find(':');
    if (colon == string::npos) {
        throw invalid_argument("cost spec needs '<family>:<args>': '" + text + "'");
    }
    string family = text.substr(0, colon);
    string args = text.substr(colon + 1);
    CostSpec spec;
    if (family == "indexing" || family == "logdensity") {
        spec.family = family == "indexing" ? CostFamily::Indexing : CostFamily::LogDensity;
        if (args.rfind("alpha=", 0) != 0) {
            throw invalid_argument("cost spec needs alpha=<value>: '" + text + "'");
        }
        spec.alpha = parse_double(args.substr(6), "cost alpha");
        if (!(spec.alpha > 0.0)) {
            throw invalid_argument("cost alpha must be positive");
        }
    }
    else if (family == "explicit") {
        spec.family = CostFamily::Explicit;
        stringstream fields(args);
        string item;
        while (getline(fields, item, ',')) {
            spec.values.push_back(parse_double(item, "cost value"));
        }
        if (spec.values.empty()) {
            throw invalid_argument("explicit cost spec needs at least one value");
        }
    }
    else {
        throw invalid_argument("unknown cost family '" + family + "'");
    }
    return spec;
}

string CostSpec::describe() const {
    ostringstream out;
    out.precision(17);
    switch (family) {
        case CostFamily::Indexing:
            out << "indexing:alpha=" << alpha;
            break;
        case CostFamily::LogDensity:
            out << "logdensity:alpha=" << alpha;
            break;
        case CostFamily::Explicit: {
            out << "explicit:";
            const char* sep = "";
            for (double v : values) {
                out << sep << v;
                sep = ",";
            }
            break;
        }
    }
    return out.str();
}

CostGeometry CostGeometry::build(const Geometry& g, const CostSpec& spec) {
    const size_t n = g.size();
    const int K = g.scale_count();
    vector<uint64_t> doubled(K, 0);
    if (g.is_lattice()) {
        for (int k = 1; k <= K; ++k) {
            doubled[k - 1] = static_cast<uint64_t>(g.shell_count(0, k)) * n;
        }
    }
    else {
        for (VertexId v = 0; v < n; ++v) {
            for (int k = 1; k <= K; ++k) {
                doubled[k - 1] += g.shell_count(v, k);
            }
        }
    }
    int top = K;
    while (top > 0 && doubled[top - 1] == 0) {
        --top;
    }
    if (top == 0) {
        throw invalid_argument("geometry has no pairs");
    }
    CostGeometry cg;
    cg.n_ = n;
    cg.gamma_ = g.gamma();
    cg.spec_ = spec;
    for (int k = 1; k <= top; ++k) {
        if (doubled[k - 1] == 0) {
            throw invalid_argument("empty interior scale class " + to_string(k));
        }
        cg.P_.push_back(doubled[k - 1] / 2);
        cg.p_.push_back(static_cast<double>(doubled[k - 1]) / 2.0 / static_cast<double>(n));
    }
    switch (spec.family) {
        case CostFamily::Indexing:
            for (int k = 1; k <= top; ++k) {
                cg.c_.push_back(k / spec.alpha);
            }
            break;
        case CostFamily::LogDensity:
            for (int k = 1; k <= top; ++k) {
                if (!(cg.p_[k - 1] > 1.0)) {
                    throw invalid_argument("log-density cost needs p_k > 1 at scale " + to_string(k));
                }
                cg.c_.push_back(log(cg.p_[k - 1]) / spec.alpha);
            }
            break;
        case CostFamily::Explicit:
            if (static_cast<int>(spec.values.size()) != top) {
                throw invalid_argument("explicit cost count " + to_string(spec.values.size()) +
                                       " does not match K = " + to_string(top));
            }
            cg.c_ = spec.values;
            break;
    }
    cg.alpha_growth_ = growth_constants(g).alpha;
    cg.geometry_ = g;
    cg.validate();
    return cg;
}

CostGeometry CostGeometry::from_classes(size_t n, vector<uint64_t> P, vector<double> costs, double gamma,
                                        optional<double> alpha_growth) {
    if (n < 2) {
        throw invalid_argument("cost geometry needs n >= 2");
    }
    if (P.empty() || P.size() != costs.size()) {
        throw invalid_argument("class sizes and costs must be nonempty and of equal length");
    }
    CostGeometry cg;
    cg.n_ = n;
    cg.gamma_ = gamma;
    cg.P_ = std::move(P);
    cg.c_ = std::move(costs);
    cg.spec_.family = CostFamily::Explicit;
    cg.spec_.values = cg.c_;
    for (uint64_t Pk : cg.P_) {
        cg.p_.push_back(static_cast<double>(Pk) / static_cast<double>(n));
    }
    if (alpha_growth) {
        cg.alpha_growth_ = *alpha_growth;
    }
    else {
        cg.alpha_growth_ = numeric_limits<double>::infinity();
        double radius = 1.0;
        for (double pk : cg.p_) {
            radius *= gamma;
            cg.alpha_growth_ = min(cg.alpha_growth_, pk / radius);
        }
    }
    cg.validate();
    return cg;
}

void CostGeometry::validate() const {
    for (int k = 1; k <= K(); ++k) {
        if (!(c(k) > 0.0) || !isfinite(c(k))) {
            throw invalid_argument("cost at scale " + to_string(k) + " must be positive");
        }
        if (P(k) == 0) {
            throw invalid_argument("empty class at scale " + to_string(k));
        }
    }
}

const Geometry& CostGeometry::geometry() const {
    if (!geometry_) {
        throw logic_error("cost geometry has no vertex geometry");
    }
    return *geometry_;
}

uint64_t CostGeometry::total_pairs() const {
    uint64_t total = 0;
    for (uint64_t Pk : P_) {
        total += Pk;
    }
    return total;
}

double CostGeometry::unconstrained_budget() const {
    double total = 0.0;
    for (int k = 1; k <= K(); ++k) {
        total += p(k) * c(k);
    }
    return total / 2.0;
}

double log_binomial(double P, double m) {
    if (m < 0.0 || m > P) {
        throw invalid_argument("log_binomial needs 0 <= m <= P");
    }
    return lgamma(P + 1.0) - lgamma(m + 1.0) - lgamma(P - m + 1.0);
}

double log_binomial(uint64_t P, uint64_t m) {
    if (m > P) {
        throw invalid_argument("log_binomial needs m <= P");
    }
    if (m == 0 || m == P) {
        return 0.0;
    }
    return log_binomial(static_cast<double>(P), static_cast<double>(m));
}

double profile_entropy(const CostGeometry& cg, const EdgeProfile& m) {
    if (static_cast<int>(m.m.size()) != cg.K()) {
        throw invalid_argument("profile length does not match K");
    }
    double total = 0.0;
    for (int k = 1; k <= cg.K(); ++k) {
        if (m.m[k - 1] > cg.P(k)) {
            throw invalid_argument("profile exceeds class size at scale " + to_string(k));
        }
        total += log_binomial(cg.P(k), m.m[k - 1]);
    }
    return total;
}

double continuous_entropy(const CostGeometry& cg, span<const double> m) {
    if (static_cast<int>(m.size()) != cg.K()) {
        throw invalid_argument("profile length does not match K");
    }
    double total = 0.0;
    for (int k = 1; k <= cg.K(); ++k) {
        double P = static_cast<double>(cg.P(k));
        double x = m[k - 1];
        if (x < 0.0 || x > P) {
            throw invalid_argument("profile exceeds class size at scale " + to_string(k));
        }
        if (x > 0.0) {
            total -= x * log(x / P);
        }
        if (P - x > 0.0) {
            total -= (P - x) * log((P - x) / P);
        }
    }
    return total;
}

double logistic_tail(double x) {
    if (x >= 0.0) {
        double e = exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + exp(x));
}

double g_of_lambda(const CostGeometry& cg, double lambda) {
    if (lambda < 0.0 || std::isnan(lambda)) {
        throw invalid_argument("lambda must be >= 0");
    }
    if (isinf(lambda)) {
        return 0.0;
    }
    double total = 0.0;
    for (int k = 1; k <= cg.K(); ++k) {
        total += cg.c(k) * cg.p(k) * logistic_tail(lambda * cg.c(k));
    }
    return total;
}

double invert_budget(const CostGeometry& cg, double B) {
    if (B < 0.0 || std::isnan(B)) {
        throw invalid_argument("budget must be >= 0");
    }
    if (B >= cg.unconstrained_budget()) {
        return 0.0;
    }
    if (B == 0.0) {
        return numeric_limits<double>::infinity();
    }
    double lo = 0.0, hi = 1.0;
    while (g_of_lambda(cg, hi) >= B) {
        lo = hi;
        hi *= 2.0;
        if (!isfinite(hi)) {
            throw runtime_error("budget too small to bracket");
        }
    }
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        double value = g_of_lambda(cg, mid);
        if (fabs(value - B) <= 1e-12 * B || hi - lo <= 4.0 * numeric_limits<double>::epsilon() * hi) {
            break;
        }
        if (value > B) {
            lo = mid;
        }
        else {
            hi = mid;
        }
    }
    return mid;
}

EntropicSolution solve_profile(const CostGeometry& cg, double B) {
    EntropicSolution sol;
    sol.B = B;
    sol.Bbar = cg.unconstrained_budget();
    sol.lambda = invert_budget(cg, B);
    for (int k = 1; k <= cg.K(); ++k) {
        double q = isinf(sol.lambda) ? 0.0 : logistic_tail(sol.lambda * cg.c(k));
        sol.qStar.push_back(q);
        sol.aStar.push_back(cg.p(k) * q);
        sol.mStar.push_back(static_cast<double>(cg.P(k)) * q);
    }
    return sol;
}

double EntropicSolution::budget_residual(const CostGeometry& cg) const {
    double spent = 0.0;
    for (int k = 1; k <= cg.K(); ++k) {
        spent += aStar[k - 1] * cg.c(k);
    }
    return fabs(spent - min(B, Bbar));
}

double EntropicSolution::stationarity_residual(const CostGeometry& cg) const {
    if (isinf(lambda)) {
        return 0.0;
    }
    double worst = 0.0;
    for (int k = 1; k <= cg.K(); ++k) {
        double a = aStar[k - 1];
        // p - a = p q(-lambda c), computed without cancellation
        double rest = cg.p(k) * logistic_tail(-lambda * cg.c(k));
        worst = max(worst, fabs(log(a) - log(rest) + lambda * cg.c(k)));
    }
    return worst;
}

SandwichParams sandwich_params(const CostGeometry& cg, const EntropicSolution& sol) {
    if (!(sol.B > 0.0)) {
        throw domain_error("degenerate budget: mu = 0");
    }
    const double n = static_cast<double>(cg.n());
    const double logn = log(n);
    SandwichParams out;
    out.mu = numeric_limits<double>::infinity();
    for (int k = 1; k <= cg.K(); ++k) {
        double m = sol.mStar[k - 1];
        out.mu = min(out.mu, min(m, static_cast<double>(cg.P(k)) - m));
    }
    if (!(out.mu > 0.0)) {
        throw domain_error("degenerate budget: mu = 0");
    }
    out.tau = 5.0 * cg.K() * logn / out.mu;
    out.epsilon = sqrt(24.0 / logn);
    out.valid = out.epsilon * out.epsilon > 12.0 * out.tau;
    out.delta = 2.0 * exp(-out.mu * (out.epsilon * out.epsilon / 12.0 - out.tau));
    out.delta_asymptotic = 2.0 * exp(-5.0 * cg.K() * logn);
    return out;
}

Thresholds thresholds(const CostGeometry& cg, double theta) {
    if (!(theta >= 0.0)) {
        throw invalid_argument("theta must be >= 0");
    }
    const double n = static_cast<double>(cg.n());
    const double logn = log(n);
    const double loglogn = log(logn);
    const int K = cg.K();
    Thresholds t;
    t.theta = theta;
    t.k_theta = (theta * loglogn - log(cg.alpha_growth())) / log(cg.gamma());
    t.k_min = max(1, static_cast<int>(ceil(t.k_theta - 1e-12)));

    const double target = 5.0 * K * logn * logn;
    t.lambda0 = numeric_limits<double>::infinity();
    t.lambda0_exact = numeric_limits<double>::infinity();
    for (int k = 1; k <= K; ++k) {
        if (!(cg.p(k) > 1.0)) {
            t.excluded_scales.push_back(k);
            continue;
        }
        t.lambda0 = min(t.lambda0, log(n * cg.p(k) / target) / cg.c(k));
        double ratio = n * cg.p(k) / target - 1.0;
        t.lambda0_exact = min(t.lambda0_exact, ratio > 0.0 ? log(ratio) / cg.c(k) : -numeric_limits<double>::infinity());
    }
    if (isinf(t.lambda0) && t.lambda0 > 0) {
        throw domain_error("no scale with p_k > 1 for lambda0");
    }
    // a negative lambda0 means no budget reaches the target thickness; B0 is
    // then Bbar
    t.B0 = g_of_lambda(cg, max(0.0, t.lambda0));
    t.B0_exact = g_of_lambda(cg, max(0.0, t.lambda0_exact));

    t.lambda_theta = numeric_limits<double>::infinity();
    t.Lambda_theta = -numeric_limits<double>::infinity();
    for (int k = t.k_min; k <= K; ++k) {
        if (!(cg.p(k) > 1.0)) {
            continue;
        }
        double lp = log(cg.p(k));
        t.lambda_theta = min(t.lambda_theta, (lp + theta * loglogn) / cg.c(k));
        t.Lambda_theta = max(t.Lambda_theta, (lp - theta * loglogn) / cg.c(k));
    }
    if (isinf(t.lambda_theta)) {
        throw domain_error("all scales below k_theta: geometry too small for theta");
    }
    t.Bminus = max(t.B0, g_of_lambda(cg, t.lambda_theta));
    t.Bplus = g_of_lambda(cg, max(0.0, t.Lambda_theta));
    if (cg.spec().family != CostFamily::Explicit) {
        t.Ba = g_of_lambda(cg, cg.spec().alpha);
    }
    return t;
}

EdgeProfile brute_force_profile(const CostGeometry& cg, double B) {
    const int K = cg.K();
    if (K > 4) {
        throw invalid_argument("scale too large for oracle: K > 4");
    }
    for (int k = 1; k <= K; ++k) {
        if (cg.P(k) > 64) {
            throw invalid_argument("scale too large for oracle: P_k > 64");
        }
    }
    if (B < 0.0) {
        throw invalid_argument("budget must be >= 0");
    }
    const double cap = B * static_cast<double>(cg.n());
    const double slack = 1e-12 * max(1.0, cap);
    EdgeProfile best{vector<uint64_t>(K, 0)};
    double best_entropy = 0.0;
    vector<uint64_t> m(K, 0);
    // odometer over the box, pruned by the running cost
    auto recurse = [&](auto&& self, int k, double spent, double entropy) -> void {
        if (k == K) {
            if (entropy > best_entropy + 1e-12) {
                best_entropy = entropy;
                best.m = m;
            }
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
    recurse(recurse, 0, 0.0, 0.0);
    return best;
}

}
