#include "navlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace navlab {

using namespace std;

Moments moments(span<const double> xs) {
    Moments m;
    m.count = xs.size();
    if (xs.empty()) {
        return m;
    }
    for (double x : xs) {
        m.mean += x;
    }
    m.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) {
            ss += (x - m.mean) * (x - m.mean);
        }
        m.variance = ss / static_cast<double>(xs.size() - 1);
    }
    return m;
}

double pooled_standard_error(const Moments& a, const Moments& b) {
    if (a.count == 0 || b.count == 0) {
        throw invalid_argument("no samples");
    }
    return sqrt(a.variance / static_cast<double>(a.count) + b.variance / static_cast<double>(b.count));
}

double ks_statistic(vector<double> a, vector<double> b) {
    if (a.empty() || b.empty()) {
        throw invalid_argument("no samples");
    }
    sort(a.begin(), a.end());
    sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    size_t i = 0, j = 0;
    double worst = 0.0;
    while (i < a.size() || j < b.size()) {
        double x = i < a.size() && (j >= b.size() || a[i] <= b[j]) ? a[i] : b[j];
        while (i < a.size() && a[i] == x) {
            ++i;
        }
        while (j < b.size() && b[j] == x) {
            ++j;
        }
        worst = max(worst, fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return worst;
}

double chi_square_sf(double x, double dof) {
    if (x <= 0.0) {
        return 1.0;
    }
    return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

ChiSquare chi_square_test(span<const double> observed, span<const double> probabilities) {
    if (observed.size() != probabilities.size() || observed.empty()) {
        throw invalid_argument("chi-square needs matching nonempty cells");
    }
    double total = 0.0;
    for (double o : observed) {
        total += o;
    }
    if (total <= 0.0) {
        throw invalid_argument("no samples");
    }
    ChiSquare out;
    double merged_observed = 0.0, merged_expected = 0.0;
    size_t cells = 0;
    for (size_t i = 0; i < observed.size(); ++i) {
        double expected = total * probabilities[i];
        if (expected < 5.0) {
            merged_observed += observed[i];
            merged_expected += expected;
            continue;
        }
        out.statistic += (observed[i] - expected) * (observed[i] - expected) / expected;
        ++cells;
    }
    if (merged_expected > 0.0) {
        out.statistic += (merged_observed - merged_expected) * (merged_observed - merged_expected) / merged_expected;
        ++cells;
    }
    out.dof = cells > 1 ? static_cast<double>(cells - 1) : 1.0;
    out.p_value = chi_square_sf(out.statistic, out.dof);
    return out;
}

LinearFit fit_line(span<const double> x, span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw invalid_argument("line fit needs at least two points");
    }
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) {
        throw invalid_argument("line fit needs distinct x values");
    }
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    for (size_t i = 0; i < x.size(); ++i) {
        double r = y[i] - fit.intercept - fit.slope * x[i];
        fit.residual += r * r;
    }
    return fit;
}

}
