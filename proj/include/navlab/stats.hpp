#ifndef navlab_stats_hpp
#define navlab_stats_hpp

#include <cstddef>
#include <span>
#include <vector>

namespace navlab {

struct Moments {
    double mean = 0.0;
    /// Unbiased sample variance.
    double variance = 0.0;
    std::size_t count = 0;
};

Moments moments(std::span<const double> xs);

/// sqrt(var_a / n_a + var_b / n_b).
double pooled_standard_error(const Moments& a, const Moments& b);

/// sup_x |F_a(x) - F_b(x)| of the two empirical distributions.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Upper tail P(X >= x) for X ~ chi-square(dof).
double chi_square_sf(double x, double dof);

struct ChiSquare {
    double statistic = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
};

/// Goodness of fit of observed counts against probabilities; cells with
/// expected count below 5 are merged into one.
ChiSquare chi_square_test(std::span<const double> observed, std::span<const double> probabilities);

struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    /// Sum of squared residuals.
    double residual = 0.0;
};

/// Least squares y = intercept + slope x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

}

#endif /* navlab_stats_hpp */
