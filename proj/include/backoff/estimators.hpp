#pragma once

#include <cstddef>
#include <vector>

namespace backoff {

// Survival points p[i] = P[X >= x[i]] at the distinct sample values, x increasing.
struct Ccdf {
    std::vector<double> x;
    std::vector<double> p;
};

Ccdf empirical_ccdf(std::vector<double> samples);
// Keeps at most n points, spaced evenly in log x, from the part of the ccdf with x > 0.
Ccdf thin_log(const Ccdf& c, std::size_t n);
double ccdf_at(const Ccdf& c, double x);

struct TailFit {
    double alpha_hat = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t n_points = 0;
};

// OLS of log p on log x over x_min <= x <= x_max; alpha_hat = -slope.
TailFit tail_index_fit(const Ccdf& c, double x_min, double x_max);

// Hill estimator over the k largest order statistics.
double hill_estimator(std::vector<double> samples, std::size_t k);

double hurst_from_alpha(double alpha);

struct PoissonReport {
    double interarrival_cv = 0.0;
    double ks_pvalue_exponential = 0.0;
    double ks_statistic = 0.0;
    double dispersion_index = 0.0;
    std::size_t n_arrivals = 0;
    std::size_t n_windows = 0;
};

// merged_arrivals must be sorted. Counts use windows [k w, (k+1) w) inside [0, last arrival).
PoissonReport poisson_checks(const std::vector<double>& merged_arrivals, double window);

}  // namespace backoff
