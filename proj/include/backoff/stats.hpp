#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace backoff {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double slope_se = 0.0;
    double chi2 = 0.0;  // weighted residual sum of squares (WLS only)
};

double mean_of(const std::vector<double>& v);
// Unbiased sample variance.
double variance_of(const std::vector<double>& v);

struct SampleMoments {
    double mean = 0.0;
    double variance = 0.0;
    double cv = 0.0;
    double se_mean = 0.0;
    double se_cv = 0.0;  // delta method; needs a finite fourth moment to be meaningful
};

SampleMoments sample_moments(const std::vector<double>& v);

LineFit ols(const std::vector<double>& x, const std::vector<double>& y);
// Weights are inverse variances.
LineFit wls(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w);

// Kolmogorov survival function P[K > lambda].
double kolmogorov_sf(double lambda);
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);
// Upper bound on the KS statistic from cdf evaluations at every stride-th order statistic.
double ks_statistic_bound(std::vector<double> samples, const std::function<double(double)>& cdf,
                          std::size_t stride);
double ks_pvalue(double d, std::size_t n);
double ks_two_sample_statistic(std::vector<double> a, std::vector<double> b);
double ks_two_sample_pvalue(double d, std::size_t n, std::size_t m);

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double pvalue = 0.0;
};

// Pearson test of counts[i] against probs[i]; adjacent bins are pooled until each expected
// count reaches min_expected. Mass missing from probs is treated as one extra bin.
ChiSquareResult chi_square_gof(const std::vector<double>& counts, const std::vector<double>& probs,
                               double min_expected = 5.0, int fitted_params = 0);
double chi_square_sf(double x, int dof);

}  // namespace backoff
