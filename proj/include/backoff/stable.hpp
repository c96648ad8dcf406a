#pragma once

#include <cstdint>
#include <vector>

#include "backoff/rng.hpp"

namespace backoff {

// S_alpha(sigma, beta, mu) in the 1-parametrization; mu is the mean for alpha > 1.
struct StableParams {
    double alpha = 2.0;
    double sigma = 1.0;
    double beta = 0.0;
    double mu = 0.0;

    void validate() const;
};

struct StableValue {
    double density = 0.0;
    double cdf = 0.0;
};

double stable_draw(const StableParams& p, Rng& rng);
std::vector<double> stable_sample(const StableParams& p, std::size_t n, std::uint64_t seed);

StableValue stable_pdf_cdf(const StableParams& p, double x);
double stable_pdf(const StableParams& p, double x);
double stable_cdf(const StableParams& p, double x);

// (alpha - 1) / (Gamma(2 - alpha) sin(pi (alpha - 1) / 2)) for alpha in (1, 2).
double c_alpha(double alpha);

// Nudges alpha off an integer by 1e-6 when it lies within 1e-6 of one.
double perturb_integer_alpha(double alpha);

}  // namespace backoff
