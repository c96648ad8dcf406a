#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "backoff/errors.hpp"
#include "backoff/stable.hpp"
#include "backoff/stats.hpp"

using namespace backoff;

namespace {

double gauss_pdf(double x, double mu, double var) {
    return std::exp(-(x - mu) * (x - mu) / (2 * var)) / std::sqrt(2 * M_PI * var);
}

double gauss_cdf(double x, double mu, double var) { return 0.5 * std::erfc(-(x - mu) / std::sqrt(2 * var)); }

double quantile(std::vector<double>& v, double q) {
    const auto k = static_cast<std::size_t>(q * (v.size() - 1));
    std::nth_element(v.begin(), v.begin() + k, v.end());
    return v[k];
}

}  // namespace

TEST_CASE("alpha=2 reduces to a Gaussian with variance 2 sigma^2") {
    const StableParams p{2.0, 1.3, 0.4, -0.7};
    for (double x = -6.0; x <= 6.0; x += 0.37) {
        const auto v = stable_pdf_cdf(p, x);
        CHECK(std::abs(v.density - gauss_pdf(x, p.mu, 2 * p.sigma * p.sigma)) < 1e-8);
        CHECK(std::abs(v.cdf - gauss_cdf(x, p.mu, 2 * p.sigma * p.sigma)) < 1e-8);
    }
}

TEST_CASE("symmetric law has cdf 1/2 at its mean") {
    for (double a : {1.1, 1.3, 1.5, 1.7, 1.9}) {
        const StableParams p{a, 2.0, 0.0, 3.0};
        CHECK(std::abs(stable_cdf(p, 3.0) - 0.5) < 1e-10);
        CHECK(std::abs(stable_cdf(p, 3.0 + 1.7) + stable_cdf(p, 3.0 - 1.7) - 1.0) < 1e-10);
    }
}

TEST_CASE("density is nonnegative, cdf is monotone and the density integrates to one") {
    for (double a : {1.3, 1.5, 1.7}) {
        for (double b : {-1.0, 0.0, 0.6, 1.0}) {
            const StableParams p{a, 1.0, b, 0.0};
            double prev = 0.0;
            for (double x = -30.0; x <= 30.0; x += 0.25) {
                const auto v = stable_pdf_cdf(p, x);
                CHECK(v.density >= 0.0);
                CHECK(v.cdf >= prev - 1e-12);
                prev = v.cdf;
            }
            const double L = 40.0;
            double inner = 0.0;
            for (double a0 = -L; a0 < L; a0 += 4.0) {
                inner += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                    [&](double x) { return stable_pdf(p, x); }, a0, a0 + 4.0, 4, 1e-11);
            }
            const double total = inner + stable_cdf(p, -L) + 1.0 - stable_cdf(p, L);
            CHECK(std::abs(total - 1.0) < 1e-6);
        }
    }
}

TEST_CASE("totally skewed laws have the expected light side") {
    const StableParams p{1.5, 1.0, 1.0, 0.0};
    // beta=1 puts the heavy tail on the right.
    CHECK(stable_cdf(p, -6.0) < 1e-6);
    CHECK(1.0 - stable_cdf(p, 6.0) > 1e-2);
}

TEST_CASE("numerical cdf agrees with the sampler") {
    for (double a : {1.3, 1.5, 1.7}) {
        const StableParams p{a, 1.0, 0.5, 0.0};
        const auto s = stable_sample(p, 200000, 11);
        const double d = ks_statistic_bound(s, [&](double x) { return stable_cdf(p, x); }, 50);
        CHECK(d < 0.01);
    }
}

TEST_CASE("alpha=2 samples have Gaussian kurtosis") {
    const auto s = stable_sample({2.0, 1.0, 0.0, 0.0}, 1000000, 5);
    const double m = mean_of(s), v = variance_of(s);
    double m4 = 0.0;
    for (double x : s) m4 += std::pow(x - m, 4);
    m4 /= s.size();
    // Var of sample kurtosis for Gaussian data is 24/n.
    CHECK(std::abs(m4 / (v * v) - 3.0) < 4.0 * std::sqrt(24.0 / s.size()));
    CHECK(std::abs(v - 2.0) < 0.01);
}

TEST_CASE("sample mean converges to mu") {
    const StableParams p{1.5, 1.0, 1.0, 0.0};
    const auto s = stable_sample(p, 1000000, 9);
    const double se = std::sqrt(variance_of(s) / s.size());
    CHECK(std::abs(mean_of(s) - p.mu) < 3.0 * se);
}

TEST_CASE("stability: sums of m copies rescale by m^(1/alpha)") {
    const int m = 4;
    const std::size_t n = 1000000;
    for (double a : {1.3, 1.5, 1.7}) {
        const StableParams p{a, 1.0, 0.5, 2.0};
        const auto x = stable_sample(p, n * m, 21);
        const auto y = stable_sample(p, n, 22);
        std::vector<double> sum(n), scaled(n);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j = 0; j < m; ++j) acc += x[i * m + j] - p.mu;
            sum[i] = acc;
            scaled[i] = std::pow(m, 1.0 / a) * (y[i] - p.mu);
        }
        const StableParams q{a, std::pow(m, 1.0 / a), p.beta, 0.0};
        for (double pr : {0.05, 0.25, 0.5, 0.75, 0.95}) {
            const double qa = quantile(sum, pr), qb = quantile(scaled, pr);
            // Asymptotic sd of a sample quantile: sqrt(p(1-p)/n)/f(q).
            const double sd = std::sqrt(pr * (1 - pr) / n) / stable_pdf(q, 0.5 * (qa + qb));
            CHECK(std::abs(qa - qb) < 4.0 * std::sqrt(2.0) * sd);
        }
    }
}

TEST_CASE("c_alpha") {
    CHECK(std::abs(c_alpha(1.5) - 0.5 / (std::tgamma(0.5) * std::sin(M_PI / 4))) < 1e-12);
    CHECK(std::abs(c_alpha(1.5) - 0.398942) < 1e-6);
    for (double a = 1.01; a < 1.995; a += 0.01) CHECK(c_alpha(a) > 0.0);
    // Near 1 the ratio tends to 2/pi.
    double prev = std::abs(c_alpha(1.1) - 2.0 / M_PI);
    for (double e : {1e-2, 1e-3, 1e-4, 1e-5}) {
        const double gap = std::abs(c_alpha(1.0 + e) - 2.0 / M_PI);
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK(prev < 1e-4);
    CHECK_THROWS_AS(c_alpha(1.0), DomainError);
    CHECK_THROWS_AS(c_alpha(2.0), DomainError);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(stable_sample({1.0, 1.0, 0.0, 0.0}, 10, 1), DomainError);
    CHECK_THROWS_AS(stable_pdf({1.5, 0.0, 0.0, 0.0}, 0.0), DomainError);
    CHECK_THROWS_AS(stable_pdf({1.5, 1.0, 1.5, 0.0}, 0.0), DomainError);
    CHECK(perturb_integer_alpha(2.0 - 1e-7) == doctest::Approx(2.0 - 1e-6));
    CHECK(perturb_integer_alpha(1.5) == 1.5);
}
