#include "backoff/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "backoff/errors.hpp"
#include "backoff/stats.hpp"

namespace backoff {

Ccdf empirical_ccdf(std::vector<double> samples) {
    if (samples.empty()) throw EmptyInput("empirical ccdf of empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    Ccdf c;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (i == 0 || samples[i] != samples[i - 1]) {
            c.x.push_back(samples[i]);
            c.p.push_back((n - i) / n);
        }
    }
    return c;
}

Ccdf thin_log(const Ccdf& c, std::size_t n) {
    const auto first = std::upper_bound(c.x.begin(), c.x.end(), 0.0) - c.x.begin();
    const std::size_t m = c.x.size() - first;
    if (m <= n || n < 2) {
        return {std::vector<double>(c.x.begin() + first, c.x.end()), std::vector<double>(c.p.begin() + first, c.p.end())};
    }
    const double lo = std::log(c.x[first]), hi = std::log(c.x.back());
    Ccdf out;
    std::size_t last = c.x.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double target = std::exp(lo + (hi - lo) * i / (n - 1));
        auto j = static_cast<std::size_t>(std::lower_bound(c.x.begin() + first, c.x.end(), target) - c.x.begin());
        j = std::min(j, c.x.size() - 1);
        if (j == last) continue;
        out.x.push_back(c.x[j]);
        out.p.push_back(c.p[j]);
        last = j;
    }
    return out;
}

double ccdf_at(const Ccdf& c, double x) {
    const auto it = std::lower_bound(c.x.begin(), c.x.end(), x);
    if (it == c.x.end()) return 0.0;
    return c.p[it - c.x.begin()];
}

TailFit tail_index_fit(const Ccdf& c, double x_min, double x_max) {
    std::vector<double> lx, lp;
    for (std::size_t i = 0; i < c.x.size(); ++i) {
        if (c.x[i] >= x_min && c.x[i] <= x_max && c.x[i] > 0.0 && c.p[i] > 0.0) {
            lx.push_back(std::log(c.x[i]));
            lp.push_back(std::log(c.p[i]));
        }
    }
    if (lx.size() < 20) {
        std::ostringstream os;
        os << "tail fit window [" << x_min << ", " << x_max << "] holds " << lx.size() << " points, need 20";
        throw InsufficientData(os.str());
    }
    const LineFit f = ols(lx, lp);
    TailFit t{-f.slope, f.intercept, f.r2, lx.size()};
    if (f.r2 < 0.9) {
        std::ostringstream os;
        os << "tail fit R^2 = " << f.r2 << " < 0.9 (alpha_hat " << t.alpha_hat << ")";
        throw PoorFit(os.str());
    }
    return t;
}

double hill_estimator(std::vector<double> samples, std::size_t k) {
    if (k < 2 || k >= samples.size()) throw DomainError("Hill order k must satisfy 2 <= k < n");
    std::nth_element(samples.begin(), samples.begin() + k, samples.end(), std::greater<>());
    const double xk = samples[k];
    if (!(xk > 0.0)) throw DomainError("Hill estimator needs positive order statistics");
    long double s = 0.0L;
    for (std::size_t i = 0; i < k; ++i) s += std::log(samples[i] / xk);
    return static_cast<double>(k / s);
}

double hurst_from_alpha(double alpha) {
    if (!(alpha > 1.0 && alpha < 2.0)) throw DomainError("Hurst index from tail exponent needs 1 < alpha < 2");
    return (3.0 - alpha) / 2.0;
}

PoissonReport poisson_checks(const std::vector<double>& t, double window) {
    if (t.size() < 10) throw InsufficientData("Poisson checks need at least 10 arrivals");
    if (!(window > 0.0)) throw DomainError("count window must be positive");
    std::vector<double> gaps(t.size() - 1);
    for (std::size_t i = 1; i < t.size(); ++i) gaps[i - 1] = t[i] - t[i - 1];
    PoissonReport r;
    r.n_arrivals = t.size();
    const double mean = mean_of(gaps);
    r.interarrival_cv = std::sqrt(variance_of(gaps)) / mean;
    const double rate = 1.0 / mean;
    r.ks_statistic = ks_statistic(gaps, [rate](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); });
    r.ks_pvalue_exponential = ks_pvalue(r.ks_statistic, gaps.size());
    const auto nw = static_cast<std::size_t>(t.back() / window);
    if (nw < 2) throw InsufficientData("Poisson checks need at least two complete count windows");
    std::vector<double> counts(nw, 0.0);
    for (double x : t) {
        const auto k = static_cast<std::size_t>(x / window);
        if (x >= 0.0 && k < nw) counts[k] += 1.0;
    }
    r.n_windows = nw;
    r.dispersion_index = variance_of(counts) / mean_of(counts);
    return r;
}

}  // namespace backoff
