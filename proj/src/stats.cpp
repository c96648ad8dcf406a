#include "backoff/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "backoff/errors.hpp"

namespace backoff {

double mean_of(const std::vector<double>& v) {
    if (v.empty()) throw EmptyInput("mean of empty sample");
    long double s = 0.0L;
    for (double x : v) s += x;
    return static_cast<double>(s / v.size());
}

double variance_of(const std::vector<double>& v) {
    if (v.size() < 2) throw InsufficientData("variance needs at least two values");
    const double mu = mean_of(v);
    long double s = 0.0L;
    for (double x : v) s += (x - mu) * (x - mu);
    return static_cast<double>(s / (v.size() - 1));
}

SampleMoments sample_moments(const std::vector<double>& v) {
    if (v.size() < 4) throw InsufficientData("sample moments need at least four values");
    const double n = static_cast<double>(v.size());
    const double m = mean_of(v);
    long double c2 = 0, c3 = 0, c4 = 0;
    for (double x : v) {
        const long double d = x - m;
        c2 += d * d;
        c3 += d * d * d;
        c4 += d * d * d * d;
    }
    const double mu2 = static_cast<double>(c2 / n), mu3 = static_cast<double>(c3 / n), mu4 = static_cast<double>(c4 / n);
    SampleMoments r;
    r.mean = m;
    r.variance = mu2 * n / (n - 1.0);
    const double sd = std::sqrt(mu2);
    r.cv = sd / m;
    r.se_mean = std::sqrt(r.variance / n);
    // Gradient of sqrt(E[X^2] - E[X]^2) / E[X] against the covariance of (X, X^2).
    const double g1 = -1.0 / sd - sd / (m * m), g2 = 1.0 / (2.0 * sd * m);
    const double vxx = mu2, vxy = mu3 + 2.0 * m * mu2, vyy = mu4 - mu2 * mu2 + 4.0 * m * mu3 + 4.0 * m * m * mu2;
    r.se_cv = std::sqrt(std::max(g1 * g1 * vxx + 2.0 * g1 * g2 * vxy + g2 * g2 * vyy, 0.0) / n);
    return r;
}

LineFit wls(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n || w.size() != n) throw InsufficientData("line fit needs >= 2 points");
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    const double mx = sx / sw, my = sy / sw;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
        syy += w[i] * (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0) throw InsufficientData("line fit needs distinct abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        rss += w[i] * r * r;
    }
    f.chi2 = rss;
    f.r2 = syy > 0 ? 1.0 - rss / syy : 1.0;
    f.slope_se = std::sqrt(1.0 / sxx);
    return f;
}

LineFit ols(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit f = wls(x, y, std::vector<double>(x.size(), 1.0));
    const std::size_t n = x.size();
    double sxx = 0, mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    for (double v : x) sxx += (v - mx) * (v - mx);
    f.slope_se = n > 2 ? std::sqrt(f.chi2 / (n - 2) / sxx) : 0.0;
    return f;
}

double kolmogorov_sf(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 0.2) return 1.0;
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double t = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 ? 2.0 : -2.0) * t;
        if (t < 1e-17) break;
    }
    return std::clamp(s, 0.0, 1.0);
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw EmptyInput("KS statistic of empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double F = cdf(samples[i]);
        d = std::max({d, (i + 1) / n - F, F - i / n});
    }
    return d;
}

double ks_statistic_bound(std::vector<double> samples, const std::function<double(double)>& cdf,
                          std::size_t stride) {
    if (samples.empty()) throw EmptyInput("KS statistic of empty sample");
    if (stride == 0) stride = 1;
    std::sort(samples.begin(), samples.end());
    const std::size_t n = samples.size();
    const double dn = static_cast<double>(n);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; i += stride) idx.push_back(i);
    if (idx.back() != n - 1) idx.push_back(n - 1);
    std::vector<double> F(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) F[j] = cdf(samples[idx[j]]);
    double d = std::max(F.front(), 1.0 - F.back());
    for (std::size_t j = 0; j < idx.size(); ++j) {
        d = std::max({d, (idx[j] + 1) / dn - F[j], F[j] - idx[j] / dn});
        if (j + 1 < idx.size()) {
            // Between consecutive evaluated order statistics F and F_n are both monotone.
            d = std::max({d, idx[j + 1] / dn - F[j], F[j + 1] - (idx[j] + 1) / dn});
        }
    }
    return d;
}

double ks_pvalue(double d, std::size_t n) {
    const double sn = std::sqrt(static_cast<double>(n));
    return kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
}

double ks_two_sample_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw EmptyInput("KS statistic of empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        const double t = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= t) ++i;
        while (j < b.size() && b[j] <= t) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return d;
}

double ks_two_sample_pvalue(double d, std::size_t n, std::size_t m) {
    const double ne = static_cast<double>(n) * m / (static_cast<double>(n) + m);
    return ks_pvalue(d, static_cast<std::size_t>(std::max(1.0, std::round(ne))));
}

double chi_square_sf(double x, int dof) {
    if (dof < 1) throw InsufficientData("chi-square test needs at least one degree of freedom");
    if (x <= 0.0) return 1.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), x));
}

ChiSquareResult chi_square_gof(const std::vector<double>& counts, const std::vector<double>& probs,
                               double min_expected, int fitted_params) {
    if (counts.size() != probs.size() || counts.empty()) throw InvalidParams("counts/probs size mismatch");
    const double n = std::accumulate(counts.begin(), counts.end(), 0.0);
    if (n <= 0.0) throw EmptyInput("chi-square test on zero counts");
    std::vector<double> obs = counts, exp(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) exp[i] = n * probs[i];
    const double missing = n - std::accumulate(exp.begin(), exp.end(), 0.0);
    if (missing > 1e-9 * n) {
        obs.push_back(0.0);
        exp.push_back(missing);
    }
    // Pool from the right so sparse tails merge into their neighbours.
    std::vector<double> po, pe;
    double co = 0.0, ce = 0.0;
    for (std::size_t i = obs.size(); i-- > 0;) {
        co += obs[i];
        ce += exp[i];
        if (ce >= min_expected) {
            po.push_back(co);
            pe.push_back(ce);
            co = ce = 0.0;
        }
    }
    if (ce > 0.0 || co > 0.0) {
        if (pe.empty()) {
            po.push_back(co);
            pe.push_back(ce);
        } else {
            po.back() += co;
            pe.back() += ce;
        }
    }
    ChiSquareResult r;
    for (std::size_t i = 0; i < po.size(); ++i) r.statistic += (po[i] - pe[i]) * (po[i] - pe[i]) / pe[i];
    r.dof = static_cast<int>(po.size()) - 1 - fitted_params;
    r.pvalue = chi_square_sf(r.statistic, r.dof);
    return r;
}

}  // namespace backoff
