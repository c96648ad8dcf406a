#include "backoff/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "backoff/errors.hpp"
#include "backoff/fpe.hpp"
#include "backoff/rng.hpp"

namespace backoff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Sum_{j>=0} x^j and Sum_{j>=0} j x^j.
double geo(double x) { return 1.0 / (1.0 - x); }
double geo_d(double x) { return x / ((1.0 - x) * (1.0 - x)); }

bool second_moment_diverges(double gamma, const ProtocolParams& p) {
    return p.K.is_infinite() && gamma * p.m * p.m >= 1.0;
}

// Closed form of E[Omega^2] for K = inf and gamma < 1/m^2.
double second_moment_infinite(double gamma, const ProtocolParams& p, StageVariance mode) {
    const double m = p.m, b0 = p.b0;
    const double g1 = geo(gamma), gm = geo(m * gamma), gm2 = geo(m * m * gamma);
    const double sq = b0 * b0 * gm2 - b0 * gm + 0.25 * g1;  // Sum gamma^j a_j^2
    const double var = mode == StageVariance::continuous ? sq / 3.0 : (b0 * b0 * gm2 - 0.25 * g1) / 3.0;
    // Sum gamma^j a_j A_{j-1}, with A_{j-1} = b0 (m^j - 1)/(m - 1) - j/2.
    const double cross = b0 * b0 / (m - 1.0) * (gm2 - gm) - 0.5 * b0 * geo_d(m * gamma) -
                         b0 / (2.0 * (m - 1.0)) * (gm - g1) + 0.25 * geo_d(gamma);
    return var + sq + 2.0 * cross;
}

// Mass that the hat function at node j collects from a uniform law on [0, w].
double hat_mass(int j, double w, double h) {
    auto H = [](double t) {
        if (t <= -1.0) return 0.0;
        if (t <= 0.0) return 0.5 * (1.0 + t) * (1.0 + t);
        if (t <= 1.0) return 1.0 - 0.5 * (1.0 - t) * (1.0 - t);
        return 1.0;
    };
    return (h / w) * (H((w - j * h) / h) - H(-j));
}

// Convolve g with the hat-discretized uniform on [0, w] in O(len) using prefix sums.
std::vector<double> convolve_uniform(const std::vector<double>& g, double w, double h) {
    const int J = static_cast<int>(std::ceil(w / h - 1e-12));
    std::vector<double> s(J + 1);
    for (int j = 0; j <= J; ++j) s[j] = hat_mass(j, w, h);
    const double c = h / w;
    std::vector<std::pair<int, double>> dev;
    for (int j = 0; j <= J; ++j)
        if (std::abs(s[j] - c) > 1e-14 * c) dev.emplace_back(j, s[j] - c);

    const int n = static_cast<int>(g.size());
    std::vector<long double> P(n + 1, 0.0L);
    for (int i = 0; i < n; ++i) P[i + 1] = P[i] + g[i];

    std::vector<double> out(n + J);
    for (int i = 0; i < n + J; ++i) {
        int hi = std::min(i, n - 1), lo = std::max(0, i - J);
        long double box = (hi >= lo) ? P[hi + 1] - P[lo] : 0.0L;
        long double v = c * box;
        for (auto [j, d] : dev) {
            int t = i - j;
            if (t >= 0 && t < n) v += d * g[t];
        }
        out[i] = static_cast<double>(std::max<long double>(v, 0.0L));
    }
    return out;
}

}  // namespace

double SlotEvents::pmf(int x) const {
    if (x < 0) return 0.0;
    return (1.0 - ratio) * std::pow(ratio, x);
}

std::vector<double> stage_reach_pmf(double gamma, MaxStage K, double tail_tol) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw DomainError("gamma must lie in [0,1)");
    std::vector<double> pmf;
    double g = 1.0;
    if (K.is_infinite()) {
        for (int k = 0;; ++k, g *= gamma) {
            pmf.push_back(g * (1.0 - gamma));
            if (g * gamma < tail_tol) break;
        }
    } else {
        for (int k = 0; k < K.value(); ++k, g *= gamma) pmf.push_back(g - g * gamma);
        pmf.push_back(g);
    }
    return pmf;
}

double mean_backoff(double gamma, const ProtocolParams& p) { return stage_mean_sum(gamma, p); }

double stage_variance(const ProtocolParams& p, int k, StageVariance mode) {
    const double a = p.inv_q(k);
    if (mode == StageVariance::continuous) return a * a / 3.0;
    const double b = p.b(k);
    return (b * b - 0.25) / 3.0;
}

double second_moment(double gamma, const ProtocolParams& p, StageVariance mode) {
    require_convergent(gamma, p);
    if (p.K.is_infinite()) {
        if (second_moment_diverges(gamma, p)) return kInf;
        return second_moment_infinite(gamma, p, mode);
    }
    // Sum over kappa of E[(B_0 + ... + B_kappa)^2].
    const auto pmf = stage_reach_pmf(gamma, p.K);
    double total = 0.0, var = 0.0, mean = 0.0;
    for (int k = 0; k <= p.K.value(); ++k) {
        var += stage_variance(p, k, mode);
        mean += p.inv_q(k);
        if (pmf[k] > 0.0) total += pmf[k] * (var + mean * mean);
    }
    return total;
}

double cv_backoff(double gamma, const ProtocolParams& p, StageVariance mode) {
    require_convergent(gamma, p);
    if (second_moment_diverges(gamma, p)) return kInf;
    const double m = p.m, b0 = p.b0;
    const double mean = stage_mean_sum(gamma, p);
    // delta_k written as (m^2 gamma)^k times bounded factors so that m^k never overflows.
    const int kmax = p.K.is_infinite() ? std::numeric_limits<int>::max() : p.K.value();
    const double ratio = gamma * m * m;
    double sum = 0.0, rho = 1.0, minv = 1.0;  // rho = (m^2 gamma)^k, minv = m^-k
    for (int k = 0; k <= kmax; ++k, rho *= ratio, minv /= m) {
        const double a_s = b0 - 0.5 * minv;  // a_k / m^k
        const double binv = minv / b0;       // 1 / b_k
        const double v2 = mode == StageVariance::continuous ? 1.0 / 3.0 : (2.0 + binv) / (3.0 * (2.0 - binv));
        const double delta = rho * a_s * (((m + 1.0) / (m - 1.0) + v2) * a_s - (k + (2.0 * b0 - 1.0) / (m - 1.0)) * minv);
        sum += delta;
        if (p.K.is_infinite() && k > 2) {
            const double r = ratio * (k + 2.0) / (k + 1.0);
            if ((r < 1.0 && std::abs(delta) * r / (1.0 - r) < 1e-16 * sum) || rho == 0.0) break;
        }
    }
    const double v2 = sum / (mean * mean) - 1.0;
    return std::sqrt(std::max(v2, 0.0));
}

BackoffStats backoff_stats(double gamma, const ProtocolParams& p, StageVariance mode) {
    BackoffStats s;
    s.mean = mean_backoff(gamma, p);
    s.second_moment = second_moment(gamma, p, mode);
    s.variance = std::isfinite(s.second_moment) ? std::max(s.second_moment - s.mean * s.mean, 0.0) : kInf;
    s.cv = std::isfinite(s.variance) ? std::sqrt(s.variance) / s.mean : kInf;
    s.kappa_pmf = stage_reach_pmf(gamma, p.K);
    return s;
}

DensityGrid pdf_backoff(double gamma, const ProtocolParams& p, const GridSpec& spec) {
    p.validate();
    if (!(gamma >= 0.0 && gamma < 1.0)) throw DomainError("gamma must lie in [0,1)");
    const double h = spec.cell_width;
    if (!(h > 0.0) || h > p.window(0) / 8.0) {
        std::ostringstream os;
        os << "cell width " << h << " exceeds smallest window / 8 = " << p.window(0) / 8.0;
        throw GridTooCoarse(os.str());
    }
    const int K = p.K.is_infinite() ? std::numeric_limits<int>::max() : p.K.value();
    int kmax = 0;
    double g = 1.0;  // gamma^kmax
    while (kmax < K && gamma > 0.0 && g * gamma >= spec.mass_tol) {
        ++kmax;
        g *= gamma;
    }

    DensityGrid out;
    out.cell_width = h;
    out.truncated_mass = (kmax < K) ? g * gamma : 0.0;

    std::vector<double> cur{1.0};
    std::vector<double> acc;
    double gk = 1.0;
    for (int k = 0; k <= kmax; ++k, gk *= gamma) {
        cur = convolve_uniform(cur, p.window(k), h);
        const double pk = (k < K) ? gk * (1.0 - gamma) : gk;
        acc.resize(cur.size(), 0.0);
        for (std::size_t i = 0; i < cur.size(); ++i) acc[i] += pk * cur[i];
    }
    const std::size_t L = acc.size();
    out.x.resize(L);
    out.f.resize(L);
    for (std::size_t i = 0; i < L; ++i) {
        out.x[i] = i * h;
        const double tau = (i == 0 || i + 1 == L) ? 0.5 : 1.0;
        out.f[i] = acc[i] / (h * tau);
    }
    return out;
}

double grid_mass(const DensityGrid& d) {
    const std::size_t L = d.f.size();
    double s = 0.0;
    for (std::size_t i = 0; i < L; ++i) s += d.f[i] * ((i == 0 || i + 1 == L) ? 0.5 : 1.0);
    return s * d.cell_width;
}

double grid_mean(const DensityGrid& d) {
    const std::size_t L = d.f.size();
    double s = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < L; ++i) {
        const double w = d.f[i] * ((i == 0 || i + 1 == L) ? 0.5 : 1.0);
        s += w * d.x[i];
        mass += w;
    }
    return s / mass;
}

double grid_cv(const DensityGrid& d) {
    const std::size_t L = d.f.size();
    double s1 = 0.0, s2 = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < L; ++i) {
        const double w = d.f[i] * ((i == 0 || i + 1 == L) ? 0.5 : 1.0);
        s1 += w * d.x[i];
        s2 += w * d.x[i] * d.x[i];
        mass += w;
    }
    const double mean = s1 / mass;
    return std::sqrt(std::max(s2 / mass - mean * mean, 0.0)) / mean;
}

std::vector<double> ccdf_table(const DensityGrid& d) {
    const std::size_t L = d.f.size();
    std::vector<double> c(L, 0.0);
    long double run = 0.0L;
    for (std::size_t i = L - 1; i-- > 0;) {
        run += 0.5L * d.cell_width * (d.f[i] + d.f[i + 1]);
        c[i] = static_cast<double>(std::min<long double>(run, 1.0L));
    }
    return c;
}

double ccdf_backoff(const DensityGrid& d, double x) {
    const std::size_t L = d.f.size();
    if (L == 0) return 0.0;
    const double h = d.cell_width;
    if (x >= d.x.back()) return 0.0;
    double start = std::max(x, d.x.front());
    std::size_t i = static_cast<std::size_t>((start - d.x.front()) / h);
    if (i + 1 >= L) i = L - 2;
    const double t = (start - d.x[i]) / h;
    const double fx = d.f[i] + t * (d.f[i + 1] - d.f[i]);
    long double run = 0.5L * (d.x[i + 1] - start) * (fx + d.f[i + 1]);
    for (std::size_t j = i + 1; j + 1 < L; ++j) run += 0.5L * h * (d.f[j] + d.f[j + 1]);
    return std::clamp(static_cast<double>(run), 0.0, 1.0);
}

FractionalMoment fractional_moment(double c, double gamma, const ProtocolParams& p,
                                   std::uint64_t seed, std::size_t n_per_stage, double rel_tol) {
    p.validate();
    if (!(c >= 0.0)) throw DomainError("fractional moment order must be >= 0");
    require_convergent(gamma, p);
    FractionalMoment r;
    const double ratio = std::pow(p.m, c) * gamma;
    if (p.K.is_infinite() && ratio >= 1.0) {
        r.finite = false;
        r.value = kInf;
        return r;
    }
    if (n_per_stage < 2) throw InvalidParams("n_per_stage must be >= 2");
    const int K = p.K.is_infinite() ? std::numeric_limits<int>::max() : p.K.value();
    // Each path carries its partial sum scaled by m^-k and its own series estimate,
    // so the reported error accounts for correlation across stages.
    std::vector<double> scaled(n_per_stage, 0.0), path(n_per_stage, 0.0);
    const double log_m = std::log(p.m);
    double total = 0.0, log_gk = 0.0;
    Rng rng(seed);
    for (int k = 0; k <= K; ++k) {
        const double w = p.window(k) / std::pow(p.m, k);
        const double log_pk = log_gk + ((k < K) ? std::log1p(-gamma) : 0.0);
        double s1 = 0.0;
        for (std::size_t i = 0; i < n_per_stage; ++i) {
            double& v = scaled[i];
            v = (k == 0 ? 0.0 : v / p.m) + rng.uniform() * w;
            const double y = (c == 0.0) ? std::exp(log_pk) : std::exp(log_pk + c * (std::log(v) + k * log_m));
            path[i] += y;
            s1 += y;
        }
        const double term = s1 / static_cast<double>(n_per_stage);
        total += term;
        r.stages = k + 1;
        if (gamma == 0.0) break;
        log_gk += std::log(gamma);
        if (p.K.is_infinite() && k >= 3 && term * ratio / (1.0 - ratio) < rel_tol * total) break;
    }
    double mu = 0.0, m2 = 0.0;
    for (double y : path) mu += y;
    mu /= static_cast<double>(n_per_stage);
    for (double y : path) m2 += (y - mu) * (y - mu);
    const double var = m2 / (static_cast<double>(n_per_stage) - 1.0) / static_cast<double>(n_per_stage);
    r.value = total;
    r.std_error = std::sqrt(var);
    return r;
}

SlotEvents slot_event_distribution(double p_bar, int N) {
    if (!(p_bar > 0.0 && p_bar < 1.0)) throw DomainError("p_bar must lie in (0,1)");
    if (N < 2) throw InvalidParams("slot events need N >= 2");
    SlotEvents e;
    const double idle = std::pow(1.0 - p_bar, N);
    e.p_success = N * p_bar * std::pow(1.0 - p_bar, N - 1);
    e.p_collision = 1.0 - idle - e.p_success;
    e.ratio = e.p_success / (1.0 - e.p_collision);
    return e;
}

}  // namespace backoff
