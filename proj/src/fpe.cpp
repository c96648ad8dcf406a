#include "backoff/fpe.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "backoff/errors.hpp"

namespace backoff {

namespace {

void check_gamma(double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) {
        std::ostringstream os;
        os << "gamma must lie in [0,1), got " << gamma;
        throw DomainError(os.str());
    }
}

}  // namespace

void require_convergent(double gamma, const ProtocolParams& p) {
    check_gamma(gamma);
    if (p.K.is_infinite() && gamma * p.m >= 1.0) {
        std::ostringstream os;
        os << "stage series diverges for K=inf at gamma=" << gamma << " >= 1/m=" << 1.0 / p.m;
        throw DivergentSeries(os.str());
    }
}

double stage_weight_sum(double gamma, const ProtocolParams& p) {
    require_convergent(gamma, p);
    if (p.K.is_infinite()) return 1.0 / (1.0 - gamma);
    double s = 0.0, g = 1.0;
    for (int k = 0; k <= p.K.value(); ++k, g *= gamma) s += g;
    return s;
}

double stage_mean_sum(double gamma, const ProtocolParams& p) {
    require_convergent(gamma, p);
    if (p.K.is_infinite()) return p.b0 / (1.0 - p.m * gamma) - 0.5 / (1.0 - gamma);
    double s = 0.0, g = 1.0;
    for (int k = 0; k <= p.K.value(); ++k, g *= gamma) s += g * p.inv_q(k);
    return s;
}

double attempt_rate(double gamma, const ProtocolParams& p) {
    return stage_weight_sum(gamma, p) / stage_mean_sum(gamma, p);
}

double collision_prob(double p_bar, int N) {
    if (N <= 1) return 0.0;
    return -std::expm1(-(N - 1) * p_bar);
}

FixedPointSolution solve_fixed_point(const ProtocolParams& p, double tol) {
    p.validate();
    if (!(tol > 0.0)) throw InvalidParams("tol must be > 0");

    auto residual = [&](double g) { return g - collision_prob(attempt_rate(g, p), p.N); };

    double lo = 0.0;
    double hi = p.K.is_infinite() ? 1.0 / p.m - kInfiniteGammaMargin : 1.0;
    double r_lo = residual(lo);
    double best = lo, best_r = std::abs(r_lo);
    int it = 0;
    if (best_r > tol) {
        constexpr int kMaxIter = 200;
        // r(1) > 0 always; gamma = 1 itself lies outside the domain of attempt_rate.
        double r_hi = (hi < 1.0) ? residual(hi) : 1.0;
        if (r_hi <= 0.0) {
            best = hi;
            best_r = std::abs(r_hi);
        } else {
            for (it = 1; it <= kMaxIter; ++it) {
                double mid = 0.5 * (lo + hi);
                double r = residual(mid);
                if (std::abs(r) < best_r) {
                    best = mid;
                    best_r = std::abs(r);
                }
                if (best_r <= tol * 1e-3 || hi - lo <= 4 * std::numeric_limits<double>::epsilon()) break;
                (r < 0.0 ? lo : hi) = mid;
            }
        }
    }
    if (best_r > tol) {
        std::ostringstream os;
        os.precision(17);
        os << "fixed point not converged: best gamma=" << best << " residual=" << best_r;
        throw NoConvergence(os.str());
    }
    FixedPointSolution s;
    s.gamma = best;
    s.p_bar = attempt_rate(best, p);
    s.alpha = tail_exponent(best, p.m);
    s.phi = stage_distribution(best, p);
    s.residual = best_r;
    s.iterations = it;
    return s;
}

std::vector<double> stage_distribution(double gamma, const ProtocolParams& p, double tail_tol) {
    require_convergent(gamma, p);
    std::vector<double> phi;
    double g = 1.0;
    if (p.K.is_infinite()) {
        const double total = stage_mean_sum(gamma, p);
        const double mg = p.m * gamma;
        for (int k = 0;; ++k, g *= gamma) {
            phi.push_back(g * p.inv_q(k));
            // Remaining mass is bounded by b0 (m gamma)^{k+1} / (1 - m gamma).
            double rest = p.b0 * std::pow(mg, k + 1) / (1.0 - mg);
            if (rest < tail_tol * total || gamma == 0.0) break;
        }
    } else {
        for (int k = 0; k <= p.K.value(); ++k, g *= gamma) phi.push_back(g * p.inv_q(k));
    }
    double s = 0.0;
    for (double v : phi) s += v;
    for (double& v : phi) v /= s;
    return phi;
}

double tail_exponent(double gamma, double m) {
    if (!(m > 1.0)) throw DomainError("tail_exponent requires m > 1");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw DomainError("tail_exponent requires gamma in [0,1)");
    if (gamma == 0.0) return std::numeric_limits<double>::infinity();
    return -std::log(gamma) / std::log(m);
}

}  // namespace backoff
