#pragma once

#include <vector>

#include "backoff/params.hpp"

namespace backoff {

struct FixedPointSolution {
    double gamma = 0.0;
    double p_bar = 0.0;
    double alpha = 0.0;  // +inf when gamma == 0
    std::vector<double> phi;
    double residual = 0.0;
    int iterations = 0;
};

inline constexpr double kDefaultFpeTol = 1e-10;
inline constexpr double kInfiniteGammaMargin = 1e-9;

// Sum_{k<=K} gamma^k.
double stage_weight_sum(double gamma, const ProtocolParams& p);
// Sum_{k<=K} gamma^k / q_k, which is also the mean per-packet backoff.
double stage_mean_sum(double gamma, const ProtocolParams& p);

double attempt_rate(double gamma, const ProtocolParams& p);
double collision_prob(double p_bar, int N);
FixedPointSolution solve_fixed_point(const ProtocolParams& p, double tol = kDefaultFpeTol);

// phi_k for k = 0..K; for K = inf the tail is cut once the remaining mass is below tail_tol.
std::vector<double> stage_distribution(double gamma, const ProtocolParams& p, double tail_tol = 1e-12);

double tail_exponent(double gamma, double m);

// Throws DivergentSeries when the infinite-stage series for gamma diverges.
void require_convergent(double gamma, const ProtocolParams& p);

}  // namespace backoff
