#pragma once

#include <cstdint>
#include <vector>

#include "backoff/params.hpp"

namespace backoff {

struct BackoffStats {
    double mean = 0.0;
    double second_moment = 0.0;
    double variance = 0.0;
    double cv = 0.0;
    std::vector<double> kappa_pmf;
};

struct DensityGrid {
    std::vector<double> x;
    std::vector<double> f;
    double cell_width = 0.0;
    double truncated_mass = 0.0;  // stage mass dropped by truncation
};

struct GridSpec {
    double cell_width = 0.25;
    double mass_tol = 1e-6;  // stop adding stages once P[kappa > k] < mass_tol
};

struct FractionalMoment {
    bool finite = true;
    double value = 0.0;  // meaningful only when finite
    double std_error = 0.0;
    int stages = 0;
};

struct SlotEvents {
    double p_success = 0.0;
    double p_collision = 0.0;
    double ratio = 0.0;
    // P[x successes in one slot] = (1 - ratio) ratio^x
    double pmf(int x) const;
};

// P[kappa = k]; for K = inf the geometric tail is cut once gamma^k < tail_tol.
std::vector<double> stage_reach_pmf(double gamma, MaxStage K, double tail_tol = 1e-12);

double mean_backoff(double gamma, const ProtocolParams& p);
// E[Omega^2]; +inf for K = inf with 1/m^2 <= gamma < 1/m.
double second_moment(double gamma, const ProtocolParams& p, StageVariance mode);
// v_Omega from the delta_k series; +inf where the second moment diverges.
double cv_backoff(double gamma, const ProtocolParams& p, StageVariance mode);
BackoffStats backoff_stats(double gamma, const ProtocolParams& p, StageVariance mode);

// Variance of a stage-k backoff B_k.
double stage_variance(const ProtocolParams& p, int k, StageVariance mode);

DensityGrid pdf_backoff(double gamma, const ProtocolParams& p, const GridSpec& spec = {});
double ccdf_backoff(const DensityGrid& d, double x);
// ccdf at every grid node.
std::vector<double> ccdf_table(const DensityGrid& d);
double grid_mean(const DensityGrid& d);
double grid_cv(const DensityGrid& d);
double grid_mass(const DensityGrid& d);

FractionalMoment fractional_moment(double c, double gamma, const ProtocolParams& p,
                                   std::uint64_t seed, std::size_t n_per_stage = 100000,
                                   double rel_tol = 1e-6);

SlotEvents slot_event_distribution(double p_bar, int N);

}  // namespace backoff
