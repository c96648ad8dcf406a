#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "backoff/params.hpp"
#include "backoff/stable.hpp"
#include "backoff/telecom.hpp"

namespace backoff {

enum class FairnessRegime { gaussian, stable };

std::string to_string(FairnessRegime r);

// Law of Z, the number of successes of the other N-1 nodes while a tagged node scores zeta.
struct FairnessSpec {
    int N = 2;
    double zeta = 100.0;
    double v_omega = 0.0;
    double alpha = 0.0;
    double omega_bar = 0.0;
    double ell = 0.0;
    double ell0 = 0.0;
    double c = 0.0;
    FairnessRegime regime = FairnessRegime::gaussian;

    void validate() const;
};

// Scaling constant {N omega_bar^-alpha ell}^(1/(alpha-1)) / zeta.
double scaling_constant(int N, double omega_bar, double alpha, double ell, double zeta);
// (ell / C_alpha)^(1/alpha) / omega_bar
double ell0_from_ell(double ell, double alpha, double omega_bar);

// Gaussian when the largest contention window fits inside the tagged node's horizon
// zeta * omega_bar, or when alpha > 2; stable otherwise.
FairnessRegime choose_regime(const ProtocolParams& p, double alpha, double zeta, double omega_bar);

// Solves the fixed point for p and fills every field; ell <= 0 leaves ell, ell0 and c at zero.
FairnessSpec make_fairness_spec(const ProtocolParams& p, double zeta, double ell = 0.0,
                                StageVariance mode = StageVariance::continuous);

// Warnings for evaluating spec under `used`: regime mismatch, and the N > 80 / alpha < 1.1
// applicability limits of the stable formula.
std::vector<std::string> regime_warnings(const FairnessSpec& spec, FairnessRegime used);

struct PmfPoint {
    long z = 0;
    double probability = 0.0;
    double accuracy_estimate = 0.0;
};

struct GaussianMoments {
    double mean = 0.0;
    double sd = 0.0;
    double cv = 0.0;
};

GaussianMoments gaussian_moments(const FairnessSpec& spec);
double gaussian_inter_tx(long z, const FairnessSpec& spec);
// P[lo <= Z <= hi] under the Gaussian law.
double gaussian_inter_tx_mass(long lo, long hi, const FairnessSpec& spec);

// zeta {(N-1) ell0}^alpha C_alpha x^-alpha
double levy_tail_ccdf(double x, const FairnessSpec& spec);

// Stable-regime pmf: mixes the Telecom cell probability over the stable law of the tagged
// node's normalized busy time. Construct once per spec for sweeps; evaluation is reentrant.
class HeavyInterTx {
public:
    explicit HeavyInterTx(const FairnessSpec& spec);
    PmfPoint pmf(long z) const;
    // P[Z > z + 1/2]
    PmfPoint ccdf(long z) const;
    const FairnessSpec& spec() const { return spec_; }
    // Stable pmf that Z approaches as c -> 0: location (N-1) zeta, scale (N-1) zeta^(1/alpha) ell0.
    StableParams levy_limit() const;

private:
    struct LvTable;
    double tau_of(double y) const { return 1.0 + slope_ * y; }
    double cell(double a, double b, double tau) const;
    double below(double q, double tau) const;
    PmfPoint integrate(long z, const std::function<double(double, double)>& inner) const;

    FairnessSpec spec_;
    TelecomKernel kernel_;
    StableParams lv_;
    double slope_ = 0.0;
    double mode_ = 0.0;
    double y_floor_ = 0.0;
    std::shared_ptr<const LvTable> table_;
};

PmfPoint asymp_inter_tx(long z, const FairnessSpec& spec);

struct EllEstimate {
    double ell = 0.0;
    double ell0 = 0.0;
    double r2 = 0.0;
    std::size_t n_points = 0;
};

// Fits log ccdf = log ell - alpha log x over the given tail points. Throws PoorFit if R^2 < 0.95.
EllEstimate estimate_ell(const std::vector<double>& x, const std::vector<double>& ccdf, double alpha,
                         double omega_bar);

// Fit on the empirical ccdf of Omega samples at n_points log-spaced points between
// 8 omega_bar and the 100th largest sample.
EllEstimate estimate_ell_from_samples(std::vector<double> samples, double alpha, double omega_bar,
                                      std::size_t n_points = 50);

// Total variation between samples of Z and a model, on bins of `bin` consecutive integers
// covering [z_lo, z_hi], with the mass outside pooled into two end bins.
// mass(lo, hi) = P[lo <= Z <= hi].
double binned_total_variation(const std::vector<double>& samples,
                              const std::function<double(long, long)>& mass, long z_lo, long z_hi,
                              long bin);

}  // namespace backoff
