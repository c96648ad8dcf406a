#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace backoff {

using cplx = std::complex<double>;

// Cumulant generating function of the Intermediate Telecom marginal Y_alpha(tau),
// evaluated by adaptive quadrature of its Levy-measure integral.
cplx telecom_cgf(cplx theta, double tau, double alpha);

// Variance of Y_alpha(tau) in closed form.
double telecom_variance(double tau, double alpha);

// Fast evaluation of Psi(iv), where cgf(i u, tau) = tau^(1-alpha) Psi(i u tau).
class TelecomKernel {
public:
    explicit TelecomKernel(double alpha);
    double alpha() const { return alpha_; }
    cplx psi_imag(double v) const;
    cplx cgf_imag(double u, double tau) const;
    // Levy tail constants: Gamma(-alpha) e^{-i pi alpha/2} and Gamma(1-alpha) e^{-i pi (alpha-1)/2}.
    cplx a1() const { return a1_; }
    cplx a2() const { return a2_; }
    // Integral of e^{it} t^{-a} over [v, inf) for a in {alpha, alpha+1} and v >= 8.
    cplx osc_tail(double v, bool upper) const;

private:
    cplx series(double v) const;
    double alpha_;
    cplx a1_, a2_;
    std::vector<double> coef_;
    std::vector<cplx> tab_lo_, tab_hi_;
};

struct TelecomInversion {
    double value = 0.0;
    double u_max = 0.0;
    double error = 0.0;
};

TelecomInversion telecom_cdf_detail(double y, double tau, const TelecomKernel& k);
double telecom_cdf(double y, double tau, double alpha);
// P[a < Y_alpha(tau) <= b] from a single inversion integral; accurate for narrow intervals.
double telecom_interval(double a, double b, double tau, const TelecomKernel& k);
TelecomInversion telecom_interval_detail(double a, double b, double tau, const TelecomKernel& k);
double telecom_interval(double a, double b, double tau, double alpha);

// Draws Y_alpha(tau) from its Poisson representation: jumps of size x in (eps, tau] with
// intensity alpha tau x^(-alpha-1) + (2-alpha) x^(-alpha), an atom at tau of mass
// tau^(1-alpha)/(alpha-1), compensated, plus a Gaussian stand-in for jumps below eps.
std::vector<double> simulate_telecom(double tau, double alpha, std::size_t n, std::uint64_t seed,
                                     double mean_jumps = 400.0);

}  // namespace backoff
