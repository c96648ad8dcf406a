#include "backoff/telecom.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "backoff/errors.hpp"
#include "backoff/rng.hpp"

namespace backoff {

namespace {

constexpr double kPi = M_PI;
constexpr double kSeriesEdge = 8.0;
constexpr double kTableEdge = 64.0;
constexpr double kTableStep = 0.5;
// |characteristic function| below 1e-8 ends the inversion range.
constexpr double kLogCfFloor = 18.420680743952367;
constexpr std::size_t kMaxPanels = 100000;

void check_alpha(double alpha) {
    if (!(alpha > 1.0 && alpha < 2.0)) throw DomainError("Telecom index must lie in (1, 2)");
}

void check_tau(double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("Telecom time must be positive and finite");
}

// (e^z - 1 - z) / z^2
cplx f2(cplx z) {
    if (std::abs(z) < 0.5) {
        cplx term = 0.5, sum = 0.0;
        for (int k = 0; k < 30; ++k) {
            sum += term;
            term *= z / static_cast<double>(k + 3);
            if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        }
        return sum;
    }
    return (std::exp(z) - 1.0 - z) / (z * z);
}

cplx asymptotic_tail(double v, double a) {
    // i e^{iv} v^{-a} sum_k (a)_k (-i/v)^k, truncated at the smallest term.
    cplx term = 1.0, sum = 0.0;
    double prev = INFINITY;
    for (int k = 0; k < 200; ++k) {
        const double mag = std::abs(term);
        if (mag > prev) break;
        sum += term;
        if (mag < 1e-17) break;
        prev = mag;
        term *= cplx(0.0, -(a + k) / v);
    }
    return cplx(0.0, 1.0) * std::exp(cplx(0.0, v)) * std::pow(v, -a) * sum;
}

cplx osc_integral(double lo, double hi, double a) {
    auto f = [a](double t) { return std::exp(cplx(0.0, t)) * std::pow(t, -a); };
    return boost::math::quadrature::gauss<double, 20>::integrate(f, lo, hi);
}

}  // namespace

TelecomKernel::TelecomKernel(double alpha) : alpha_(alpha) {
    check_alpha(alpha);
    a1_ = std::tgamma(-alpha) * std::exp(cplx(0.0, -kPi * alpha / 2.0));
    a2_ = std::tgamma(1.0 - alpha) * std::exp(cplx(0.0, -kPi * (alpha - 1.0) / 2.0));
    coef_.assign(2, 0.0);
    double fact = 1.0;
    for (int n = 2; n < 80; ++n) {
        fact *= n;
        const double c = 1.0 / (alpha - 1.0) + alpha / (n - alpha) + (2.0 - alpha) / (n + 1.0 - alpha);
        coef_.push_back(c / fact);
    }
    const auto cells = static_cast<std::size_t>((kTableEdge - kSeriesEdge) / kTableStep);
    tab_lo_.assign(cells + 1, 0.0);
    tab_hi_.assign(cells + 1, 0.0);
    tab_lo_[cells] = asymptotic_tail(kTableEdge, alpha);
    tab_hi_[cells] = asymptotic_tail(kTableEdge, alpha + 1.0);
    for (std::size_t j = cells; j-- > 0;) {
        const double lo = kSeriesEdge + j * kTableStep;
        tab_lo_[j] = tab_lo_[j + 1] + osc_integral(lo, lo + kTableStep, alpha);
        tab_hi_[j] = tab_hi_[j + 1] + osc_integral(lo, lo + kTableStep, alpha + 1.0);
    }
}

cplx TelecomKernel::osc_tail(double v, bool upper) const {
    const double a = upper ? alpha_ + 1.0 : alpha_;
    if (v >= kTableEdge) return asymptotic_tail(v, a);
    if (v < kSeriesEdge) throw DomainError("oscillatory tail table starts at 8");
    const auto& tab = upper ? tab_hi_ : tab_lo_;
    const auto j = std::min(static_cast<std::size_t>((v - kSeriesEdge) / kTableStep), tab.size() - 2);
    const double next = kSeriesEdge + (j + 1) * kTableStep;
    return tab[j + 1] + osc_integral(v, next, a);
}

cplx TelecomKernel::series(double v) const {
    const cplx w(0.0, v);
    cplx sum = 0.0;
    for (std::size_t n = coef_.size(); n-- > 2;) sum = (sum + coef_[n]) * w;
    return sum * w;
}

cplx TelecomKernel::psi_imag(double v) const {
    if (v < 0.0) return std::conj(psi_imag(-v));
    if (v <= kSeriesEdge) return series(v);
    const double a = alpha_;
    return std::exp(cplx(0.0, v)) / (a - 1.0) + a * std::pow(v, a) * (a1_ - osc_tail(v, true)) +
           (2.0 - a) * std::pow(v, a - 1.0) * (a2_ - osc_tail(v, false));
}

cplx TelecomKernel::cgf_imag(double u, double tau) const {
    return std::pow(tau, 1.0 - alpha_) * psi_imag(u * tau);
}

cplx telecom_cgf(cplx theta, double tau, double alpha) {
    check_alpha(alpha);
    check_tau(tau);
    const cplx w = theta * tau;
    if (w == 0.0) return 0.0;
    const double p = 2.0 - alpha;
    const double rw = std::abs(w);
    const auto panels = static_cast<std::size_t>(std::ceil(rw / 2.0));
    if (panels > kMaxPanels) {
        std::ostringstream os;
        os << "telecom_cgf: |theta tau| = " << rw << " is too oscillatory for direct quadrature";
        throw QuadratureFailure(os.str());
    }
    // s = u^(1/(2-alpha)) absorbs the x^(1-alpha) singularity at the origin.
    auto f = [&](double u) {
        const double s = std::pow(u, 1.0 / p);
        return f2(w * s) * (alpha + p * s);
    };
    const std::size_t n = std::max<std::size_t>(1, panels);
    cplx integral = 0.0;
    double err_total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double lo = std::pow(static_cast<double>(k) / n, p);
        const double hi = std::pow(static_cast<double>(k + 1) / n, p);
        double err = 0.0;
        integral += boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, lo, hi, 10, 1e-12, &err);
        err_total += err;
    }
    if (!std::isfinite(integral.real()) || !std::isfinite(integral.imag()) ||
        err_total > 1e-7 * std::abs(integral) + 1e-14) {
        std::ostringstream os;
        os << "telecom_cgf quadrature failed: theta=" << theta << " tau=" << tau << " alpha=" << alpha
           << " integral=" << integral << " error=" << err_total;
        throw QuadratureFailure(os.str());
    }
    const cplx e = w * w * f2(w);
    return std::pow(tau, 1.0 - alpha) * (e / (alpha - 1.0) + w * w / p * integral);
}

double telecom_variance(double tau, double alpha) {
    check_alpha(alpha);
    check_tau(tau);
    return std::pow(tau, 3.0 - alpha) *
           (1.0 / (alpha - 1.0) + alpha / (2.0 - alpha) + (2.0 - alpha) / (3.0 - alpha));
}

namespace {

double cutoff(double tau, const TelecomKernel& k) {
    double u = 1.0 / std::sqrt(telecom_variance(tau, k.alpha()));
    for (int i = 0; i < 400; ++i) {
        if (-k.cgf_imag(u, tau).real() >= kLogCfFloor) return u;
        u *= 1.5;
        if (u * tau > 1e15) break;
    }
    std::ostringstream os;
    os << "Telecom inversion: characteristic function does not decay (tau=" << tau << ", alpha=" << k.alpha()
       << "); " << (tau < 1.0 ? "use the stable limit" : "use the Gaussian limit");
    throw InversionUnstable(os.str());
}

// Integral over [0, U] of g(u) with panels fine enough for e^{-i u freq}.
template <class G>
TelecomInversion invert(G g, double freq, double tau, const TelecomKernel& k) {
    TelecomInversion r;
    r.u_max = cutoff(tau, k);
    const double cycles = r.u_max * std::abs(freq) / kPi;
    const auto n = static_cast<std::size_t>(std::max(32.0, std::ceil(2.0 * cycles)));
    if (n > kMaxPanels) {
        std::ostringstream os;
        os << "Telecom inversion needs " << n << " panels at argument " << freq << " (tau=" << tau
           << "); the point lies too far in the tail; "
           << (tau < 1.0 ? "use the stable limit" : "use the Gaussian limit");
        throw InversionUnstable(os.str());
    }
    const double h = r.u_max / n;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double err = 0.0;
        sum += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(g, i * h, (i + 1) * h, 6, 1e-10, &err);
        r.error += err;
    }
    if (!std::isfinite(sum)) throw QuadratureFailure("Telecom inversion integral is not finite");
    r.value = sum;
    return r;
}

}  // namespace

TelecomInversion telecom_cdf_detail(double y, double tau, const TelecomKernel& k) {
    check_tau(tau);
    auto g = [&](double u) {
        if (u <= 0.0) return -y;
        const cplx phi = std::exp(k.cgf_imag(u, tau) - cplx(0.0, u * y));
        return phi.imag() / u;
    };
    TelecomInversion r = invert(g, y, tau, k);
    r.value = std::clamp(0.5 - r.value / kPi, 0.0, 1.0);
    r.error /= kPi;
    return r;
}

double telecom_cdf(double y, double tau, double alpha) {
    return telecom_cdf_detail(y, tau, TelecomKernel(alpha)).value;
}

TelecomInversion telecom_interval_detail(double a, double b, double tau, const TelecomKernel& k) {
    check_tau(tau);
    if (!(b > a)) return {};
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    auto g = [&](double u) {
        if (u <= 0.0) return half;
        const cplx phi = std::exp(k.cgf_imag(u, tau) - cplx(0.0, u * mid));
        return phi.real() * std::sin(u * half) / u;
    };
    TelecomInversion r = invert(g, std::abs(mid) + half, tau, k);
    r.value = std::clamp(2.0 * r.value / kPi, 0.0, 1.0);
    r.error *= 2.0 / kPi;
    return r;
}

double telecom_interval(double a, double b, double tau, const TelecomKernel& k) {
    return telecom_interval_detail(a, b, tau, k).value;
}

double telecom_interval(double a, double b, double tau, double alpha) {
    return telecom_interval(a, b, tau, TelecomKernel(alpha));
}

std::vector<double> simulate_telecom(double tau, double alpha, std::size_t n, std::uint64_t seed,
                                     double mean_jumps) {
    check_alpha(alpha);
    check_tau(tau);
    const double a = alpha;
    const double eps = std::min(tau, std::pow(tau / mean_jumps, 1.0 / a));
    const double ea = std::pow(eps, -a), ta = std::pow(tau, -a);
    const double e1 = std::pow(eps, 1.0 - a), t1 = std::pow(tau, 1.0 - a);
    const double mass_a = tau * (ea - ta);
    const double mass_b = (2.0 - a) / (a - 1.0) * (e1 - t1);
    const double mass_c = t1 / (a - 1.0);
    const double drift = a * tau * (e1 - t1) / (a - 1.0) + (std::pow(tau, 2.0 - a) - std::pow(eps, 2.0 - a)) +
                         tau * mass_c;
    const double small_sd = std::sqrt(a * tau * std::pow(eps, 2.0 - a) / (2.0 - a) +
                                      (2.0 - a) * std::pow(eps, 3.0 - a) / (3.0 - a));
    Rng rng(seed);
    std::poisson_distribution<long> na(mass_a), nb(mass_b), nc(mass_c);
    std::vector<double> out(n);
    for (auto& y : out) {
        double sum = 0.0;
        for (long i = na(rng); i > 0; --i) sum += std::pow(ea - rng.uniform() * (ea - ta), -1.0 / a);
        for (long i = nb(rng); i > 0; --i) sum += std::pow(e1 - rng.uniform() * (e1 - t1), 1.0 / (1.0 - a));
        sum += tau * static_cast<double>(nc(rng));
        y = sum - drift + small_sd * rng.normal();
    }
    return out;
}

}  // namespace backoff
