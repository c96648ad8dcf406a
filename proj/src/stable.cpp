#include "backoff/stable.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "backoff/errors.hpp"

namespace backoff {

namespace {

constexpr double kPi = M_PI;

struct Standard {
    double alpha, beta;
    double zeta;    // S0 location offset: -beta tan(pi alpha / 2)
    double theta0;  // arctan(beta tan(pi alpha / 2)) / alpha
    double gap;     // pi (1 - alpha/2) - alpha theta0, in [0, pi)
    double log_cos; // log cos(alpha theta0)
};

Standard standardize(double alpha, double beta) {
    const double t = beta * std::tan(kPi * alpha / 2.0);
    const double at = std::atan(t);
    return {alpha, beta, -t, at / alpha, std::max(0.0, kPi * (1.0 - alpha / 2.0) - at), -0.5 * std::log1p(t * t)};
}

// log V in Nolan's integral representation (alpha != 1), as a function of u = pi/2 - theta.
// Written in u so that both ends of the range stay free of cancellation.
double log_v(const Standard& s, double u) {
    const double a = s.alpha;
    return (s.log_cos + std::log(std::sin(u)) - a * std::log(std::sin(s.gap + a * u))) / (a - 1.0) +
           std::log(std::sin(s.gap + (a - 1.0) * u));
}

template <class F>
double integrate(F f, double a, double b, const char* what, double x) {
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 3, 1e-9, &err);
    if (!std::isfinite(v) || err > 1e-8 + 1e-6 * std::abs(v)) {
        std::ostringstream os;
        os << "stable " << what << " quadrature failed at x=" << x << " on [" << a << "," << b << "]: value=" << v
           << " error=" << err;
        throw QuadratureFailure(os.str());
    }
    return v;
}

// Density and cdf of S0(alpha, beta, 1, 0) for x > zeta.
StableValue right_side(const Standard& s, double x) {
    const double a = s.alpha;
    const double umax = kPi / 2.0 + s.theta0;
    const double lx = a / (a - 1.0) * std::log(x - s.zeta);
    auto lg = [&](double u) { return lx + log_v(s, u); };
    // g increases from 0 to +inf on (0, umax); level sets of log g give panel breaks.
    auto level = [&](double c) {
        double l = 0.0, r = umax;
        for (int i = 0; i < 45; ++i) {
            const double mid = 0.5 * (l + r);
            (lg(mid) < c ? l : r) = mid;
        }
        return 0.5 * (l + r);
    };
    std::vector<double> cuts{0.0};
    for (double c : {-30.0, -20.0, -14.0, -9.0, -6.0, -3.0, -1.5, 0.0, 1.0, 2.0, 3.5, 6.6}) cuts.push_back(level(c));
    auto dens = [&](double u) {
        if (u <= 0.0 || u >= umax) return 0.0;
        const double g = std::exp(lg(u));
        return std::isfinite(g) ? g * std::exp(-g) : 0.0;
    };
    auto surv = [&](double u) {
        if (u <= 0.0) return 1.0;
        if (u >= umax) return 0.0;
        return std::exp(-std::exp(lg(u)));
    };
    // Beyond the last cut g > e^6.6, so both integrands vanish to double precision.
    double di = 0.0, si = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (!(cuts[i + 1] - cuts[i] > 1e-12)) continue;
        di += integrate(dens, cuts[i], cuts[i + 1], "density", x);
        si += integrate(surv, cuts[i], cuts[i + 1], "cdf", x);
    }
    StableValue v;
    v.density = std::max(0.0, a / (kPi * (a - 1.0) * (x - s.zeta)) * di);
    v.cdf = std::clamp(1.0 - si / kPi, 0.0, 1.0);
    return v;
}

StableValue at_zeta(const Standard& s) {
    StableValue v;
    v.density = std::tgamma(1.0 + 1.0 / s.alpha) * std::cos(s.theta0) /
                (kPi * std::pow(1.0 + s.zeta * s.zeta, 1.0 / (2.0 * s.alpha)));
    v.cdf = (kPi / 2.0 - s.theta0) / kPi;
    return v;
}

StableValue standard_value(double alpha, double beta, double x) {
    const Standard s = standardize(alpha, beta);
    // The integrand degenerates as x -> zeta; bridge that band from the closed form at zeta.
    const double h = 1e-4;
    const double d = x - s.zeta;
    if (std::abs(d) < h) {
        const StableValue z = at_zeta(s);
        const double edge = d > 0.0 ? right_side(s, s.zeta + h).density
                                    : right_side(standardize(alpha, -beta), h - s.zeta).density;
        StableValue v;
        v.density = z.density + (edge - z.density) * std::abs(d) / h;
        v.cdf = z.cdf + d * 0.5 * (z.density + v.density);
        return v;
    }
    if (d > 0.0) return right_side(s, x);
    StableValue m = right_side(standardize(alpha, -beta), -x);
    return {m.density, 1.0 - m.cdf};
}

}  // namespace

void StableParams::validate() const {
    if (!(alpha > 1.0 && alpha <= 2.0)) throw DomainError("stable index must lie in (1, 2]");
    if (!(sigma > 0.0)) throw DomainError("stable scale must be > 0");
    if (!(beta >= -1.0 && beta <= 1.0)) throw DomainError("stable skewness must lie in [-1, 1]");
    if (!std::isfinite(mu)) throw DomainError("stable mean must be finite");
}

double perturb_integer_alpha(double alpha) {
    const double r = std::round(alpha);
    if (std::abs(alpha - r) < 1e-6) return r + (alpha >= r ? 1e-6 : -1e-6);
    return alpha;
}

double stable_draw(const StableParams& p, Rng& rng) {
    const double a = p.alpha;
    const double v = kPi * (rng.uniform() - 0.5);
    const double w = rng.exponential();
    const double t = p.beta * std::tan(kPi * a / 2.0);
    const double b = std::atan(t) / a;
    const double s = std::pow(1.0 + t * t, 1.0 / (2.0 * a));
    const double x = s * std::sin(a * (v + b)) / std::pow(std::cos(v), 1.0 / a) *
                     std::pow(std::cos(v - a * (v + b)) / w, (1.0 - a) / a);
    return p.sigma * x + p.mu;
}

std::vector<double> stable_sample(const StableParams& p, std::size_t n, std::uint64_t seed) {
    p.validate();
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& x : out) x = stable_draw(p, rng);
    return out;
}

StableValue stable_pdf_cdf(const StableParams& p, double x) {
    p.validate();
    const double alpha = p.alpha == 2.0 ? 2.0 : perturb_integer_alpha(p.alpha);
    // S1 -> S0 shift for the standardized variable.
    const double z = (x - p.mu) / p.sigma - p.beta * std::tan(kPi * alpha / 2.0);
    StableValue v = standard_value(alpha, p.beta, z);
    v.density /= p.sigma;
    return v;
}

double stable_pdf(const StableParams& p, double x) { return stable_pdf_cdf(p, x).density; }
double stable_cdf(const StableParams& p, double x) { return stable_pdf_cdf(p, x).cdf; }

double c_alpha(double alpha) {
    if (!(alpha > 1.0 && alpha < 2.0)) throw DomainError("C_alpha is defined for alpha in (1, 2)");
    return (alpha - 1.0) / (boost::math::tgamma(2.0 - alpha) * std::sin(kPi * (alpha - 1.0) / 2.0));
}

}  // namespace backoff
