#include "backoff/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "backoff/errors.hpp"
#include "backoff/fpe.hpp"
#include "backoff/moments.hpp"

namespace backoff {

namespace {

constexpr double kNegligible = 1e-18;

// Y(t) is a compensated sum of positive jumps no larger than t with variance v.
// Bennett's inequality bounds P[Y > a]; the lower tail is sub-Gaussian.
double upper_tail_bound(double a, double v, double t) {
    const double u = a * t / v;
    return std::exp(-v / (t * t) * ((1.0 + u) * std::log1p(u) - u));
}

double lower_tail_bound(double a, double v) { return std::exp(-a * a / (2.0 * v)); }

void check_stable_alpha(double alpha) {
    if (!(alpha > 1.0 && alpha < 2.0)) throw DomainError("stable regime needs alpha in (1, 2)");
}

// P[X <= x] for a standard normal, accurate in both tails.
double phi_cdf(double x) { return 0.5 * boost::math::erfc(-x / M_SQRT2); }

}  // namespace

std::string to_string(FairnessRegime r) { return r == FairnessRegime::gaussian ? "gaussian" : "stable"; }

void FairnessSpec::validate() const {
    if (N < 2) throw InvalidParams("fairness needs N >= 2");
    if (!(zeta > 0.0)) throw InvalidParams("zeta must be positive");
}

double scaling_constant(int N, double omega_bar, double alpha, double ell, double zeta) {
    check_stable_alpha(alpha);
    if (!(omega_bar > 0.0 && ell > 0.0 && zeta > 0.0 && N >= 1))
        throw DomainError("scaling constant needs positive N, omega_bar, ell and zeta");
    return std::pow(N * std::pow(omega_bar, -alpha) * ell, 1.0 / (alpha - 1.0)) / zeta;
}

double ell0_from_ell(double ell, double alpha, double omega_bar) {
    if (!(ell > 0.0 && omega_bar > 0.0)) throw DomainError("ell and omega_bar must be positive");
    return std::pow(ell / c_alpha(alpha), 1.0 / alpha) / omega_bar;
}

FairnessRegime choose_regime(const ProtocolParams& p, double alpha, double zeta, double omega_bar) {
    if (!(alpha > 1.0 && alpha <= 2.0)) return FairnessRegime::gaussian;
    if (!p.K.is_infinite() && p.window(p.K.value()) <= zeta * omega_bar) return FairnessRegime::gaussian;
    return FairnessRegime::stable;
}

FairnessSpec make_fairness_spec(const ProtocolParams& p, double zeta, double ell, StageVariance mode) {
    p.validate();
    const FixedPointSolution s = solve_fixed_point(p);
    FairnessSpec f;
    f.N = p.N;
    f.zeta = zeta;
    f.alpha = s.alpha;
    f.omega_bar = mean_backoff(s.gamma, p);
    f.v_omega = cv_backoff(s.gamma, p, mode);
    f.regime = choose_regime(p, f.alpha, zeta, f.omega_bar);
    f.validate();
    if (ell > 0.0 && f.alpha > 1.0 && f.alpha < 2.0) {
        f.ell = ell;
        f.ell0 = ell0_from_ell(ell, f.alpha, f.omega_bar);
        f.c = scaling_constant(f.N, f.omega_bar, f.alpha, ell, zeta);
    }
    return f;
}

std::vector<std::string> regime_warnings(const FairnessSpec& spec, FairnessRegime used) {
    std::vector<std::string> out;
    if (used != spec.regime) {
        out.push_back("RegimeMismatch: evaluating the " + to_string(used) + " formula where the " +
                      to_string(spec.regime) + " regime applies");
    }
    if (used == FairnessRegime::stable) {
        if (spec.N > 80) out.push_back("stable approximation degrades for N > 80");
        if (spec.alpha < 1.1) out.push_back("stable approximation degrades as alpha approaches 1");
    }
    return out;
}

GaussianMoments gaussian_moments(const FairnessSpec& spec) {
    spec.validate();
    if (!(spec.v_omega >= 0.0) || !std::isfinite(spec.v_omega))
        throw DomainError("Gaussian regime needs a finite v_omega");
    GaussianMoments m;
    m.mean = (spec.N - 1) * spec.zeta;
    m.sd = (spec.N - 1) * std::sqrt(spec.zeta) * spec.v_omega;
    m.cv = m.sd / m.mean;
    return m;
}

double gaussian_inter_tx_mass(long lo, long hi, const FairnessSpec& spec) {
    const GaussianMoments g = gaussian_moments(spec);
    lo = std::max(lo, 0L);
    if (hi < lo) return 0.0;
    if (g.sd == 0.0) return (g.mean >= lo - 0.5 && g.mean < hi + 0.5) ? 1.0 : 0.0;
    const double norm = phi_cdf((g.mean + 0.5) / g.sd);
    const double a = (lo - 0.5 - g.mean) / g.sd, b = (hi + 0.5 - g.mean) / g.sd;
    // Difference of upper tails keeps precision when both limits sit right of the mean.
    const double mass = a > 0.0 ? phi_cdf(-a) - phi_cdf(-b) : phi_cdf(b) - phi_cdf(a);
    return mass / norm;
}

double gaussian_inter_tx(long z, const FairnessSpec& spec) { return gaussian_inter_tx_mass(z, z, spec); }

double levy_tail_ccdf(double x, const FairnessSpec& spec) {
    check_stable_alpha(spec.alpha);
    if (!(x > 0.0)) throw DomainError("levy_tail_ccdf needs x > 0");
    return spec.zeta * std::pow((spec.N - 1) * spec.ell0, spec.alpha) * c_alpha(spec.alpha) *
           std::pow(x, -spec.alpha);
}

// log Lv on two uniform grids: y itself over the bulk, log(y - mode) over the right tail.
struct HeavyInterTx::LvTable {
    double y_split = 0.0, mode = 0.0, r_max = 0.0;
    boost::math::interpolators::cardinal_cubic_b_spline<double> core, tail;

    double operator()(double y) const {
        if (y <= y_split) return std::exp(core(y));
        const double r = std::log(y - mode);
        if (r > r_max) return 0.0;
        return std::exp(tail(r));
    }
};

namespace {

constexpr double kCoreStep = 0.02;
constexpr double kTailStep = 0.01;
constexpr double kLogFloor = -700.0;

double log_pdf(const StableParams& p, double y) {
    const double f = stable_pdf(p, y);
    return f > 0.0 ? std::max(std::log(f), kLogFloor) : kLogFloor;
}

}  // namespace

HeavyInterTx::HeavyInterTx(const FairnessSpec& spec)
    : spec_(spec), kernel_(perturb_integer_alpha(spec.alpha)) {
    spec_.validate();
    check_stable_alpha(spec_.alpha);
    if (!(spec_.ell0 > 0.0 && spec_.c > 0.0)) throw DomainError("stable regime needs ell0 > 0 and c > 0");
    lv_ = {spec_.alpha, 1.0, 1.0, 0.0};
    slope_ = std::pow(spec_.zeta, (1.0 - spec_.alpha) / spec_.alpha) * spec_.ell0;

    double best = -1.0;
    for (double y = -20.0; y <= 5.0; y += 0.25) {
        const double f = stable_pdf(lv_, y);
        if (f > best) best = f, mode_ = y;
    }
    double lo = mode_ - 0.25, hi = mode_ + 0.25;
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int i = 0; i < 30; ++i) {
        const double a = hi - r * (hi - lo), b = lo + r * (hi - lo);
        if (stable_pdf(lv_, a) > stable_pdf(lv_, b)) hi = b; else lo = a;
    }
    mode_ = 0.5 * (lo + hi);

    // The left tail of Lv decays faster than exponentially; stop where it is negligible.
    y_floor_ = std::max(-1.0 / slope_, mode_ - 40.0);
    for (double y = mode_ - 1.0; y > y_floor_; y -= 0.5) {
        if (log_pdf(lv_, y) < -60.0) {
            y_floor_ = y;
            break;
        }
    }

    auto t = std::make_shared<LvTable>();
    t->mode = mode_;
    t->y_split = mode_ + 20.0;
    const auto n_core = static_cast<std::size_t>(std::ceil((t->y_split - y_floor_) / kCoreStep)) + 1;
    const double h_core = (t->y_split - y_floor_) / (n_core - 1);
    std::vector<double> core(n_core);
    for (std::size_t i = 0; i < n_core; ++i) core[i] = log_pdf(lv_, y_floor_ + i * h_core);
    t->core = {core.begin(), core.end(), y_floor_, h_core};

    const double r0 = std::log(t->y_split - mode_);
    t->r_max = std::log(1e12);
    const auto n_tail = static_cast<std::size_t>(std::ceil((t->r_max - r0) / kTailStep)) + 1;
    const double h_tail = (t->r_max - r0) / (n_tail - 1);
    std::vector<double> tail(n_tail);
    for (std::size_t i = 0; i < n_tail; ++i) tail[i] = log_pdf(lv_, mode_ + std::exp(r0 + i * h_tail));
    t->tail = {tail.begin(), tail.end(), r0, h_tail};
    table_ = std::move(t);
}

StableParams HeavyInterTx::levy_limit() const {
    const double n1 = spec_.N - 1;
    return {spec_.alpha, n1 * std::pow(spec_.zeta, 1.0 / spec_.alpha) * spec_.ell0, 1.0, n1 * spec_.zeta};
}

double HeavyInterTx::cell(double a, double b, double tau) const {
    const double t = tau / spec_.c;
    const double v = telecom_variance(t, kernel_.alpha());
    if ((b < 0.0 && lower_tail_bound(-b, v) < kNegligible) || (a > 0.0 && upper_tail_bound(a, v, t) < kNegligible))
        return 0.0;
    return telecom_interval(a, b, t, kernel_);
}

double HeavyInterTx::below(double q, double tau) const {
    const double t = tau / spec_.c;
    const double v = telecom_variance(t, kernel_.alpha());
    if (q < 0.0 && lower_tail_bound(-q, v) < kNegligible) return 0.0;
    if (q > 0.0 && upper_tail_bound(q, v, t) < kNegligible) return 1.0;
    return telecom_cdf_detail(q, t, kernel_).value;
}

namespace {

struct Panel {
    const std::function<double(double)>* f;
    double a, b, value, error;
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
    Panel p{&f, a, b, 0.0, 0.0};
    p.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &p.error);
    return p;
}

// Bisects p until each piece meets abs_tol; accumulates the final error estimates.
double refine(const Panel& p, double abs_tol, int depth, double& err) {
    if (p.error <= abs_tol || depth == 0) {
        err += p.error;
        return p.value;
    }
    const double m = 0.5 * (p.a + p.b);
    return refine(gk15(*p.f, p.a, m), abs_tol, depth - 1, err) + refine(gk15(*p.f, m, p.b), abs_tol, depth - 1, err);
}

}  // namespace

PmfPoint HeavyInterTx::integrate(long z, const std::function<double(double, double)>& inner) const {
    const double n1z = (spec_.N - 1) * spec_.zeta;
    const double y_top = table_->y_split;

    std::vector<double> cuts{y_floor_, mode_, y_top};
    const double yz = (static_cast<double>(z) / n1z - 1.0) / slope_;
    if (yz > y_floor_) {
        // Width in y of the Telecom kernel around the point where the mean count equals z.
        const double t = (1.0 + slope_ * yz) / spec_.c;
        const double w = spec_.zeta * spec_.c * std::sqrt(telecom_variance(t, kernel_.alpha())) / (n1z * slope_);
        for (double k : {-8.0, -3.0, -1.0, 0.0, 1.0, 3.0, 8.0}) cuts.push_back(yz + k * w);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::remove_if(cuts.begin(), cuts.end(), [&](double y) { return y < y_floor_; }), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const std::function<double(double)> f = [&](double y) {
        const double tau = tau_of(y);
        if (!(tau > 0.0)) return 0.0;
        const double lv = (*table_)(y);
        if (lv == 0.0) return 0.0;
        return lv * inner(n1z * tau, tau);
    };
    // Past the last cut, integrate in r = log(y - mode).
    const double r_lo = std::log(cuts.back() - mode_);
    const std::function<double(double)> g = [&](double r) {
        const double e = std::exp(r);
        return f(mode_ + e) * e;
    };

    std::vector<Panel> panels;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        if (cuts[i + 1] - cuts[i] > 1e-12) panels.push_back(gk15(f, cuts[i], cuts[i + 1]));
    panels.push_back(gk15(g, r_lo, table_->r_max));
    double coarse = 0.0;
    for (const Panel& p : panels) coarse += p.value;
    const double tol = std::max(1e-7 * std::abs(coarse), 1e-11) / 16.0;

    PmfPoint out;
    out.z = z;
    double err = 0.0;
    for (const Panel& p : panels) out.probability += refine(p, tol, 10, err);
    if (!std::isfinite(out.probability)) throw QuadratureFailure("stable-regime pmf integral is not finite");
    // Inner inversions carry roughly 1e-10 absolute error each; the Lv weights integrate to one.
    out.accuracy_estimate = err + 1e-10;
    out.probability = std::clamp(out.probability, 0.0, 1.0);
    return out;
}

PmfPoint HeavyInterTx::pmf(long z) const {
    const double zc = spec_.zeta * spec_.c;
    const double zz = static_cast<double>(z);
    return integrate(z, [&](double mean_count, double tau) {
        return cell((mean_count - zz - 0.5) / zc, (mean_count - zz + 0.5) / zc, tau);
    });
}

PmfPoint HeavyInterTx::ccdf(long z) const {
    const double zc = spec_.zeta * spec_.c;
    const double zz = static_cast<double>(z);
    return integrate(z, [&](double mean_count, double tau) { return below((mean_count - zz - 0.5) / zc, tau); });
}

PmfPoint asymp_inter_tx(long z, const FairnessSpec& spec) { return HeavyInterTx(spec).pmf(z); }

EllEstimate estimate_ell(const std::vector<double>& x, const std::vector<double>& ccdf, double alpha,
                         double omega_bar) {
    if (x.size() != ccdf.size()) throw InvalidParams("estimate_ell: x and ccdf differ in length");
    if (x.size() < 3) throw InsufficientData("estimate_ell needs at least 3 tail points");
    std::vector<double> lx(x.size()), ly(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && ccdf[i] > 0.0)) throw DomainError("estimate_ell needs positive x and ccdf");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(ccdf[i]);
    }
    double intercept = 0.0, ybar = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) intercept += ly[i] + alpha * lx[i], ybar += ly[i];
    intercept /= x.size();
    ybar /= x.size();
    double rss = 0.0, tss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = ly[i] - (intercept - alpha * lx[i]);
        rss += r * r;
        tss += (ly[i] - ybar) * (ly[i] - ybar);
    }
    EllEstimate e;
    e.ell = std::exp(intercept);
    e.r2 = tss > 0.0 ? 1.0 - rss / tss : 0.0;
    e.n_points = x.size();
    if (e.r2 < 0.95) {
        std::ostringstream os;
        os << "estimate_ell: R^2 = " << e.r2 << " over " << x.size() << " points with slope fixed at " << -alpha;
        throw PoorFit(os.str());
    }
    e.ell0 = ell0_from_ell(e.ell, alpha, omega_bar);
    return e;
}

EllEstimate estimate_ell_from_samples(std::vector<double> samples, double alpha, double omega_bar,
                                      std::size_t n_points) {
    if (samples.size() < 1000) throw InsufficientData("estimate_ell_from_samples needs at least 1000 samples");
    if (n_points < 3) throw InvalidParams("n_points must be >= 3");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    const double x_lo = 8.0 * omega_bar, x_hi = samples[samples.size() - 100];
    if (!(x_hi > x_lo)) throw InsufficientData("too few samples beyond 8 omega_bar");
    std::vector<double> x, c;
    for (std::size_t i = 0; i < n_points; ++i) {
        const double v = std::exp(std::log(x_lo) + i * (std::log(x_hi) - std::log(x_lo)) / (n_points - 1));
        x.push_back(v);
        c.push_back(1.0 - static_cast<double>(std::upper_bound(samples.begin(), samples.end(), v) - samples.begin()) / n);
    }
    return estimate_ell(x, c, alpha, omega_bar);
}

double binned_total_variation(const std::vector<double>& samples,
                              const std::function<double(long, long)>& mass, long z_lo, long z_hi,
                              long bin) {
    if (samples.empty()) throw EmptyInput("no samples");
    if (bin < 1 || z_hi < z_lo) throw InvalidParams("bad binning");
    const long nbins = (z_hi - z_lo) / bin + 1;
    std::vector<double> counts(nbins + 2, 0.0);
    for (double s : samples) {
        const long z = std::lround(s);
        if (z < z_lo) counts.front() += 1.0;
        else if (z > z_lo + nbins * bin - 1) counts.back() += 1.0;
        else counts[1 + (z - z_lo) / bin] += 1.0;
    }
    const double n = static_cast<double>(samples.size());
    double inside = 0.0, tv = 0.0;
    for (long k = 0; k < nbins; ++k) {
        const double p = mass(z_lo + k * bin, z_lo + (k + 1) * bin - 1);
        inside += p;
        tv += std::abs(counts[1 + k] / n - p);
    }
    const double below = mass(std::numeric_limits<long>::min() / 2, z_lo - 1);
    const double above = std::max(0.0, 1.0 - inside - below);
    tv += std::abs(counts.front() / n - below) + std::abs(counts.back() / n - above);
    return 0.5 * tv;
}

}  // namespace backoff
