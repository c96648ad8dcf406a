#include "fixtures.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <map>
#include <stdexcept>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <unsupported/Eigen/FFT>

#include "backoff/rng.hpp"

namespace backoff::testing {

const nlohmann::json& golden(const std::string& name) {
    static std::map<std::string, nlohmann::json> cache;
    auto it = cache.find(name);
    if (it != cache.end()) return it->second;
    std::ifstream in(std::string(BACKOFF_GOLDEN_DIR) + "/" + name + ".json");
    if (!in) throw std::runtime_error("missing golden file " + name);
    return cache[name] = nlohmann::json::parse(in);
}

std::vector<double> fgn(double hurst, std::size_t n, std::uint64_t seed) {
    const std::size_t m = 2 * n;
    auto acov = [hurst](double k) {
        const double h2 = 2.0 * hurst;
        return 0.5 * (std::pow(std::abs(k + 1), h2) - 2.0 * std::pow(std::abs(k), h2) + std::pow(std::abs(k - 1), h2));
    };
    std::vector<double> row(m);
    for (std::size_t k = 0; k <= n; ++k) row[k] = acov(static_cast<double>(k));
    for (std::size_t k = n + 1; k < m; ++k) row[k] = row[m - k];
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> lambda;
    fft.fwd(lambda, row);
    Rng rng(seed);
    // Circular complex weights: the real part of the transform has the target covariance.
    std::vector<std::complex<double>> w(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double s = std::sqrt(std::max(lambda[k].real(), 0.0) / m);
        w[k] = {s * rng.normal(), s * rng.normal()};
    }
    std::vector<std::complex<double>> out;
    fft.fwd(out, w);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = out[i].real();
    return x;
}

std::vector<double> white_noise(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> x(n);
    for (auto& v : x) v = rng.normal();
    return x;
}

std::vector<double> pareto(double alpha, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> x(n);
    for (auto& v : x) v = std::pow(rng.uniform_pos(), -1.0 / alpha);
    return x;
}

double telecom_variance_oracle(double tau, double alpha) {
    boost::math::quadrature::tanh_sinh<double> ts;
    const double body = ts.integrate(
        [&](double x) { return alpha * tau * std::pow(x, 1.0 - alpha) + (2.0 - alpha) * std::pow(x, 2.0 - alpha); },
        0.0, tau);
    return std::pow(tau, 3.0 - alpha) / (alpha - 1.0) + body;
}

}  // namespace backoff::testing
