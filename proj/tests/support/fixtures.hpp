#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace backoff::testing {

// Frozen oracle values from tests/golden/<name>.json.
const nlohmann::json& golden(const std::string& name);

// Fractional Gaussian noise with unit variance (Davies-Harte circulant embedding).
std::vector<double> fgn(double hurst, std::size_t n, std::uint64_t seed);

std::vector<double> white_noise(std::size_t n, std::uint64_t seed);

// Pareto(alpha) samples with x_min = 1.
std::vector<double> pareto(double alpha, std::size_t n, std::uint64_t seed);

// Variance of the Telecom process at time tau by direct quadrature of its Levy measure.
double telecom_variance_oracle(double tau, double alpha);

}  // namespace backoff::testing
