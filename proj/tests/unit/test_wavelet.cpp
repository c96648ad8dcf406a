#include <doctest.h>

#include <cmath>
#include <numeric>

#include "backoff/errors.hpp"
#include "backoff/moments.hpp"
#include "backoff/rng.hpp"
#include "backoff/simulator.hpp"
#include "backoff/wavelet.hpp"
#include "fixtures.hpp"

using namespace backoff;
using backoff::testing::fgn;
using backoff::testing::white_noise;

TEST_CASE("Daubechies filters are orthonormal with M vanishing moments") {
    for (int M : {2, 3, 4}) {
        const auto& h = daubechies_lowpass(M);
        const std::size_t L = h.size();
        REQUIRE(L == static_cast<std::size_t>(2 * M));
        CHECK(std::accumulate(h.begin(), h.end(), 0.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
        for (std::size_t s = 0; s < L; s += 2) {
            double dot = 0.0;
            for (std::size_t k = 0; k + s < L; ++k) dot += h[k] * h[k + s];
            CHECK(std::abs(dot - (s == 0 ? 1.0 : 0.0)) < 1e-14);
        }
        for (int p = 0; p < M; ++p) {
            double mom = 0.0;
            for (std::size_t k = 0; k < L; ++k) mom += (k % 2 ? -1.0 : 1.0) * h[L - 1 - k] * std::pow(double(k), p);
            CHECK(std::abs(mom) < 1e-10);
        }
    }
    CHECK_THROWS_AS(daubechies_lowpass(5), DomainError);
}

TEST_CASE("constant series has vanishing details") {
    for (int M : {2, 3, 4}) {
        const Dwt w = dwt_details(std::vector<double>(4096, 7.0), M);
        for (const auto& d : w.details)
            for (double v : d) CHECK(std::abs(v) < 1e-10);
    }
}

TEST_CASE("linear ramp has vanishing interior details for M >= 2") {
    std::vector<double> x(4096);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.5 * i - 3.0;
    for (int M : {2, 3, 4}) {
        const Dwt w = dwt_details(x, M, 3);
        for (const auto& d : w.details) {
            // Coefficients whose support wraps around the end see the periodization jump.
            for (std::size_t k = 0; k + 2 * M < d.size(); ++k) CHECK(std::abs(d[k]) < 1e-8);
        }
    }
}

TEST_CASE("periodized transform conserves energy") {
    const auto x = white_noise(10000, 3);
    for (int M : {2, 3, 4}) {
        const Dwt w = dwt_details(x, M);
        const std::size_t used = w.approx.size() << w.details.size();
        double in = 0.0, out = 0.0;
        for (std::size_t i = 0; i < used; ++i) in += x[i] * x[i];
        for (const auto& d : w.details)
            for (double v : d) out += v * v;
        for (double v : w.approx) out += v * v;
        CHECK(std::abs(out - in) < 1e-8 * in);
    }
}

TEST_CASE("short series are rejected") {
    CHECK_THROWS_AS(dwt_details(std::vector<double>(5, 1.0), 2), SeriesTooShort);
    CHECK_THROWS_AS(dwt_details(std::vector<double>(64, 1.0), 2, 7), SeriesTooShort);
}

TEST_CASE("logscale diagram structure") {
    const LogscaleDiagram d = logscale_diagram(white_noise(1 << 16, 5), 3);
    REQUIRE(d.octaves.size() > 8);
    for (std::size_t i = 1; i < d.octaves.size(); ++i) {
        CHECK(d.octaves[i] == d.octaves[i - 1] + 1);
        CHECK(d.n_coeffs[i] < 0.6 * d.n_coeffs[i - 1]);
        CHECK(d.ci_halfwidth[i] > d.ci_halfwidth[i - 1]);
    }
}

TEST_CASE("white noise has a flat diagram") {
    const LogscaleDiagram d = logscale_diagram(white_noise(1 << 20, 9), 2);
    const HurstEstimate h = hurst_estimate(d, 1, d.octaves.back());
    CHECK(std::abs(h.slope) < 0.05);
    CHECK(std::abs(h.hurst - 0.5) < 0.025);
    // Unit-variance noise: every octave has unit energy.
    for (std::size_t i = 0; i < d.y.size(); ++i) CHECK(std::abs(d.y[i]) < 4.0 * std::sqrt(d.variance[i]));
}

TEST_CASE("fractional Gaussian noise H=0.8") {
    for (std::uint64_t seed : {1, 2, 3}) {
        const LogscaleDiagram d = logscale_diagram(fgn(0.8, 1 << 18, seed), 2);
        const HurstEstimate h = hurst_estimate(d, 2, d.octaves.back());
        CHECK(std::abs(h.slope - 0.6) < 0.1);
        CHECK(std::abs(h.hurst - 0.8) < 0.05);
        CHECK(h.hurst == (1.0 + h.slope) / 2.0);
    }
}

TEST_CASE("Poisson counts have no scaling") {
    Rng rng(21);
    std::vector<double> counts(1 << 18);
    std::poisson_distribution<int> pois(16.0);
    for (auto& c : counts) c = pois(rng);
    const LogscaleDiagram d = logscale_diagram(counts, 2);
    const HurstEstimate h = hurst_estimate(d, 1, d.octaves.back());
    CHECK(std::abs(h.slope) < 0.05);
}

TEST_CASE("alignment scan") {
    const LogscaleDiagram d = logscale_diagram(white_noise(1 << 16, 13), 2);
    const AlignmentRange r = suggest_alignment(d);
    CHECK(r.pvalue >= 0.05);
    CHECK(r.j2 - r.j1 >= 2);
    CHECK(r.j2 == d.octaves.back());
    const HurstEstimate h = hurst_estimate(d, r.j1, r.j2);
    CHECK(h.alignment_pvalue == doctest::Approx(r.pvalue));
    CHECK_FALSE(h.alignment_rejected);
    CHECK_THROWS_AS(hurst_estimate(d, 3, 3), DomainError);
    CHECK_THROWS_AS(hurst_estimate(d, 0, 4), DomainError);
}

TEST_CASE("a broken scaling law is flagged by the alignment test") {
    // White noise plus a strong coarse-scale random walk: two regimes.
    auto x = white_noise(1 << 16, 17);
    Rng rng(18);
    double walk = 0.0;
    for (auto& v : x) v += (walk += 0.05 * rng.normal());
    const LogscaleDiagram d = logscale_diagram(x, 2);
    CHECK(hurst_estimate(d, 1, d.octaves.back()).alignment_rejected);
}

TEST_CASE("coarse octaves steepen with the maximum backoff stage") {
    // Common gamma and time unit; only the truncation stage differs.
    const double gamma = 0.44;
    const int N = 10;
    const double window = 16.0 * mean_backoff(gamma, ProtocolParams::dot11b(MaxStage(25), N)) / N;
    std::vector<double> top;
    for (int K : {6, 15, 25}) {
        const auto p = ProtocolParams::dot11b(MaxStage(K), N);
        double acc = 0.0;
        const int reps = 6;
        for (int r = 0; r < reps; ++r) {
            const auto c = renewal_count_series(gamma, p, N, window, std::size_t{1} << 20, 500 + r);
            const LogscaleDiagram d = logscale_diagram(std::vector<double>(c.begin(), c.end()), 2);
            // Top three octave slopes among octaves with at least 16 coefficients.
            std::size_t last = d.octaves.size();
            while (d.n_coeffs[last - 1] < 16) --last;
            acc += (d.y[last - 1] - d.y[last - 4]) / 3.0 / reps;
        }
        top.push_back(acc);
        MESSAGE("K=" << K << " mean top-octave slope " << acc);
    }
    CHECK(top[0] < top[1]);
    CHECK(top[1] < top[2]);
}
