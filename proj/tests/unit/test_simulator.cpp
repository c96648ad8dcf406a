#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "backoff/errors.hpp"
#include "backoff/fpe.hpp"
#include "backoff/moments.hpp"
#include "backoff/parallel.hpp"
#include "backoff/simulator.hpp"
#include "backoff/stats.hpp"

using namespace backoff;

TEST_CASE("sample_per_packet_backoff at gamma=0 is uniform on the first window") {
    const auto p = ProtocolParams::dot11b(MaxStage(6), 1);
    const auto s = sample_per_packet_backoff(0.0, p, 100000, 1);
    CHECK(*std::max_element(s.begin(), s.end()) <= 31.0);
    CHECK(ks_pvalue(ks_statistic(s, [](double x) { return std::clamp(x / 31.0, 0.0, 1.0); }), s.size()) > 0.01);
}

TEST_CASE("per-packet samples match the analytic mean and CV") {
    // K=6 keeps the fourth moment finite, so the CV has a proper standard error.
    const auto p = ProtocolParams::dot11b(MaxStage(6), 10);
    for (double g : {0.1, 0.2}) {
        const auto m = sample_moments(sample_per_packet_backoff(g, p, 1000000, 42));
        CHECK(std::abs(m.mean - mean_backoff(g, p)) < 3.0 * m.se_mean);
        CHECK(std::abs(m.cv - cv_backoff(g, p, StageVariance::continuous)) < 3.0 * m.se_cv);
    }
}

TEST_CASE("sample CV standard error matches replicate spread") {
    const auto p = ProtocolParams::dot11b(MaxStage(6), 10);
    std::vector<double> cvs;
    double se = 0.0;
    for (int r = 0; r < 200; ++r) {
        const auto m = sample_moments(sample_per_packet_backoff(0.2, p, 5000, 1000 + r));
        cvs.push_back(m.cv);
        se += m.se_cv / 200;
    }
    CHECK(std::sqrt(variance_of(cvs)) == doctest::Approx(se).epsilon(0.15));
}

TEST_CASE("slot-level simulation with a single node never collides") {
    const auto p = ProtocolParams::dot11b(MaxStage(6), 1);
    for (auto mode : {CounterMode::discrete, CounterMode::continuous}) {
        const auto tr = simulate_cell(p, 1e5, 3, mode);
        CHECK(tr.collisions == 0);
        CHECK(tr.realized_gamma == 0.0);
        for (double w : tr.omega_samples[0]) CHECK(w <= 31.0);
        CHECK(tr.omega_samples[0].size() > 5000);
    }
}

TEST_CASE("slot-level bookkeeping: per-packet backoff equals the arrival gaps") {
    const auto p = ProtocolParams::dot11b(MaxStage(6), 5);
    const auto tr = simulate_cell(p, 1e5, 8, CounterMode::discrete);
    for (int n = 0; n < 5; ++n) {
        const auto& a = tr.arrivals_per_node[n];
        const auto& o = tr.omega_samples[n];
        REQUIRE(a.size() > 100);
        CHECK(std::is_sorted(a.begin(), a.end()));
        if (tr.drops == 0) {
            CHECK(o.size() == a.size());
            CHECK(a[0] == doctest::Approx(o[0]));
            for (std::size_t j = 1; j < a.size(); ++j) CHECK(a[j] - a[j - 1] == doctest::Approx(o[j]));
        }
    }
}

TEST_CASE("slot-level collision rate tracks the fixed point") {
    const auto p = ProtocolParams::dot11b(MaxStage(6), 20);
    const double gstar = solve_fixed_point(p).gamma;
    const auto disc = simulate_cell(p, 1e7, 2024, CounterMode::discrete);
    CHECK(std::abs(disc.realized_gamma - gstar) < 0.02);
    const auto tr = simulate_cell(p, 1e7, 2024, CounterMode::continuous);
    CHECK(std::abs(tr.realized_gamma - gstar) < 0.02);
    std::vector<double> all;
    for (const auto& o : tr.omega_samples) all.insert(all.end(), o.begin(), o.end());
    CHECK(mean_of(all) == doctest::Approx(mean_backoff(tr.realized_gamma, p)).epsilon(0.02));
}

TEST_CASE("slot-level simulation is deterministic") {
    const auto p = ProtocolParams::dot11b(MaxStage(6), 10);
    const auto a = simulate_cell(p, 2e4, 77, CounterMode::continuous);
    const auto b = simulate_cell(p, 2e4, 77, CounterMode::continuous);
    CHECK(a.arrivals_per_node == b.arrivals_per_node);
    CHECK(a.omega_samples == b.omega_samples);
}

TEST_CASE("renewal superposition of one node reproduces the Omega law") {
    const auto p = ProtocolParams::dot11b(MaxStage(6), 1);
    const double g = 0.3;
    const auto tr = build_renewal_superposition(g, p, 1, 2e6, 5);
    const auto ref = sample_per_packet_backoff(g, p, 200000, 6);
    const auto& gaps = tr.omega_samples[0];
    REQUIRE(gaps.size() > 10000);
    const double d = ks_two_sample_statistic(gaps, ref);
    CHECK(ks_two_sample_pvalue(d, gaps.size(), ref.size()) > 0.01);
    const auto& a = tr.arrivals_per_node[0];
    for (std::size_t j = 1; j < a.size(); ++j) REQUIRE(a[j] > a[j - 1]);
}

TEST_CASE("merged intensity is additive and stationary") {
    const auto p = ProtocolParams::dot11b(MaxStage(6), 30);
    const double g = solve_fixed_point(p).gamma;
    const double horizon = 2e6;
    const auto tr = build_renewal_superposition(g, p, 30, horizon, 10);
    const double expect = 30 * horizon / mean_backoff(g, p);
    const double sd = std::sqrt(expect) * std::max(1.0, cv_backoff(g, p, StageVariance::continuous));
    CHECK(std::abs(tr.total_arrivals() - expect) < 3.0 * sd);

    const auto q = count_process(tr, horizon / 4);
    REQUIRE(q.size() == 4);
    for (auto c : q) CHECK(std::abs(c - expect / 4) < 3.0 * sd / 2.0);
}

TEST_CASE("N=2 802.11a/g renewal CV is close to one") {
    const auto p = ProtocolParams::dot11ag(MaxStage(6), 2);
    const double g = solve_fixed_point(p).gamma;
    const auto tr = build_renewal_superposition(g, p, 2, 5e6, 12);
    std::vector<double> all = tr.omega_samples[0];
    all.insert(all.end(), tr.omega_samples[1].begin(), tr.omega_samples[1].end());
    const double cv = std::sqrt(variance_of(all)) / mean_of(all);
    CHECK(cv == doctest::Approx(cv_backoff(g, p, StageVariance::continuous)).epsilon(0.03));
    CHECK(cv == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("streamed count series equals count_process of the built trace") {
    const auto p = ProtocolParams::dot11b(MaxStage(15), 10);
    const double g = solve_fixed_point(p).gamma;
    const auto tr = build_renewal_superposition(g, p, 10, 50.0 * 1000, 31);
    const auto a = count_process(tr, 50.0);
    const auto b = renewal_count_series(g, p, 10, 50.0, 1000, 31);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("count_process") {
    Trace empty;
    empty.horizon = 100.0;
    empty.arrivals_per_node.resize(3);
    const auto z = count_process(empty, 10.0);
    CHECK(z.size() == 10);
    for (auto c : z) CHECK(c == 0);

    const auto p = ProtocolParams::dot11b(MaxStage(6), 5);
    const auto tr = build_renewal_superposition(0.2, p, 5, 1e4, 2);
    const auto one = count_process(tr, 1e4);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == tr.total_arrivals());
}

TEST_CASE("inter_transmission_counts") {
    const auto p1 = ProtocolParams::dot11b(MaxStage(6), 1);
    const auto solo = build_renewal_superposition(0.0, p1, 1, 1e5, 4);
    for (double z : inter_transmission_counts(solo, 0, 10)) CHECK(z == 0.0);

    const auto short_tr = build_renewal_superposition(0.0, p1, 1, 10.0, 4);
    CHECK_THROWS_AS(inter_transmission_counts(short_tr, 0, 10), InsufficientTrace);

    const auto p = ProtocolParams::dot11b(MaxStage(6), 40);
    const auto s = solve_fixed_point(p);
    const double omega = mean_backoff(s.gamma, p);
    const auto tr = build_renewal_superposition(s.gamma, p, 40, 2000.0 * 100 * omega, 17);
    const auto z = inter_transmission_counts(tr, 0, 100);
    REQUIRE(z.size() > 1500);
    CHECK(mean_of(z) == doctest::Approx(39.0 * 100).epsilon(0.01));
    const double v = cv_backoff(s.gamma, p, StageVariance::continuous);
    CHECK(variance_of(z) == doctest::Approx(39.0 * 39.0 * 100 * v * v).epsilon(0.1));
}

TEST_CASE("replicates are independent of the worker count") {
    const auto p = ProtocolParams::dot11b(MaxStage(6), 8);
    auto job = [&](std::size_t r) { return build_renewal_superposition(0.2, p, 8, 5e3, derive_seed(9, r)).merged_arrivals(); };
    const auto one = parallel_map(6, 1, job);
    const auto four = parallel_map(6, 4, job);
    CHECK(one == four);
}
