// Acceptance gate: runs each criterion at its stated tolerance and prints one PASS/FAIL line.
// Usage: acceptance [--only 1,2,...] [--known-unattainable 1,7] [--report FILE]
// Exit status is 0 when every failing criterion is listed in --known-unattainable.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "backoff/errors.hpp"
#include "backoff/estimators.hpp"
#include "backoff/fairness.hpp"
#include "backoff/fpe.hpp"
#include "backoff/moments.hpp"
#include "backoff/simulator.hpp"
#include "backoff/stable.hpp"
#include "backoff/stats.hpp"
#include "backoff/telecom.hpp"
#include "backoff/wavelet.hpp"
#include "fixtures.hpp"

using namespace backoff;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[miss] ";
        }
        detail << what << "; ";
    }
};

std::string fmt(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

struct Criterion {
    int id;
    std::string name;
    double limit_s;
    std::function<void(Outcome&)> run;
};

// ------------------------------------------------------------------ 1

void c1(Outcome& o) {
    for (auto [cw0, lo, hi] : {std::tuple{32.0, 0.65, 0.75}, {16.0, 0.95, 1.05}}) {
        const ProtocolParams p{2.0, cw0 / 2.0, MaxStage(6), 2};
        const double g = solve_fixed_point(p).gamma;
        const double v = cv_backoff(g, p, StageVariance::discrete);
        o.check(v >= lo && v <= hi, "2b0=" + fmt(cw0) + " gamma*=" + fmt(g, 5) + " v=" + fmt(v) + " in [" + fmt(lo) +
                                        "," + fmt(hi) + "]");
    }
}

// ------------------------------------------------------------------ 2

void c2(Outcome& o) {
    for (int N : {5, 20, 50}) {
        std::vector<double> g(17);
        for (int K = 0; K <= 16; ++K) g[K] = solve_fixed_point({2.0, 16.0, MaxStage(K), N}).gamma;
        int K0 = 17;
        while (K0 > 0 && g[K0 - 1] < 0.5) --K0;
        bool monotone = K0 <= 16;
        for (int K = K0 + 1; K <= 16; ++K) monotone = monotone && g[K] <= g[K - 1] + 1e-12;
        o.check(monotone, "N=" + std::to_string(N) + " K0=" + std::to_string(K0) + " gamma(K0)=" +
                              fmt(K0 <= 16 ? g[K0] : NAN) + " gamma(16)=" + fmt(g[16]) + " non-increasing, < 1/2");
    }
}

// ------------------------------------------------------------------ 3

void c3(Outcome& o) {
    const auto p = ProtocolParams::dot11b(MaxStage(6), 10);
    for (double g : {0.1, 0.2}) {
        const auto m = sample_moments(sample_per_packet_backoff(g, p, 1'000'000, 303));
        const double mean = mean_backoff(g, p), cv = cv_backoff(g, p, StageVariance::continuous);
        const double zm = (m.mean - mean) / m.se_mean, zc = (m.cv - cv) / m.se_cv;
        o.check(std::abs(zm) < 3.0 && std::abs(zc) < 3.0,
                "gamma=" + fmt(g) + " mean z=" + fmt(zm, 2) + " cv z=" + fmt(zc, 2));
    }
}

// ------------------------------------------------------------------ 4

void c4(Outcome& o) {
    for (int N : {10, 40}) {
        const auto p = ProtocolParams::dot11b(MaxStage(15), N);
        const auto sol = solve_fixed_point(p);
        const Ccdf c = thin_log(empirical_ccdf(sample_per_packet_backoff(sol.gamma, p, 10'000'000, 404 + N)), 400);
        const double lo = 8.0 * mean_backoff(sol.gamma, p);
        const auto it = std::find_if(c.p.begin(), c.p.end(), [](double q) { return q < 1e-4; });
        const TailFit f = tail_index_fit(c, lo, c.x[it - c.p.begin()]);
        o.check(std::abs(f.alpha_hat - sol.alpha) <= 0.1,
                "N=" + std::to_string(N) + " alpha_hat=" + fmt(f.alpha_hat) + " alpha=" + fmt(sol.alpha));
    }
}

// ------------------------------------------------------------------ 5

void c5(Outcome& o) {
    const double g = 0.2, m = 2.0;
    const ProtocolParams p{m, 16.0, MaxStage::infinite(), 2};
    std::string got, want;
    bool match = true;
    for (double c : {0.5, 1.0, 1.5, 2.0, 2.3, 2.5, 3.0}) {
        const auto r = fractional_moment(c, g, p, 505, 20000);
        const bool finite = std::pow(m, c) * g < 1.0;
        match = match && r.finite == finite && (!r.finite || std::isfinite(r.value));
        got += r.finite ? 'F' : 'I';
        want += finite ? 'F' : 'I';
    }
    o.check(match, "c={0.5,1,1.5,2,2.3,2.5,3} got " + got + " expected " + want + " (alpha=" +
                       fmt(-std::log(g) / std::log(m), 5) + ")");
}

// ------------------------------------------------------------------ 6

void c6(Outcome& o) {
    const auto p = ProtocolParams::dot11b(MaxStage(6), 50);
    const auto sol = solve_fixed_point(p);
    const double ob = mean_backoff(sol.gamma, p);
    const Trace tr = build_renewal_superposition(sol.gamma, p, 50, 1e4 * ob / 50, 606);
    const PoissonReport r = poisson_checks(tr.merged_arrivals(), ob / 50);
    o.check(std::abs(r.interarrival_cv - 1.0) <= 0.05, "interarrival CV=" + fmt(r.interarrival_cv));
    o.check(r.ks_pvalue_exponential > 0.01, "KS p=" + fmt(r.ks_pvalue_exponential, 3));
    o.check(std::abs(r.dispersion_index - 1.0) <= 0.1, "dispersion=" + fmt(r.dispersion_index));
    o.detail << r.n_arrivals << " arrivals";
}

// ------------------------------------------------------------------ 7

void c7(Outcome& o) {
    const auto p = ProtocolParams::dot11b(MaxStage(6), 40);
    const auto sol = solve_fixed_point(p);
    const FairnessSpec s = make_fairness_spec(p, 100.0);
    const GaussianMoments g = gaussian_moments(s);
    const auto tr = build_renewal_superposition(sol.gamma, p, 40, 25100.0 * s.omega_bar, 707);
    std::vector<double> z;
    for (int n = 0; n < 40; ++n) {
        const auto zn = inter_transmission_counts(tr, n, 100);
        z.insert(z.end(), zn.begin(), zn.end());
    }
    const double mean = mean_of(z), var = variance_of(z);
    const double tv = binned_total_variation(
        z, [&](long lo, long hi) { return gaussian_inter_tx_mass(lo, hi, s); }, std::lround(g.mean - 5 * g.sd),
        std::lround(g.mean + 5 * g.sd), std::lround(g.sd / 4.0));
    o.check(z.size() >= 10000, std::to_string(z.size()) + " windows");
    o.check(std::abs(mean / 3900.0 - 1.0) <= 0.01, "mean=" + fmt(mean, 5));
    o.check(std::abs(var / (g.sd * g.sd) - 1.0) <= 0.1, "var/model=" + fmt(var / (g.sd * g.sd)));
    o.check(tv < 0.05, "TV=" + fmt(tv, 3));
}

// ------------------------------------------------------------------ 8

void c8(Outcome& o) {
    const auto p = ProtocolParams::dot11b(MaxStage(15), 40);
    const auto sol = solve_fixed_point(p);
    const double ob = mean_backoff(sol.gamma, p);
    const EllEstimate e =
        estimate_ell_from_samples(sample_per_packet_backoff(sol.gamma, p, 10'000'000, 808), sol.alpha, ob);
    const FairnessSpec s = make_fairness_spec(p, 100.0, e.ell);
    const HeavyInterTx h(s);
    const double mean = (s.N - 1) * s.zeta;

    long mode = 0;
    double best = -1.0;
    for (long z = 100; z <= 6000; z += 50) {
        const double v = h.pmf(z).probability;
        if (v > best) best = v, mode = z;
    }
    o.check(mode < mean, "mode=" + std::to_string(mode) + " mean=" + fmt(mean));

    std::vector<double> lx, ly;
    for (double f : {10.0, 20.0, 40.0, 70.0, 100.0}) {
        lx.push_back(std::log(f * mean));
        ly.push_back(std::log(h.ccdf(std::lround(f * mean)).probability));
    }
    const double slope = ols(lx, ly).slope;
    o.check(std::abs(slope + s.alpha) <= 0.15, "tail slope=" + fmt(slope) + " -alpha=" + fmt(-s.alpha));

    std::vector<double> zs;
    for (double z = 0; z < 12000; z += 250) zs.push_back(z);
    for (double z = 12000; z < 4e6; z *= 1.3) zs.push_back(std::round(z));
    double total = 0.0, prev = h.pmf(0).probability;
    for (std::size_t i = 1; i < zs.size(); ++i) {
        const double v = h.pmf(static_cast<long>(zs[i])).probability;
        total += 0.5 * (v + prev) * (zs[i] - zs[i - 1]);
        prev = v;
    }
    total += h.ccdf(static_cast<long>(zs.back())).probability;
    o.check(std::abs(total - 1.0) <= 0.02, "mass=" + fmt(total, 5));
    o.detail << "ell=" << fmt(e.ell);
}

// ------------------------------------------------------------------ 9

double top_octave_hurst(const std::vector<std::uint32_t>& c) {
    const LogscaleDiagram d = logscale_diagram(std::vector<double>(c.begin(), c.end()), 2);
    std::size_t last = d.octaves.size();
    while (d.n_coeffs[last - 1] < 16) --last;
    return hurst_estimate(d, d.octaves[last - 1] - 5, d.octaves[last - 1]).hurst;
}

double renewal_hurst(const ProtocolParams& p, int reps, std::uint64_t seed, double* alpha) {
    const auto sol = solve_fixed_point(p);
    *alpha = sol.alpha;
    const double window = 16.0 * mean_backoff(sol.gamma, p) / p.N;
    double h = 0.0;
    for (int r = 0; r < reps; ++r)
        h += top_octave_hurst(renewal_count_series(sol.gamma, p, p.N, window, std::size_t{1} << 22, seed + r)) / reps;
    return h;
}

void c9(Outcome& o) {
    double ha = 0.0;
    for (std::uint64_t seed : {1, 2, 3}) {
        const LogscaleDiagram d = logscale_diagram(testing::fgn(0.8, 1 << 18, 900 + seed), 2);
        ha += hurst_estimate(d, 2, d.octaves.back()).hurst / 3.0;
    }
    o.check(std::abs(ha - 0.8) <= 0.05, "(a) fGn H=" + fmt(ha, 3));

    double alpha = 0.0;
    const double hb = renewal_hurst(ProtocolParams::dot11b(MaxStage::infinite(), 40), 4, 910, &alpha);
    const double target = (3.0 - alpha) / 2.0;
    o.check(std::abs(hb - target) <= 0.1, "(b) K=inf N=40 alpha=" + fmt(alpha) + " H=" + fmt(hb, 3) + " target " +
                                               fmt(target, 3));

    const double hc = renewal_hurst(ProtocolParams::dot11b(MaxStage(6), 40), 4, 920, &alpha);
    o.check(std::abs(hc - 0.5) <= 0.05, "(c) K=6 N=40 H=" + fmt(hc, 3));

    // Common gamma and count window; only the truncation stage differs.
    const double gamma = 0.44;
    const int N = 10;
    const double window = 16.0 * mean_backoff(gamma, ProtocolParams::dot11b(MaxStage(15), N)) / N;
    double top[2] = {0.0, 0.0};
    for (int i = 0; i < 2; ++i) {
        const auto p = ProtocolParams::dot11b(MaxStage(i == 0 ? 6 : 15), N);
        for (int r = 0; r < 6; ++r) {
            const auto c = renewal_count_series(gamma, p, N, window, std::size_t{1} << 20, 930 + r);
            const LogscaleDiagram d = logscale_diagram(std::vector<double>(c.begin(), c.end()), 2);
            std::size_t last = d.octaves.size();
            while (d.n_coeffs[last - 1] < 16) --last;
            top[i] += (d.y[last - 1] - d.y[last - 4]) / 3.0 / 6.0;
        }
    }
    o.check(top[0] < top[1], "(d) top-octave slope K=6 " + fmt(top[0], 3) + " < K=15 " + fmt(top[1], 3));
}

// ------------------------------------------------------------------ 10

void c10(Outcome& o) {
    for (double a : {1.3, 1.5, 1.7}) {
        const StableParams p{a, 1.0, 1.0, 0.0};
        const auto s = stable_sample(p, 1'000'000, 1000 + static_cast<std::uint64_t>(10 * a));
        const double d = ks_statistic_bound(s, [&](double x) { return stable_cdf(p, x); }, 100);
        o.check(d < 0.01, "alpha=" + fmt(a) + " KS<=" + fmt(d, 3));
    }
    // Gamma(1/2) = sqrt(pi) gives C_1.5 = 1/sqrt(2 pi).
    const double exact = 1.0 / std::sqrt(2.0 * M_PI);
    o.check(std::abs(c_alpha(1.5) - exact) < 1e-6, "C_1.5 err=" + fmt(std::abs(c_alpha(1.5) - exact), 2));
}

// ------------------------------------------------------------------ 11

void c11(Outcome& o) {
    for (auto [tau, a] : {std::pair{1.0, 1.3}, {1.0, 1.7}, {10.0, 1.5}}) {
        const double h = 1e-2 / tau;
        const double d2 = (telecom_cgf(h, tau, a) + telecom_cgf(-h, tau, a)).real() / (h * h);
        const double rel = std::abs(d2 / testing::telecom_variance_oracle(tau, a) - 1.0);
        o.check(rel <= 1e-3, "(" + fmt(tau) + "," + fmt(a) + ") rel err=" + fmt(rel, 2));
    }
}

// ------------------------------------------------------------------ 12

void c12(Outcome& o) {
    const auto p = ProtocolParams::dot11b(MaxStage(6), 25);
    const double p_bar = solve_fixed_point(p).p_bar;
    const auto e = slot_event_distribution(p_bar, 25);
    const auto counts = simulate_slot_events(p_bar, 25, 1'000'000, 1212);
    std::vector<double> hist(30, 0.0), probs(30);
    for (int c : counts) hist[std::min(c, 29)] += 1.0;
    double tail = 1.0;
    for (int x = 0; x < 29; ++x) tail -= (probs[x] = e.pmf(x));
    probs[29] = tail;
    const auto r = chi_square_gof(hist, probs);
    o.check(r.pvalue > 0.01, "p_bar=" + fmt(p_bar) + " chi2 p=" + fmt(r.pvalue, 3));
}

std::set<int> parse_ids(const std::string& s) {
    std::set<int> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.insert(std::stoi(item));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only, known;
    std::FILE* report = nullptr;
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string flag = argv[i];
        if (flag == "--only") only = parse_ids(argv[i + 1]);
        else if (flag == "--known-unattainable") known = parse_ids(argv[i + 1]);
        else if (flag == "--report") report = std::fopen(argv[i + 1], "w");
        else {
            std::fprintf(stderr, "unknown option %s\n", argv[i]);
            return 2;
        }
    }

    const std::vector<Criterion> all = {
        {1, "FPE + CV at N=2", 1, c1},
        {2, "gamma*(K) non-increasing and < 1/2", 10, c2},
        {3, "Monte Carlo mean and CV", 60, c3},
        {4, "power-tail index", 300, c4},
        {5, "fractional moment dichotomy", 60, c5},
        {6, "Poisson superposition", 120, c6},
        {7, "fairness, Gaussian regime", 600, c7},
        {8, "fairness, heavy regime", 0, c8},
        {9, "wavelet LRD", 900, c9},
        {10, "stable-law numerics", 120, c10},
        {11, "Telecom cgf second derivative", 60, c11},
        {12, "slot-event distribution", 60, c12},
    };

    auto emit = [&](const std::string& text) {
        std::fputs(text.c_str(), stdout);
        std::fflush(stdout);
        if (report) {
            std::fputs(text.c_str(), report);
            std::fflush(report);
        }
    };

    std::vector<int> failed;
    for (const Criterion& c : all) {
        if (!only.empty() && !only.count(c.id)) continue;
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "exception: " << e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.limit_s > 0 && secs > c.limit_s) o.check(false, "runtime over " + fmt(c.limit_s) + " s");
        if (!o.pass) failed.push_back(c.id);
        char line[2048];
        std::snprintf(line, sizeof line, "%s  %2d  %-38s %6.1fs  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                      secs, o.detail.str().c_str());
        emit(line);
    }

    std::vector<int> unexpected, recovered;
    for (int id : failed)
        if (!known.count(id)) unexpected.push_back(id);
    for (int id : known)
        if (std::find(failed.begin(), failed.end(), id) == failed.end() && (only.empty() || only.count(id)))
            recovered.push_back(id);
    auto list = [](const std::vector<int>& v) {
        std::string s;
        for (int id : v) s += (s.empty() ? "" : ",") + std::to_string(id);
        return s.empty() ? std::string("none") : s;
    };
    emit("failed: " + list(failed) + "; known unattainable: " + list(std::vector<int>(known.begin(), known.end())) +
         "; unexpected failures: " + list(unexpected) + "\n");
    if (!recovered.empty()) emit("note: criteria listed as unattainable now pass: " + list(recovered) + "\n");
    if (report) std::fclose(report);
    return unexpected.empty() ? 0 : 1;
}
