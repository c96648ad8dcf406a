#include "backoff/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "backoff/errors.hpp"
#include "backoff/fpe.hpp"

namespace backoff {

std::string to_string(TraceMode m) { return m == TraceMode::slot_level ? "slot_level" : "renewal"; }
std::string to_string(CounterMode m) { return m == CounterMode::discrete ? "discrete" : "continuous"; }

TraceMode parse_trace_mode(const std::string& s) {
    if (s == "slot_level") return TraceMode::slot_level;
    if (s == "renewal") return TraceMode::renewal;
    throw InvalidParams("trace mode must be slot_level or renewal, got \"" + s + "\"");
}

CounterMode parse_counter_mode(const std::string& s) {
    if (s == "discrete") return CounterMode::discrete;
    if (s == "continuous") return CounterMode::continuous;
    throw InvalidParams("counter mode must be discrete or continuous, got \"" + s + "\"");
}

std::size_t Trace::total_arrivals() const {
    std::size_t n = 0;
    for (const auto& a : arrivals_per_node) n += a.size();
    return n;
}

std::vector<double> Trace::merged_arrivals() const {
    std::vector<double> all;
    all.reserve(total_arrivals());
    for (const auto& a : arrivals_per_node) all.insert(all.end(), a.begin(), a.end());
    std::sort(all.begin(), all.end());
    return all;
}

namespace {

constexpr int kStageTable = 64;

void check_gamma(double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw DomainError("gamma must lie in [0,1)");
}

}  // namespace

OmegaSampler::OmegaSampler(double gamma, const ProtocolParams& p)
    : gamma_(gamma), log_gamma_(gamma > 0.0 ? std::log(gamma) : 0.0), p_(p) {
    p.validate();
    check_gamma(gamma);
    kmax_ = p.K.is_infinite() ? std::numeric_limits<int>::max() : p.K.value();
    for (int k = 0; k < kStageTable; ++k) window_.push_back(p.window(k));
    // The residual-life law needs phi, which exists only while the mean is finite.
    if (!p.K.is_infinite() || gamma * p.m < 1.0) {
        auto phi = stage_distribution(gamma, p, 1e-15);
        double c = 0.0;
        for (double v : phi) phi_cdf_.push_back(c += v);
        phi_cdf_.back() = 1.0;
    }
}

int OmegaSampler::draw_kappa(Rng& rng, int from) const {
    if (gamma_ == 0.0 || from >= kmax_) return from;
    const double extra = std::floor(std::log(rng.uniform_pos()) / log_gamma_);
    if (extra >= static_cast<double>(kmax_ - from)) return kmax_;
    return from + static_cast<int>(extra);
}

double OmegaSampler::operator()(Rng& rng) const {
    const int kappa = draw_kappa(rng, 0);
    double s = 0.0;
    for (int k = 0; k <= kappa; ++k) s += rng.uniform() * (k < kStageTable ? window_[k] : p_.window(k));
    return s;
}

double OmegaSampler::residual(Rng& rng) const {
    if (phi_cdf_.empty()) throw DivergentSeries("residual life undefined: mean backoff is infinite");
    const double u = rng.uniform();
    const int i = static_cast<int>(std::upper_bound(phi_cdf_.begin(), phi_cdf_.end(), u) - phi_cdf_.begin());
    const int stage = std::min(i, static_cast<int>(phi_cdf_.size()) - 1);
    const int kappa = draw_kappa(rng, stage);
    double s = 0.0;
    for (int k = 0; k <= kappa; ++k) {
        const double w = k < kStageTable ? window_[k] : p_.window(k);
        s += (k == stage ? std::sqrt(rng.uniform()) : rng.uniform()) * w;
    }
    return rng.uniform() * s;
}

std::vector<double> sample_per_packet_backoff(double gamma, const ProtocolParams& p, std::size_t n,
                                              std::uint64_t seed) {
    OmegaSampler draw(gamma, p);
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& v : out) v = draw(rng);
    return out;
}

Trace simulate_cell(const ProtocolParams& p, double horizon_slots, std::uint64_t seed, CounterMode mode) {
    p.validate();
    if (!(horizon_slots > 0.0)) throw InvalidParams("horizon must be > 0");
    const bool discrete = mode == CounterMode::discrete;
    if (discrete) {
        for (int k = 0; k < 8 && (p.K.is_infinite() || k <= p.K.value()); ++k) {
            const double w = 2.0 * p.b(k);
            if (std::abs(w - std::round(w)) > 1e-9)
                throw InvalidParams("discrete counters need integral windows 2 b0 m^k");
        }
    }
    const int N = p.N;
    const int K = p.K.is_infinite() ? std::numeric_limits<int>::max() : p.K.value();

    Trace tr;
    tr.params = p;
    tr.horizon = horizon_slots;
    tr.seed = seed;
    tr.mode = TraceMode::slot_level;
    tr.arrivals_per_node.assign(N, {});
    tr.omega_samples.assign(N, {});

    Rng rng(seed);
    auto draw_counter = [&](int stage) {
        if (discrete) return static_cast<double>(rng.below(static_cast<std::uint64_t>(std::llround(2.0 * p.b(stage)))));
        return rng.uniform() * p.window(stage);
    };

    std::vector<int> stage(N, 0);
    std::vector<double> expiry(N), packet(N);
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    for (int n = 0; n < N; ++n) {
        packet[n] = draw_counter(0);
        expiry[n] = packet[n];
        heap.emplace(expiry[n], n);
    }

    std::vector<int> group;
    while (!heap.empty() && heap.top().first <= horizon_slots) {
        const double t = heap.top().first;
        group.clear();
        // Expiries sharing the earliest one's integer slot transmit together.
        const double slot_end = std::floor(t) + 1.0;
        while (!heap.empty() && heap.top().first < slot_end) {
            group.push_back(heap.top().second);
            heap.pop();
        }
        tr.attempts += group.size();
        if (group.size() == 1) {
            const int n = group[0];
            tr.arrivals_per_node[n].push_back(expiry[n]);
            tr.omega_samples[n].push_back(packet[n]);
            stage[n] = 0;
            const double c = draw_counter(0);
            packet[n] = c;
            expiry[n] += c;
            heap.emplace(expiry[n], n);
            continue;
        }
        tr.collisions += group.size();
        for (int n : group) {
            if (stage[n] >= K) {
                ++tr.drops;
                tr.omega_samples[n].push_back(packet[n]);
                stage[n] = 0;
                packet[n] = 0.0;
            } else {
                ++stage[n];
            }
            const double c = draw_counter(stage[n]);
            packet[n] += c;
            expiry[n] += c;
            heap.emplace(expiry[n], n);
        }
    }
    tr.realized_gamma = tr.attempts ? static_cast<double>(tr.collisions) / tr.attempts : 0.0;
    return tr;
}

namespace {

// Arrival times of one stationary renewal stream; calls emit(t) for t <= horizon.
template <class Emit>
void renewal_stream(const OmegaSampler& draw, Rng& rng, double horizon, Emit emit) {
    double t = draw.residual(rng);
    while (t <= horizon) {
        emit(t);
        t += draw(rng);
    }
}

}  // namespace

Trace build_renewal_superposition(double gamma, const ProtocolParams& p, int N, double horizon,
                                  std::uint64_t seed) {
    if (N < 1) throw InvalidParams("N must be >= 1");
    if (!(horizon > 0.0)) throw InvalidParams("horizon must be > 0");
    OmegaSampler draw(gamma, p);
    Trace tr;
    tr.params = p;
    tr.params.N = N;
    tr.horizon = horizon;
    tr.seed = seed;
    tr.mode = TraceMode::renewal;
    tr.realized_gamma = gamma;
    tr.arrivals_per_node.resize(N);
    tr.omega_samples.resize(N);
    for (int n = 0; n < N; ++n) {
        Rng rng(seed, static_cast<std::uint64_t>(n));
        auto& a = tr.arrivals_per_node[n];
        renewal_stream(draw, rng, horizon, [&](double t) { a.push_back(t); });
        auto& o = tr.omega_samples[n];
        for (std::size_t j = 1; j < a.size(); ++j) o.push_back(a[j] - a[j - 1]);
    }
    return tr;
}

std::vector<std::uint32_t> renewal_count_series(double gamma, const ProtocolParams& p, int N,
                                                double window, std::size_t n_windows,
                                                std::uint64_t seed) {
    if (N < 1) throw InvalidParams("N must be >= 1");
    if (!(window > 0.0) || n_windows == 0) throw InvalidParams("window and n_windows must be positive");
    OmegaSampler draw(gamma, p);
    const double horizon = window * static_cast<double>(n_windows);
    std::vector<std::uint32_t> counts(n_windows, 0);
    for (int n = 0; n < N; ++n) {
        Rng rng(seed, static_cast<std::uint64_t>(n));
        renewal_stream(draw, rng, horizon, [&](double t) {
            auto b = static_cast<std::size_t>(t / window);
            ++counts[std::min(b, n_windows - 1)];
        });
    }
    return counts;
}

std::vector<double> inter_transmission_counts(const Trace& trace, int tagged, int zeta) {
    const int N = static_cast<int>(trace.arrivals_per_node.size());
    if (tagged < 0 || tagged >= N) throw InvalidParams("tagged node out of range");
    if (zeta < 1) throw InvalidParams("zeta must be >= 1");
    const auto& own = trace.arrivals_per_node[tagged];
    if (own.size() < static_cast<std::size_t>(zeta) + 1)
        throw InsufficientTrace("tagged node has fewer than zeta+1 successes");
    std::vector<double> bounds;
    for (std::size_t j = 0; j < own.size(); j += zeta) bounds.push_back(own[j]);
    const std::size_t W = bounds.size() - 1;
    std::vector<double> z(W, 0.0);
    for (int n = 0; n < N; ++n) {
        if (n == tagged) continue;
        for (double t : trace.arrivals_per_node[n]) {
            if (t <= bounds.front() || t > bounds.back()) continue;
            const auto w = static_cast<std::size_t>(std::lower_bound(bounds.begin(), bounds.end(), t) - bounds.begin()) - 1;
            z[w] += 1.0;
        }
    }
    return z;
}

std::vector<std::uint64_t> count_process(const Trace& trace, double window) {
    if (!(window > 0.0)) throw InvalidParams("window must be > 0");
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(trace.horizon / window - 1e-12)));
    std::vector<std::uint64_t> counts(n, 0);
    for (const auto& a : trace.arrivals_per_node)
        for (double t : a) ++counts[std::min(static_cast<std::size_t>(t / window), n - 1)];
    return counts;
}

std::vector<int> simulate_slot_events(double p_bar, int N, std::size_t n_slots, std::uint64_t seed) {
    if (!(p_bar > 0.0 && p_bar < 1.0)) throw DomainError("p_bar must lie in (0,1)");
    if (N < 2) throw InvalidParams("slot events need N >= 2");
    Rng rng(seed);
    std::vector<int> out(n_slots, 0);
    for (auto& successes : out) {
        for (;;) {
            int attempts = 0;
            for (int n = 0; n < N; ++n) attempts += rng.uniform() < p_bar;
            if (attempts == 0) break;
            if (attempts == 1) ++successes;
        }
    }
    return out;
}

}  // namespace backoff
