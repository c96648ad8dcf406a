#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "backoff/params.hpp"
#include "backoff/rng.hpp"

namespace backoff {

enum class TraceMode { slot_level, renewal };
enum class CounterMode { discrete, continuous };

std::string to_string(TraceMode m);
std::string to_string(CounterMode m);
TraceMode parse_trace_mode(const std::string& s);
CounterMode parse_counter_mode(const std::string& s);

struct Trace {
    ProtocolParams params;
    double horizon = 0.0;
    std::vector<std::vector<double>> arrivals_per_node;
    std::vector<std::vector<double>> omega_samples;
    double realized_gamma = 0.0;
    std::uint64_t seed = 0;
    TraceMode mode = TraceMode::renewal;
    // Slot-level bookkeeping; zero in renewal mode.
    std::uint64_t attempts = 0;
    std::uint64_t collisions = 0;
    std::uint64_t drops = 0;

    std::size_t total_arrivals() const;
    std::vector<double> merged_arrivals() const;
};

// Draws Omega: kappa from the stage-reach law, then kappa+1 continuous stage uniforms.
class OmegaSampler {
public:
    OmegaSampler(double gamma, const ProtocolParams& p);
    double operator()(Rng& rng) const;
    // Draw from the equilibrium (residual-life) law of Omega.
    double residual(Rng& rng) const;

private:
    int draw_kappa(Rng& rng, int from) const;
    double gamma_;
    double log_gamma_;
    ProtocolParams p_;
    int kmax_;
    std::vector<double> window_;
    std::vector<double> phi_cdf_;
};

std::vector<double> sample_per_packet_backoff(double gamma, const ProtocolParams& p, std::size_t n,
                                              std::uint64_t seed);

Trace simulate_cell(const ProtocolParams& p, double horizon_slots, std::uint64_t seed,
                    CounterMode counter_mode = CounterMode::continuous);

Trace build_renewal_superposition(double gamma, const ProtocolParams& p, int N, double horizon,
                                  std::uint64_t seed);

// Same counts as count_process(build_renewal_superposition(...), window) with
// horizon = window * n_windows, without materializing the trace.
std::vector<std::uint32_t> renewal_count_series(double gamma, const ProtocolParams& p, int N,
                                                double window, std::size_t n_windows,
                                                std::uint64_t seed);

std::vector<double> inter_transmission_counts(const Trace& trace, int tagged, int zeta);

std::vector<std::uint64_t> count_process(const Trace& trace, double window);

// Per-slot success counts when each of N nodes attempts with probability p_bar in every
// contention round and the slot is reused after every success or collision.
std::vector<int> simulate_slot_events(double p_bar, int N, std::size_t n_slots, std::uint64_t seed);

}  // namespace backoff
