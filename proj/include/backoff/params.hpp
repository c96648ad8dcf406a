#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>

namespace backoff {

// Highest backoff stage: a finite index or the symbolic infinite stage count.
class MaxStage {
public:
    constexpr MaxStage() = default;
    constexpr explicit MaxStage(int k) : k_(k) {}
    static constexpr MaxStage infinite() { return MaxStage(kInfinite); }

    constexpr bool is_infinite() const { return k_ == kInfinite; }
    constexpr int value() const { return k_; }

    std::string str() const { return is_infinite() ? "inf" : std::to_string(k_); }
    static MaxStage parse(const std::string& s);

    friend constexpr bool operator==(MaxStage, MaxStage) = default;

private:
    static constexpr int kInfinite = std::numeric_limits<int>::max();
    int k_ = 0;
};

struct ProtocolParams {
    double m = 2.0;
    double b0 = 16.0;
    MaxStage K{6};
    int N = 1;

    static ProtocolParams dot11b(MaxStage K, int N) { return {2.0, 16.0, K, N}; }
    static ProtocolParams dot11ag(MaxStage K, int N) { return {2.0, 8.0, K, N}; }

    // b_k = b0 m^k
    double b(int k) const;
    // q_k = 2 / (2 b_k - 1)
    double q(int k) const;
    // 1/q_k = b_k - 1/2, the stage-k mean backoff
    double inv_q(int k) const { return b(k) - 0.5; }
    // Contention window width 2 b_k - 1
    double window(int k) const { return 2.0 * b(k) - 1.0; }

    // Throws InvalidParams.
    void validate() const;
};

enum class StageVariance { discrete, continuous };

StageVariance parse_stage_variance(const std::string& s);
std::string to_string(StageVariance v);

}  // namespace backoff
