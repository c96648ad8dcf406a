#include "backoff/params.hpp"

#include <cmath>

#include "backoff/errors.hpp"

namespace backoff {

MaxStage MaxStage::parse(const std::string& s) {
    if (s == "inf" || s == "Inf" || s == "infinite") return infinite();
    std::size_t pos = 0;
    int k = 0;
    try {
        k = std::stoi(s, &pos);
    } catch (const std::exception&) {
        throw InvalidParams("K must be a non-negative integer or \"inf\", got \"" + s + "\"");
    }
    if (pos != s.size() || k < 0)
        throw InvalidParams("K must be a non-negative integer or \"inf\", got \"" + s + "\"");
    return MaxStage(k);
}

double ProtocolParams::b(int k) const { return b0 * std::pow(m, k); }

double ProtocolParams::q(int k) const { return 2.0 / (2.0 * b(k) - 1.0); }

void ProtocolParams::validate() const {
    if (!(m > 1.0) || !std::isfinite(m)) throw InvalidParams("m must be > 1");
    if (!(b0 >= 1.0) || !std::isfinite(b0)) throw InvalidParams("b0 must be >= 1");
    if (!K.is_infinite() && K.value() < 0) throw InvalidParams("K must be >= 0");
    if (N < 1) throw InvalidParams("N must be >= 1");
}

StageVariance parse_stage_variance(const std::string& s) {
    if (s == "discrete") return StageVariance::discrete;
    if (s == "continuous") return StageVariance::continuous;
    throw InvalidParams("stage variance mode must be discrete or continuous, got \"" + s + "\"");
}

std::string to_string(StageVariance v) {
    return v == StageVariance::discrete ? "discrete" : "continuous";
}

}  // namespace backoff
