#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "backoff/fairness.hpp"
#include "backoff/moments.hpp"
#include "backoff/params.hpp"
#include "backoff/simulator.hpp"
#include "backoff/wavelet.hpp"

namespace backoff::io {

namespace fs = std::filesystem;
using nlohmann::json;

// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

json to_json(const ProtocolParams& p);
ProtocolParams params_from_json(const json& j);

json trace_metadata(const Trace& t);
// Writes `csv` (node_id,arrival_time_slots, time-ordered) and its sidecar sidecar_path(csv).
void write_trace(const Trace& t, const fs::path& csv);
// Restores per-node arrivals and, when the sidecar exists, params, seed, mode and counters.
Trace read_trace(const fs::path& csv);
fs::path sidecar_path(const fs::path& csv);

void write_density_csv(const DensityGrid& d, const fs::path& path);
void write_logscale_csv(const LogscaleDiagram& d, const fs::path& path);
void write_pmf_csv(const std::vector<PmfPoint>& pmf, const fs::path& path);
json pmf_json(const std::vector<PmfPoint>& pmf);

void write_json(const json& j, const fs::path& path);
json read_json(const fs::path& path);

}  // namespace backoff::io
