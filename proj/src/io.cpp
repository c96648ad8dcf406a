#include "backoff/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "backoff/errors.hpp"

namespace backoff::io {

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

template <class T>
T parse_field(std::string_view s, const fs::path& path, std::size_t line) {
    T v{};
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw IoError(path.string() + ":" + std::to_string(line) + ": bad field \"" + std::string(s) + "\"");
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

json to_json(const ProtocolParams& p) {
    json j;
    j["m"] = p.m;
    j["cw0"] = 2.0 * p.b0;
    j["K"] = p.K.str();
    j["N"] = p.N;
    return j;
}

ProtocolParams params_from_json(const json& j) {
    ProtocolParams p;
    p.m = j.at("m").get<double>();
    p.b0 = 0.5 * j.at("cw0").get<double>();
    const auto& k = j.at("K");
    p.K = k.is_string() ? MaxStage::parse(k.get<std::string>()) : MaxStage(k.get<int>());
    p.N = j.at("N").get<int>();
    return p;
}

fs::path sidecar_path(const fs::path& csv) {
    fs::path p = csv;
    p.replace_extension(".json");
    return p;
}

json trace_metadata(const Trace& t) {
    json j;
    j["params"] = to_json(t.params);
    j["seed"] = t.seed;
    j["mode"] = to_string(t.mode);
    j["horizon"] = t.horizon;
    j["realized_gamma"] = t.realized_gamma;
    j["attempts"] = t.attempts;
    j["collisions"] = t.collisions;
    j["drops"] = t.drops;
    j["arrivals"] = t.total_arrivals();
    return j;
}

void write_trace(const Trace& t, const fs::path& csv) {
    std::vector<std::pair<double, int>> rows;
    rows.reserve(t.total_arrivals());
    for (std::size_t n = 0; n < t.arrivals_per_node.size(); ++n)
        for (double a : t.arrivals_per_node[n]) rows.emplace_back(a, static_cast<int>(n));
    std::sort(rows.begin(), rows.end());

    auto out = open_out(csv);
    std::string buf = "node_id,arrival_time_slots\n";
    for (const auto& [time, node] : rows) {
        buf += std::to_string(node);
        buf += ',';
        buf += format_double(time);
        buf += '\n';
        if (buf.size() > (1u << 20)) {
            out << buf;
            buf.clear();
        }
    }
    out << buf;
    finish(out, csv);
    write_json(trace_metadata(t), sidecar_path(csv));
}

Trace read_trace(const fs::path& csv) {
    auto in = open_in(csv);
    std::string line;
    if (!std::getline(in, line) || line.rfind("node_id,arrival_time_slots", 0) != 0)
        throw IoError(csv.string() + ": expected header node_id,arrival_time_slots");
    Trace t;
    double last = 0.0;
    for (std::size_t ln = 2; std::getline(in, line); ++ln) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw IoError(csv.string() + ":" + std::to_string(ln) + ": missing comma");
        const std::string_view sv(line);
        const int node = parse_field<int>(sv.substr(0, comma), csv, ln);
        const double time = parse_field<double>(sv.substr(comma + 1), csv, ln);
        if (node < 0) throw IoError(csv.string() + ":" + std::to_string(ln) + ": negative node id");
        if (static_cast<std::size_t>(node) >= t.arrivals_per_node.size()) t.arrivals_per_node.resize(node + 1);
        t.arrivals_per_node[node].push_back(time);
        last = std::max(last, time);
    }
    for (auto& a : t.arrivals_per_node) std::sort(a.begin(), a.end());
    t.horizon = last;
    t.params.N = static_cast<int>(t.arrivals_per_node.size());

    const fs::path meta = sidecar_path(csv);
    if (fs::exists(meta)) {
        const json j = read_json(meta);
        t.params = params_from_json(j.at("params"));
        t.seed = j.value("seed", std::uint64_t{0});
        t.mode = parse_trace_mode(j.value("mode", std::string("renewal")));
        t.horizon = j.value("horizon", last);
        t.realized_gamma = j.value("realized_gamma", 0.0);
        t.attempts = j.value("attempts", std::uint64_t{0});
        t.collisions = j.value("collisions", std::uint64_t{0});
        t.drops = j.value("drops", std::uint64_t{0});
        if (t.arrivals_per_node.size() < static_cast<std::size_t>(t.params.N))
            t.arrivals_per_node.resize(t.params.N);
    }
    return t;
}

void write_density_csv(const DensityGrid& d, const fs::path& path) {
    auto out = open_out(path);
    out << "x,f\n";
    for (std::size_t i = 0; i < d.x.size(); ++i) out << format_double(d.x[i]) << ',' << format_double(d.f[i]) << '\n';
    finish(out, path);
}

void write_logscale_csv(const LogscaleDiagram& d, const fs::path& path) {
    auto out = open_out(path);
    out << "j,y_j,ci,n_j\n";
    for (std::size_t i = 0; i < d.octaves.size(); ++i) {
        out << d.octaves[i] << ',' << format_double(d.y[i]) << ',' << format_double(d.ci_halfwidth[i]) << ','
            << format_double(d.n_coeffs[i]) << '\n';
    }
    finish(out, path);
}

void write_pmf_csv(const std::vector<PmfPoint>& pmf, const fs::path& path) {
    auto out = open_out(path);
    out << "z,probability,accuracy_estimate\n";
    for (const auto& p : pmf)
        out << p.z << ',' << format_double(p.probability) << ',' << format_double(p.accuracy_estimate) << '\n';
    finish(out, path);
}

json pmf_json(const std::vector<PmfPoint>& pmf) {
    json arr = json::array();
    for (const auto& p : pmf)
        arr.push_back({{"z", p.z}, {"probability", p.probability}, {"accuracy_estimate", p.accuracy_estimate}});
    return arr;
}

void write_json(const json& j, const fs::path& path) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    finish(out, path);
}

json read_json(const fs::path& path) {
    auto in = open_in(path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

}  // namespace backoff::io
