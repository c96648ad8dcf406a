#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "backoff/errors.hpp"
#include "backoff/estimators.hpp"
#include "backoff/fairness.hpp"
#include "backoff/fpe.hpp"
#include "backoff/io.hpp"
#include "backoff/moments.hpp"
#include "backoff/parallel.hpp"
#include "backoff/simulator.hpp"
#include "backoff/stats.hpp"
#include "backoff/wavelet.hpp"

namespace backoff::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Kind { real, integer, text, flag };

struct Field {
    std::string name;
    Kind kind;
    json def;  // null: required unless optional
    std::string help;
    bool optional = false;
};

Field required(std::string name, Kind k, std::string help) { return {std::move(name), k, nullptr, std::move(help)}; }
Field opt(std::string name, Kind k, json def, std::string help) { return {std::move(name), k, std::move(def), std::move(help), true}; }

struct Output {
    fs::path dir;
    unsigned threads = 1;
    std::vector<std::string> files;

    fs::path file(const std::string& name) {
        files.push_back(name);
        return dir / name;
    }
};

using Runner = std::function<json(const json& cfg, Output& out)>;

struct Command {
    std::string name;
    CLI::App* app = nullptr;
    std::vector<Field> fields;
    std::vector<std::string> raw;
    std::vector<CLI::Option*> opts;
    Runner run;
    std::string config_path, out_dir;
    unsigned threads = 0;
};

std::vector<Field> protocol_fields() {
    return {required("m", Kind::real, "window growth factor m"),
            required("cw0", Kind::real, "initial contention window 2 b0"),
            required("K", Kind::text, "highest backoff stage (integer or inf)"),
            required("N", Kind::integer, "number of nodes")};
}

ProtocolParams protocol(const json& c) {
    ProtocolParams p;
    p.m = c.at("m").get<double>();
    p.b0 = 0.5 * c.at("cw0").get<double>();
    p.K = MaxStage::parse(c.at("K").get<std::string>());
    p.N = static_cast<int>(c.at("N").get<long long>());
    p.validate();
    return p;
}

json parse_raw(const Field& f, const std::string& raw) {
    try {
        std::size_t used = 0;
        switch (f.kind) {
        case Kind::real: {
            const double v = std::stod(raw, &used);
            if (used != raw.size()) break;
            return v;
        }
        case Kind::integer: {
            const long long v = std::stoll(raw, &used);
            if (used != raw.size()) break;
            return v;
        }
        case Kind::text: return raw;
        case Kind::flag: return true;
        }
    } catch (const std::exception&) {
    }
    throw UsageError("--" + f.name + ": cannot parse \"" + raw + "\"");
}

json resolve(const Command& cmd) {
    json cfg = json::object();
    for (const Field& f : cmd.fields) cfg[f.name] = f.def;
    if (!cmd.config_path.empty()) {
        json file = io::read_json(cmd.config_path);
        if (file.contains("config")) file = file["config"];
        if (file.contains("command") && file["command"] != cmd.name)
            throw UsageError("config file is for command \"" + file["command"].get<std::string>() + "\"");
        for (const Field& f : cmd.fields)
            if (file.contains(f.name)) cfg[f.name] = file[f.name];
    }
    for (std::size_t i = 0; i < cmd.fields.size(); ++i)
        if (cmd.opts[i]->count() > 0) cfg[cmd.fields[i].name] = parse_raw(cmd.fields[i], cmd.raw[i]);
    for (const Field& f : cmd.fields)
        if (cfg[f.name].is_null() && !f.optional) throw UsageError("missing required option --" + f.name);
    cfg["command"] = cmd.name;
    return cfg;
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    localtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y%m%d-%H%M%S");
    return os.str();
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) {
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw UsageError("bad list entry \"" + item + "\"");
        }
    }
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------- fpe

json cmd_fpe(const json& c, Output& out) {
    const ProtocolParams p = protocol(c);
    const FixedPointSolution s = solve_fixed_point(p, c["tol"].get<double>());
    json r;
    r["gamma"] = s.gamma;
    r["p_bar"] = s.p_bar;
    r["alpha"] = number_or_null(s.alpha);
    r["phi"] = s.phi;
    r["residual"] = s.residual;
    r["iterations"] = s.iterations;
    io::write_json(r, out.file("fpe.json"));
    return r;
}

// ---------------------------------------------------------------- moments

json cmd_moments(const json& c, Output& out) {
    const ProtocolParams base = protocol(c);
    const std::string sweep = c["sweep"].get<std::string>();
    const StageVariance mode = parse_stage_variance(c["variance"].get<std::string>());
    std::vector<ProtocolParams> points;
    if (sweep.empty()) {
        points.push_back(base);
    } else {
        const auto values = parse_list(c["values"].get<std::string>());
        if (values.empty()) throw UsageError("--sweep needs --values");
        for (double v : values) {
            ProtocolParams p = base;
            if (sweep == "N") p.N = static_cast<int>(v);
            else if (sweep == "K") p.K = MaxStage(static_cast<int>(v));
            else throw UsageError("--sweep must be N or K");
            p.validate();
            points.push_back(p);
        }
    }

    json rows = json::array();
    std::ostringstream csv;
    csv << "N,K,gamma,p_bar,alpha,mean,cv\n";
    for (const ProtocolParams& p : points) {
        const FixedPointSolution s = solve_fixed_point(p);
        const BackoffStats st = backoff_stats(s.gamma, p, mode);
        const std::string label = "K" + p.K.str() + "_N" + std::to_string(p.N);
        json row{{"N", p.N}, {"K", p.K.str()}, {"gamma", s.gamma}, {"p_bar", s.p_bar},
                 {"alpha", number_or_null(s.alpha)}, {"mean", st.mean}, {"cv", number_or_null(st.cv)}};
        csv << p.N << ',' << p.K.str() << ',' << io::format_double(s.gamma) << ',' << io::format_double(s.p_bar) << ','
            << io::format_double(s.alpha) << ',' << io::format_double(st.mean) << ',' << io::format_double(st.cv)
            << '\n';
        if (c["ccdf"].get<bool>() || c["density"].get<bool>()) {
            GridSpec g;
            g.cell_width = c["cell"].get<double>();
            const DensityGrid d = pdf_backoff(s.gamma, p, g);
            if (c["density"].get<bool>()) {
                io::write_density_csv(d, out.file("density_" + label + ".csv"));
                row["density_file"] = "density_" + label + ".csv";
            }
            if (c["ccdf"].get<bool>()) {
                const auto tab = ccdf_table(d);
                Ccdf cc{d.x, tab};
                const Ccdf thin = thin_log(cc, 400);
                std::ostringstream f;
                f << "x,ccdf\n";
                for (std::size_t i = 0; i < thin.x.size(); ++i)
                    if (thin.p[i] > 0.0) f << io::format_double(thin.x[i]) << ',' << io::format_double(thin.p[i]) << '\n';
                write_text(out.file("ccdf_" + label + ".csv"), f.str());
                row["ccdf_file"] = "ccdf_" + label + ".csv";
            }
        }
        rows.push_back(row);
    }
    write_text(out.file("curve.csv"), csv.str());
    return json{{"rows", rows}};
}

// ---------------------------------------------------------------- simulate

json cmd_simulate(const json& c, Output& out) {
    const ProtocolParams p = protocol(c);
    const TraceMode mode = parse_trace_mode(c["mode"].get<std::string>());
    const CounterMode counter = parse_counter_mode(c["counter"].get<std::string>());
    const double horizon = c["horizon"].get<double>();
    const auto reps = c["replicates"].get<long long>();
    const auto seed = c["seed"].get<std::uint64_t>();
    if (reps < 1) throw UsageError("--replicates must be >= 1");
    if (!(horizon > 0.0)) throw UsageError("--horizon must be positive");
    const double gamma_star = solve_fixed_point(p).gamma;
    const double gamma = c["gamma"].is_null() ? gamma_star : c["gamma"].get<double>();

    std::vector<std::string> names;
    for (long long r = 0; r < reps; ++r) {
        std::ostringstream os;
        os << "trace_" << std::setw(3) << std::setfill('0') << r << ".csv";
        names.push_back(os.str());
        out.files.push_back(names.back());
        out.files.push_back(io::sidecar_path(names.back()).string());
    }
    const auto rows = parallel_map(static_cast<std::size_t>(reps), out.threads, [&](std::size_t r) {
        const std::uint64_t s = derive_seed(seed, r);
        Trace t = mode == TraceMode::renewal ? build_renewal_superposition(gamma, p, p.N, horizon, s)
                                             : simulate_cell(p, horizon, s, counter);
        io::write_trace(t, out.dir / names[r]);
        return json{{"replicate", r},          {"file", names[r]},           {"seed", s},
                    {"arrivals", t.total_arrivals()}, {"realized_gamma", t.realized_gamma},
                    {"attempts", t.attempts},  {"collisions", t.collisions}, {"drops", t.drops}};
    });
    return json{{"gamma_star", gamma_star}, {"gamma", gamma}, {"replicates", rows}};
}

// ---------------------------------------------------------------- fairness

std::vector<long> auto_grid(const FairnessSpec& s, FairnessRegime regime) {
    std::vector<long> z;
    const double mean = (s.N - 1) * s.zeta;
    if (regime == FairnessRegime::gaussian) {
        const GaussianMoments g = gaussian_moments(s);
        for (long v = std::max(0L, std::lround(g.mean - 6 * g.sd)); v <= std::lround(g.mean + 6 * g.sd); ++v) z.push_back(v);
        return z;
    }
    const long step = std::max(1L, std::lround(mean / 100.0));
    for (long v = 0; v < std::lround(3 * mean); v += step) z.push_back(v);
    for (double v = 3 * mean; v <= 100 * mean; v *= 1.1) z.push_back(std::lround(v));
    return z;
}

json cmd_fairness(const json& c, Output& out) {
    const ProtocolParams p = protocol(c);
    const double zeta = c["zeta"].get<double>();
    const StageVariance vmode = parse_stage_variance(c["variance"].get<std::string>());
    const auto seed = c["seed"].get<std::uint64_t>();
    FairnessSpec spec = make_fairness_spec(p, zeta, c["ell"].is_null() ? 0.0 : c["ell"].get<double>(), vmode);
    const std::string rname = c["regime"].get<std::string>();
    FairnessRegime regime = spec.regime;
    if (rname == "gaussian") regime = FairnessRegime::gaussian;
    else if (rname == "stable") regime = FairnessRegime::stable;
    else if (rname != "auto") throw UsageError("--regime must be auto, gaussian or stable");

    json result;
    result["warnings"] = regime_warnings(spec, regime);
    for (const auto& w : result["warnings"]) std::cerr << "warning: " << w.get<std::string>() << '\n';

    if (regime == FairnessRegime::stable && spec.ell <= 0.0) {
        const double gamma = solve_fixed_point(p).gamma;
        const auto n = static_cast<std::size_t>(c["ell_samples"].get<long long>());
        const EllEstimate e =
            estimate_ell_from_samples(sample_per_packet_backoff(gamma, p, n, derive_seed(seed, 0)), spec.alpha, spec.omega_bar);
        spec = make_fairness_spec(p, zeta, e.ell, vmode);
        result["ell_fit"] = {{"ell", e.ell}, {"ell0", e.ell0}, {"r2", e.r2}, {"samples", n}};
    }
    result["regime"] = to_string(regime);
    result["spec"] = {{"N", spec.N},
                      {"zeta", spec.zeta},
                      {"alpha", number_or_null(spec.alpha)},
                      {"v_omega", number_or_null(spec.v_omega)},
                      {"omega_bar", spec.omega_bar},
                      {"ell", spec.ell},
                      {"ell0", spec.ell0},
                      {"c", spec.c}};

    std::vector<long> grid;
    if (!c["z_min"].is_null() || !c["z_max"].is_null() || !c["z_step"].is_null()) {
        if (c["z_min"].is_null() || c["z_max"].is_null()) throw UsageError("--z-min and --z-max go together");
        const long lo = c["z_min"].get<long>(), hi = c["z_max"].get<long>();
        const long step = c["z_step"].is_null() ? 1 : c["z_step"].get<long>();
        if (step < 1 || hi < lo) throw UsageError("bad z grid");
        for (long z = lo; z <= hi; z += step) grid.push_back(z);
    } else {
        grid = auto_grid(spec, regime);
    }

    std::unique_ptr<HeavyInterTx> heavy;
    if (regime == FairnessRegime::stable) heavy = std::make_unique<HeavyInterTx>(spec);
    const auto pmf = parallel_map(grid.size(), out.threads, [&](std::size_t i) {
        return heavy ? heavy->pmf(grid[i]) : PmfPoint{grid[i], gaussian_inter_tx(grid[i], spec), 1e-15};
    });
    io::write_pmf_csv(pmf, out.file("pmf.csv"));
    io::write_json(io::pmf_json(pmf), out.file("pmf.json"));

    // Trapezoid over the grid plus the mass beyond its last point.
    double norm = pmf.size() == 1 ? pmf[0].probability : 0.0;
    for (std::size_t i = 1; i < pmf.size(); ++i)
        norm += 0.5 * (pmf[i].probability + pmf[i - 1].probability) * (pmf[i].z - pmf[i - 1].z);
    if (pmf.size() > 1) norm += 0.5 * (pmf.front().probability + pmf.back().probability);
    norm += heavy ? heavy->ccdf(grid.back()).probability
                  : gaussian_inter_tx_mass(grid.back() + 1, std::numeric_limits<long>::max() / 2, spec);
    std::size_t best = 0;
    for (std::size_t i = 1; i < pmf.size(); ++i)
        if (pmf[i].probability > pmf[best].probability) best = i;
    result["mean"] = (spec.N - 1) * spec.zeta;
    result["mode"] = pmf[best].z;
    result["normalization"] = norm;
    result["points"] = pmf.size();

    if (!c["trace"].get<std::string>().empty()) {
        const Trace t = io::read_trace(c["trace"].get<std::string>());
        std::vector<double> z;
        for (int n = 0; n < static_cast<int>(t.arrivals_per_node.size()); ++n) {
            try {
                const auto zn = inter_transmission_counts(t, n, static_cast<int>(std::lround(zeta)));
                z.insert(z.end(), zn.begin(), zn.end());
            } catch (const InsufficientTrace&) {
            }
        }
        if (z.empty()) throw InsufficientTrace("trace holds no complete window of zeta packets");
        const double mean = (spec.N - 1) * spec.zeta;
        long lo, hi, bin;
        std::function<double(long, long)> mass;
        if (heavy) {
            const double scale = heavy->levy_limit().sigma;
            bin = std::max(1L, std::lround(scale / 2.0));
            lo = 0;
            hi = std::lround(mean + 20 * scale);
            mass = [&](long a, long b) {
                return std::max(0.0, heavy->ccdf(a - 1).probability - heavy->ccdf(b).probability);
            };
        } else {
            const GaussianMoments g = gaussian_moments(spec);
            bin = std::max(1L, std::lround(g.sd / 4.0));
            lo = std::lround(g.mean - 5 * g.sd);
            hi = std::lround(g.mean + 5 * g.sd);
            mass = [&](long a, long b) { return gaussian_inter_tx_mass(a, b, spec); };
        }
        std::ostringstream h;
        h << "z_lo,z_hi,empirical,model\n";
        for (long a = lo; a <= hi; a += bin) {
            const long b = a + bin - 1;
            const auto count = std::count_if(z.begin(), z.end(), [&](double v) {
                const long r = std::lround(v);
                return r >= a && r <= b;
            });
            h << a << ',' << b << ',' << io::format_double(static_cast<double>(count) / z.size()) << ','
              << io::format_double(mass(a, b)) << '\n';
        }
        write_text(out.file("histogram.csv"), h.str());
        result["windows"] = z.size();
        result["total_variation"] = binned_total_variation(z, mass, lo, hi, bin);
        result["empirical_mean"] = mean_of(z);
        result["empirical_variance"] = z.size() > 1 ? variance_of(z) : 0.0;
    }
    return result;
}

// ---------------------------------------------------------------- wavelet

std::vector<double> read_series(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<double> x;
    std::string line;
    for (std::size_t ln = 1; std::getline(in, line); ++ln) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string cell = line.substr(line.rfind(',') == std::string::npos ? 0 : line.rfind(',') + 1);
        try {
            std::size_t used = 0;
            const double v = std::stod(cell, &used);
            if (used != cell.size()) throw std::invalid_argument(cell);
            x.push_back(v);
        } catch (const std::exception&) {
            if (ln != 1) throw IoError(path.string() + ":" + std::to_string(ln) + ": bad value");
        }
    }
    return x;
}

json cmd_wavelet(const json& c, Output& out) {
    const std::string trace_path = c["trace"].get<std::string>(), series_path = c["series"].get<std::string>();
    if (trace_path.empty() == series_path.empty()) throw UsageError("give exactly one of --trace or --series");
    json result;
    std::vector<double> x;
    if (!series_path.empty()) {
        x = read_series(series_path);
    } else {
        const Trace t = io::read_trace(trace_path);
        double window = 0.0;
        if (!c["window"].is_null()) {
            window = c["window"].get<double>();
        } else if (fs::exists(io::sidecar_path(trace_path))) {
            const double gamma = solve_fixed_point(t.params).gamma;
            window = 16.0 * mean_backoff(gamma, t.params) / t.params.N;
        } else {
            if (t.total_arrivals() == 0) throw InsufficientTrace("empty trace");
            window = 16.0 * t.horizon / static_cast<double>(t.total_arrivals());
        }
        if (!(window > 0.0)) throw UsageError("--window must be positive");
        for (auto v : count_process(t, window)) x.push_back(static_cast<double>(v));
        result["window"] = window;
    }
    const int M = static_cast<int>(c["M"].get<long long>());
    const LogscaleDiagram d = logscale_diagram(x, M);
    int j1, j2;
    if (c["j1"].is_null() != c["j2"].is_null()) throw UsageError("--j1 and --j2 go together");
    if (c["j1"].is_null()) {
        const AlignmentRange a = suggest_alignment(d, static_cast<int>(c["min_octaves"].get<long long>()));
        j1 = a.j1;
        j2 = a.j2;
    } else {
        j1 = static_cast<int>(c["j1"].get<long long>());
        j2 = static_cast<int>(c["j2"].get<long long>());
    }
    const HurstEstimate h = hurst_estimate(d, j1, j2);
    io::write_logscale_csv(d, out.file("logscale.csv"));
    result["n_samples"] = x.size();
    result["hurst"] = h.hurst;
    result["slope"] = h.slope;
    result["slope_se"] = h.slope_se;
    result["j1"] = h.j1;
    result["j2"] = h.j2;
    result["chi2"] = h.chi2;
    result["alignment_pvalue"] = h.alignment_pvalue;
    result["alignment_rejected"] = h.alignment_rejected;
    io::write_json(result, out.file("hurst.json"));
    return result;
}

// ---------------------------------------------------------------- driver

void add_command(CLI::App& app, std::vector<Command>& cmds, std::string name, std::string desc,
                 std::vector<Field> fields, Runner run) {
    Command cmd;
    cmd.name = name;
    cmd.app = app.add_subcommand(name, desc);
    cmd.fields = std::move(fields);
    cmd.run = std::move(run);
    cmds.push_back(std::move(cmd));
}

const char* type_label(Kind k) {
    switch (k) {
    case Kind::real: return "FLOAT";
    case Kind::integer: return "INT";
    default: return "TEXT";
    }
}

void bind(Command& cmd) {
    cmd.raw.assign(cmd.fields.size(), "");
    for (std::size_t i = 0; i < cmd.fields.size(); ++i) {
        const Field& f = cmd.fields[i];
        std::string flag = "--" + f.name;
        std::replace(flag.begin() + 2, flag.end(), '_', '-');
        std::string help = f.help;
        if (!f.def.is_null() && f.def != "" && f.kind != Kind::flag) help += " [default: " + (f.def.is_string() ? f.def.get<std::string>() : f.def.dump()) + "]";
        if (f.kind == Kind::flag) cmd.opts.push_back(cmd.app->add_flag(flag)->description(help));
        else cmd.opts.push_back(cmd.app->add_option(flag, cmd.raw[i], help)->type_name(type_label(f.kind)));
    }
    cmd.app->add_option("--config", cmd.config_path, "JSON config to replay (flags override its values)");
    cmd.app->add_option("--out", cmd.out_dir, "output directory [default: out/<timestamp>]");
    cmd.app->add_option("--threads", cmd.threads, "worker threads [default: hardware concurrency]");
}

std::vector<Field> with_protocol(std::vector<Field> extra) {
    auto f = protocol_fields();
    f.insert(f.end(), extra.begin(), extra.end());
    return f;
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"Backoff analysis toolkit: fixed point, backoff moments, simulation, fairness and wavelet LRD"};
    app.require_subcommand(1);
    std::vector<Command> cmds;
    cmds.reserve(5);

    add_command(app, cmds, "fpe", "solve the collision-probability fixed point",
                with_protocol({opt("tol", Kind::real, 1e-10, "fixed-point tolerance")}), cmd_fpe);
    add_command(app, cmds, "moments", "per-packet backoff mean, CV, density and ccdf",
                with_protocol({opt("sweep", Kind::text, "", "sweep over N or K"),
                               opt("values", Kind::text, "", "comma-separated sweep values"),
                               opt("variance", Kind::text, "discrete", "stage variance: discrete or continuous"),
                               opt("ccdf", Kind::flag, false, "write log-spaced ccdf files"),
                               opt("density", Kind::flag, false, "write density grid files"),
                               opt("cell", Kind::real, 0.25, "density grid cell width")}),
                cmd_moments);
    add_command(app, cmds, "simulate", "generate backoff traces",
                with_protocol({opt("mode", Kind::text, "renewal", "renewal or slot_level"),
                               opt("horizon", Kind::real, 1e6, "horizon in slots"),
                               opt("replicates", Kind::integer, 1, "number of replicates"),
                               opt("counter", Kind::text, "continuous", "slot-level counters: continuous or discrete"),
                               opt("gamma", Kind::real, nullptr, "collision probability for renewal mode [default: fixed point]"),
                               opt("seed", Kind::integer, 1, "base seed")}),
                cmd_simulate);
    add_command(app, cmds, "fairness", "inter-transmission probability P[Z = z | zeta]",
                with_protocol({opt("zeta", Kind::real, 100.0, "tagged node successes"),
                               opt("regime", Kind::text, "auto", "auto, gaussian or stable"),
                               opt("ell", Kind::real, nullptr, "tail constant ell [default: fitted from samples]"),
                               opt("ell_samples", Kind::integer, 1000000, "Omega samples for the ell fit"),
                               opt("variance", Kind::text, "continuous", "stage variance for v_Omega"),
                               opt("z_min", Kind::integer, nullptr, "first z of the pmf grid"),
                               opt("z_max", Kind::integer, nullptr, "last z of the pmf grid"),
                               opt("z_step", Kind::integer, nullptr, "pmf grid step"),
                               opt("trace", Kind::text, "", "trace CSV for an empirical histogram"),
                               opt("seed", Kind::integer, 1, "seed for the ell fit")}),
                cmd_fairness);
    add_command(app, cmds, "wavelet", "logscale diagram and Hurst estimate",
                {opt("trace", Kind::text, "", "trace CSV"), opt("series", Kind::text, "", "CSV series (last column)"),
                 opt("window", Kind::real, nullptr, "count window in slots [default: 16 omega_bar / N]"),
                 opt("M", Kind::integer, 2, "Daubechies vanishing moments"),
                 opt("j1", Kind::integer, nullptr, "first octave of the fit"),
                 opt("j2", Kind::integer, nullptr, "last octave of the fit"),
                 opt("min_octaves", Kind::integer, 3, "shortest alignment range when scanning")},
                cmd_wavelet);
    for (auto& c : cmds) bind(c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    for (auto& cmd : cmds) {
        if (!cmd.app->parsed()) continue;
        try {
            const json cfg = resolve(cmd);
            Output out;
            out.dir = cmd.out_dir.empty() ? fs::path("out") / timestamp() : fs::path(cmd.out_dir);
            fs::create_directories(out.dir);
            out.threads = cmd.threads > 0 ? cmd.threads : std::max(1u, std::thread::hardware_concurrency());
            io::write_json(cfg, out.dir / "config.json");
            json result = cmd.run(cfg, out);
            json report{{"command", cmd.name}, {"config", cfg}, {"result", result}, {"output_dir", out.dir.string()}};
            report["files"] = out.files;
            io::write_json(report, out.dir / "result.json");
            std::cout << report.dump(2) << '\n';
            return 0;
        } catch (const UsageError& e) {
            std::cerr << "usage error: " << e.what() << "\n\n" << cmd.app->help();
            return 2;
        } catch (const InvalidParams& e) {
            std::cerr << "invalid parameters: " << e.what() << '\n';
            return 2;
        } catch (const DomainError& e) {
            std::cerr << "invalid parameters: " << e.what() << '\n';
            return 2;
        } catch (const IoError& e) {
            std::cerr << "i/o error: " << e.what() << '\n';
            return 1;
        } catch (const fs::filesystem_error& e) {
            std::cerr << "i/o error: " << e.what() << '\n';
            return 1;
        } catch (const Error& e) {
            std::cerr << "numeric failure: " << e.what() << '\n';
            return 3;
        } catch (const nlohmann::json::exception& e) {
            std::cerr << "usage error: bad config value: " << e.what() << '\n';
            return 2;
        }
    }
    return 2;
}

}  // namespace backoff::cli
