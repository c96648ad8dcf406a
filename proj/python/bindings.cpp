#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>
#include <variant>

#include "backoff/errors.hpp"
#include "backoff/fairness.hpp"
#include "backoff/fpe.hpp"
#include "backoff/moments.hpp"
#include "backoff/simulator.hpp"
#include "backoff/wavelet.hpp"

namespace py = pybind11;
using namespace backoff;

namespace {

using StageArg = std::variant<int, std::string>;

MaxStage to_stage(const StageArg& k) {
    if (std::holds_alternative<int>(k)) {
        if (std::get<int>(k) < 0) throw InvalidParams("K must be >= 0");
        return MaxStage(std::get<int>(k));
    }
    return MaxStage::parse(std::get<std::string>(k));
}

ProtocolParams make_params(double m, double cw0, const StageArg& K, int N) {
    ProtocolParams p{m, 0.5 * cw0, to_stage(K), N};
    p.validate();
    return p;
}

py::array_t<double> as_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

}  // namespace

PYBIND11_MODULE(_backoff, m) {
    m.doc() = "Exponential backoff analysis: fixed point, backoff law, simulation, fairness, wavelet LRD";

    auto base = py::register_exception<Error>(m, "BackoffError", PyExc_RuntimeError);
    py::register_exception<InvalidParams>(m, "InvalidParams", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<DivergentSeries>(m, "DivergentSeries", base.ptr());
    py::register_exception<NoConvergence>(m, "NoConvergence", base.ptr());
    py::register_exception<InsufficientData>(m, "InsufficientData", base.ptr());
    py::register_exception<InsufficientTrace>(m, "InsufficientTrace", base.ptr());
    py::register_exception<SeriesTooShort>(m, "SeriesTooShort", base.ptr());
    py::register_exception<PoorFit>(m, "PoorFit", base.ptr());

    py::class_<ProtocolParams>(m, "ProtocolParams")
        .def(py::init(&make_params), py::arg("m") = 2.0, py::arg("cw0") = 32.0, py::arg("K") = 6, py::arg("N") = 1)
        .def_readonly("m", &ProtocolParams::m)
        .def_property_readonly("cw0", [](const ProtocolParams& p) { return 2.0 * p.b0; })
        .def_property_readonly("K", [](const ProtocolParams& p) { return p.K.str(); })
        .def_readonly("N", &ProtocolParams::N)
        .def("window", &ProtocolParams::window, py::arg("k"))
        .def("__repr__", [](const ProtocolParams& p) {
            return "ProtocolParams(m=" + std::to_string(p.m) + ", cw0=" + std::to_string(2.0 * p.b0) + ", K=" +
                   p.K.str() + ", N=" + std::to_string(p.N) + ")";
        });

    py::class_<FixedPointSolution>(m, "FixedPointSolution")
        .def_readonly("gamma", &FixedPointSolution::gamma)
        .def_readonly("p_bar", &FixedPointSolution::p_bar)
        .def_readonly("alpha", &FixedPointSolution::alpha)
        .def_readonly("phi", &FixedPointSolution::phi)
        .def_readonly("residual", &FixedPointSolution::residual)
        .def_readonly("iterations", &FixedPointSolution::iterations);
    m.def("solve_fixed_point", &solve_fixed_point, py::arg("params"), py::arg("tol") = kDefaultFpeTol);

    py::class_<BackoffStats>(m, "BackoffStats")
        .def_readonly("mean", &BackoffStats::mean)
        .def_readonly("second_moment", &BackoffStats::second_moment)
        .def_readonly("variance", &BackoffStats::variance)
        .def_readonly("cv", &BackoffStats::cv);
    m.def(
        "backoff_stats",
        [](double gamma, const ProtocolParams& p, const std::string& variance) {
            return backoff_stats(gamma, p, parse_stage_variance(variance));
        },
        py::arg("gamma"), py::arg("params"), py::arg("variance") = "discrete");
    m.def(
        "pdf_backoff",
        [](double gamma, const ProtocolParams& p, double cell_width) {
            GridSpec g;
            g.cell_width = cell_width;
            const DensityGrid d = pdf_backoff(gamma, p, g);
            return py::make_tuple(as_array(d.x), as_array(d.f));
        },
        py::arg("gamma"), py::arg("params"), py::arg("cell_width") = 0.25,
        "Density of the per-packet backoff on a grid; returns (x, f).");

    m.def(
        "sample_backoff",
        [](double gamma, const ProtocolParams& p, std::size_t n, std::uint64_t seed) {
            return as_array(sample_per_packet_backoff(gamma, p, n, seed));
        },
        py::arg("gamma"), py::arg("params"), py::arg("n"), py::arg("seed") = 1);
    m.def(
        "simulate",
        [](const ProtocolParams& p, double horizon, std::uint64_t seed, const std::string& mode,
           std::optional<double> gamma) {
            const TraceMode tm = parse_trace_mode(mode);
            const Trace t = tm == TraceMode::renewal
                                ? build_renewal_superposition(gamma ? *gamma : solve_fixed_point(p).gamma, p, p.N,
                                                              horizon, seed)
                                : simulate_cell(p, horizon, seed);
            py::list nodes;
            for (const auto& a : t.arrivals_per_node) nodes.append(as_array(a));
            py::dict out;
            out["arrivals"] = nodes;
            out["horizon"] = t.horizon;
            out["realized_gamma"] = t.realized_gamma;
            out["attempts"] = t.attempts;
            out["collisions"] = t.collisions;
            return out;
        },
        py::arg("params"), py::arg("horizon"), py::arg("seed") = 1, py::arg("mode") = "renewal",
        py::arg("gamma") = py::none(),
        "Arrival times per node plus counters.");

    py::class_<FairnessSpec>(m, "FairnessSpec")
        .def_readonly("N", &FairnessSpec::N)
        .def_readonly("zeta", &FairnessSpec::zeta)
        .def_readonly("v_omega", &FairnessSpec::v_omega)
        .def_readonly("alpha", &FairnessSpec::alpha)
        .def_readonly("omega_bar", &FairnessSpec::omega_bar)
        .def_readonly("ell", &FairnessSpec::ell)
        .def_readonly("ell0", &FairnessSpec::ell0)
        .def_readonly("c", &FairnessSpec::c)
        .def_property_readonly("regime", [](const FairnessSpec& s) { return to_string(s.regime); });
    m.def(
        "fairness_spec",
        [](const ProtocolParams& p, double zeta, double ell) { return make_fairness_spec(p, zeta, ell); },
        py::arg("params"), py::arg("zeta") = 100.0, py::arg("ell") = 0.0);
    m.def("gaussian_inter_tx", &gaussian_inter_tx, py::arg("z"), py::arg("spec"));

    py::class_<HeavyInterTx>(m, "HeavyInterTx")
        .def(py::init<const FairnessSpec&>(), py::arg("spec"))
        .def("pmf", [](const HeavyInterTx& h, long z) { return h.pmf(z).probability; }, py::arg("z"))
        .def("ccdf", [](const HeavyInterTx& h, long z) { return h.ccdf(z).probability; }, py::arg("z"),
             "P[Z > z + 1/2]");

    m.def(
        "estimate_ell",
        [](std::vector<double> samples, double alpha, double omega_bar) {
            const EllEstimate e = estimate_ell_from_samples(std::move(samples), alpha, omega_bar);
            return py::make_tuple(e.ell, e.ell0, e.r2);
        },
        py::arg("samples"), py::arg("alpha"), py::arg("omega_bar"), "Returns (ell, ell0, r2).");

    py::class_<HurstEstimate>(m, "HurstEstimate")
        .def_readonly("hurst", &HurstEstimate::hurst)
        .def_readonly("slope", &HurstEstimate::slope)
        .def_readonly("slope_se", &HurstEstimate::slope_se)
        .def_readonly("j1", &HurstEstimate::j1)
        .def_readonly("j2", &HurstEstimate::j2)
        .def_readonly("alignment_pvalue", &HurstEstimate::alignment_pvalue);
    m.def(
        "hurst",
        [](const std::vector<double>& series, int M, std::optional<int> j1, std::optional<int> j2) {
            const LogscaleDiagram d = logscale_diagram(series, M);
            if (!j1 || !j2) {
                const AlignmentRange a = suggest_alignment(d);
                return hurst_estimate(d, a.j1, a.j2);
            }
            return hurst_estimate(d, *j1, *j2);
        },
        py::arg("series"), py::arg("M") = 2, py::arg("j1") = py::none(), py::arg("j2") = py::none());
}
