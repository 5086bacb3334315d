#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "sqkd/channel.hpp"
#include "sqkd/config.hpp"
#include "sqkd/experiment.hpp"
#include "sqkd/gaussian.hpp"
#include "sqkd/oracle.hpp"
#include "sqkd/protocol.hpp"

namespace py = pybind11;
using namespace sqkd;

namespace {

std::string mode_repr(const GaussianMode& m) {
    std::ostringstream os;
    os << "GaussianMode(mean1=" << m.mean1 << ", mean2=" << m.mean2 << ", var1=" << m.var1
       << ", var2=" << m.var2 << ")";
    return os.str();
}

std::vector<double> sample_batch(const GaussianMode& mode, Quadrature axis, std::size_t n,
                                 std::uint64_t seed) {
    Rng rng = make_rng(seed);
    std::vector<double> out(n);
    for (auto& v : out) v = sample_homodyne(mode, axis, rng).value;
    return out;
}

/// Density of a damped squeezed state obtained through the characteristic
/// function instead of the closed form; for cross-checking from python.
std::vector<double> damped_pdf_via_characteristic(double r, double center, double gamma_t,
                                                  const std::vector<double>& x) {
    if (x.size() < 2) throw std::invalid_argument("need at least two x points");
    const GaussianMode mode0 = squeezed_state(Quadrature::X1, center, r);
    const auto chi = oracle::evolve_characteristic(
        oracle::CharacteristicFunction1D::for_mode_auto(mode0, Quadrature::X1), gamma_t);
    const oracle::GridSpec1D grid{x.front(), x.back(), static_cast<int>(x.size())};
    return oracle::pdf_from_characteristic(chi, grid);
}

py::dict session_summary(const std::string& config_json, std::uint64_t seed) {
    harness::ExperimentSpec spec = harness::parse_config(config_json, "<string>");
    spec.session.seed = seed;
    const protocol::SessionResult res = protocol::run_session(spec.session);
    py::dict d;
    d["kept_fraction"] = res.kept_fraction;
    d["key_rate"] = res.key_rate;
    d["key_error_rate"] = res.key_error_rate;
    d["checked_rounds"] = res.report.checked_rounds;
    d["mismatches"] = res.report.mismatches;
    d["observed_error_rate"] = res.report.observed_error_rate;
    d["eavesdropper_flagged"] = res.report.eavesdropper_flagged;
    return d;
}

}  // namespace

PYBIND11_MODULE(_sqkd, m) {
    m.doc() = "squeezed-state quadrature key distribution: Gaussian states, lossy/amplified "
              "links, tap and intercept attacks";

    py::enum_<Quadrature>(m, "Quadrature")
        .value("X1", Quadrature::X1)
        .value("X2", Quadrature::X2);

    py::class_<GaussianMode>(m, "GaussianMode")
        .def(py::init(&GaussianMode::create), py::arg("mean1"), py::arg("mean2"), py::arg("var1"),
             py::arg("var2"))
        .def_readonly("mean1", &GaussianMode::mean1)
        .def_readonly("mean2", &GaussianMode::mean2)
        .def_readonly("var1", &GaussianMode::var1)
        .def_readonly("var2", &GaussianMode::var2)
        .def_static("vacuum", &GaussianMode::vacuum)
        .def("__repr__", &mode_repr);

    py::class_<TwoModeGaussianState>(m, "TwoModeGaussianState")
        .def_readonly("mean", &TwoModeGaussianState::mean)
        .def_readonly("cov", &TwoModeGaussianState::cov)
        .def("marginal", &TwoModeGaussianState::marginal, py::arg("mode"));

    m.def("squeezed_state", &squeezed_state, py::arg("axis"), py::arg("center"), py::arg("r"));
    m.def("quadrature_pdf", &quadrature_pdf, py::arg("mode"), py::arg("axis"), py::arg("x"));
    m.def("bin_probability", &bin_probability, py::arg("mode"), py::arg("axis"), py::arg("lo"),
          py::arg("hi"));
    m.def("sample_homodyne", &sample_batch, py::arg("mode"), py::arg("axis"), py::arg("n"),
          py::arg("seed"));
    m.def("embed_with_vacuum", &embed_with_vacuum, py::arg("signal"));
    m.def("apply_beam_splitter", &apply_beam_splitter, py::arg("state"), py::arg("T"),
          py::arg("R"));
    m.def("condition_on_homodyne", &condition_on_homodyne, py::arg("state"),
          py::arg("measured_mode"), py::arg("axis"), py::arg("outcome"));
    m.def("uncertainty_product", &uncertainty_product, py::arg("mode"));

    m.def("loss_evolve", &loss_evolve, py::arg("mode"), py::arg("gamma_T"));
    m.def(
        "psa_amplify",
        [](const GaussianMode& mode, double gain, Quadrature axis) {
            return psa_amplify(mode, PhaseSensitiveAmplifier::create(gain, axis));
        },
        py::arg("mode"), py::arg("gain"), py::arg("amplified_axis"));
    m.def(
        "amplified_link",
        [](const GaussianMode& mode, double gamma_T, double gain, Quadrature axis) {
            return amplified_link(mode, gamma_T, PhaseSensitiveAmplifier::create(gain, axis));
        },
        py::arg("mode"), py::arg("gamma_T"), py::arg("gain"), py::arg("amplified_axis"));

    py::enum_<EstimatorKind>(m, "EstimatorKind")
        .value("PLAIN_XI", EstimatorKind::PlainXi)
        .value("AMPLIFIED_RIGHT_XI1", EstimatorKind::AmplifiedRightXi1)
        .value("AMPLIFIED_WRONG_XI2", EstimatorKind::AmplifiedWrongXi2);

    m.def(
        "estimator_stats",
        [](EstimatorKind kind, const GaussianMode& mode0, double gamma_T, double gain) {
            const EstimatorStats s = estimator_stats(kind, mode0, gamma_T, gain);
            return py::make_tuple(s.mean, s.stddev);
        },
        py::arg("kind"), py::arg("mode0"), py::arg("gamma_T"), py::arg("gain") = 1.0);
    m.def(
        "loss_budget",
        [](EstimatorKind kind, double s_margin, double delta, double initial_var1, double gain) {
            return loss_budget(kind, LinkBudget::create(s_margin, delta, initial_var1), gain);
        },
        py::arg("kind"), py::arg("s_margin"), py::arg("delta"), py::arg("initial_var1"),
        py::arg("gain") = 1.0);
    m.def(
        "gain_window",
        [](double s_margin, double delta, double dominance_factor) {
            const GainWindow w = gain_window(s_margin, delta, dominance_factor);
            return py::make_tuple(w.g_min, w.g_max, w.empty());
        },
        py::arg("s_margin"), py::arg("delta"), py::arg("dominance_factor") = 3.0);

    m.def(
        "tap_attack_analysis",
        [](double reflectivity, double r, double s) {
            const protocol::TapAttackFigures f = protocol::tap_attack_analysis(reflectivity, r, s);
            py::dict d;
            d["eve_estimator_stddev"] = f.eve_estimator_stddev;
            d["bob_width_ratio"] = f.bob_width_ratio;
            d["bob_center_shift"] = f.bob_center_shift;
            return d;
        },
        py::arg("reflectivity"), py::arg("r"), py::arg("s"));

    m.def("damped_pdf_via_characteristic", &damped_pdf_via_characteristic, py::arg("r"),
          py::arg("center"), py::arg("gamma_t"), py::arg("x"));
    m.def("run_session", &session_summary, py::arg("config_json"), py::arg("seed"),
          "Run a full key-distribution session from a JSON config string.");

    m.attr("__version__") = "0.1.0";
}
