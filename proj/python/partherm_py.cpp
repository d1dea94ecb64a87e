// Python bindings for the theory functions and the experiment harness.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "partherm/bath_probe.hpp"
#include "partherm/dynamics.hpp"
#include "partherm/fidelity.hpp"
#include "partherm/harness.hpp"
#include "partherm/resonance.hpp"

namespace py = pybind11;
using namespace partherm;

namespace {

Family family_of(const std::string& s) { return parse_family(s); }

py::dict run(const std::string& experiment, const std::string& config, int workers) {
  const ExperimentConfig cfg = parse_config_string(config, parse_experiment(experiment));
  RunOutput out;
  {
    py::gil_scoped_release release;
    out = run_experiment(cfg, workers);
  }
  std::ostringstream csv;
  write_csv(csv, config_hash(cfg), out.rows);
  py::dict d;
  d["csv"] = csv.str();
  d["manifest"] = make_manifest(cfg, out, workers).dump();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Susceptibility statistics of a spin coupled to a chaotic bath";
  m.attr("__version__") = library_version();

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<DistributionModel>(m, "DistributionModel")
      .def(py::init([](const std::string& family, double chi_star) { return DistributionModel(family_of(family), chi_star); }),
           py::arg("family"), py::arg("chi_star") = 1.0)
      .def("pdf", &DistributionModel::pdf)
      .def("cdf", &DistributionModel::cdf)
      .def("survival", &DistributionModel::survival)
      .def("median", &DistributionModel::median)
      .def("lower_tail_coefficient", &DistributionModel::lower_tail_coefficient)
      .def("sample", [](const DistributionModel& d, std::uint64_t seed, Index n) {
        RngStream rng = RngStream::for_realization(seed, 0);
        return d.sample(rng, n);
      });

  m.def("estimate_log_chi_star", &estimate_log_chi_star, py::arg("samples"), py::arg("M") = 0,
        "Tail estimate of log chi* from the M largest samples (M = 0 picks the default).");
  m.def("default_tail_count", &default_tail_count);
  m.def("cat_entropy", &cat_entropy, "Spin entropy of a resonant pair at x = J^2 chi.");
  m.def("perturbative_entropy", &perturbative_entropy);
  m.def(
      "ee_moments",
      [](double g, const std::string& family) {
        const EEMoments e = ee_moments(g, DistributionModel(family_of(family), 1.0));
        return py::dict(py::arg("mean") = e.mean, py::arg("median") = e.median, py::arg("variance") = e.variance);
      },
      py::arg("g"), py::arg("family") = "goe");
  m.def(
      "czz_infinite",
      [](double g, const std::string& family) {
        return czz_infinite_theory(g, ChiStarProfile::constant(1.0), family_of(family));
      },
      py::arg("g"), py::arg("family") = "goe", "Infinite-time memory for a flat chi* profile.");
  m.def(
      "delta_s", [](double g, const std::string& family) { return delta_s_theory(g, family_of(family)); },
      py::arg("g"), py::arg("family") = "goe");
  m.def(
      "f_od_pdf",
      [](double R, double g, const std::string& family, const std::string& parity) {
        return f_od_pdf(R, g, family_of(family), parse_parity(parity));
      },
      py::arg("R"), py::arg("g"), py::arg("family") = "goe", py::arg("parity") = "mixed");
  m.def(
      "f_od_cdf",
      [](double R, double g, const std::string& family, const std::string& parity) {
        return f_od_cdf(R, g, family_of(family), parse_parity(parity));
      },
      py::arg("R"), py::arg("g"), py::arg("family") = "goe", py::arg("parity") = "mixed");

  m.def("experiment_names", &experiment_names);
  m.def("run_experiment", &run, py::arg("experiment"), py::arg("config") = "", py::arg("workers") = 1,
        "Run an experiment from INI text. Returns {'csv': str, 'manifest': json str}.");
}
