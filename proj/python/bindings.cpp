#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <variant>

#include "remkit/bounds.hpp"
#include "remkit/cascade.hpp"
#include "remkit/error.hpp"
#include "remkit/exact.hpp"
#include "remkit/model.hpp"
#include "remkit/verify.hpp"

namespace py = pybind11;
using namespace remkit;

namespace {

std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

py::dict metadata_dict(const CheckReport& r) {
  py::dict d;
  for (const auto& [key, value] : r.metadata) {
    std::visit([&](const auto& v) { d[py::str(key)] = v; }, value);
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_remkit, m) {
  m.doc() = "remkit native core";
  m.attr("__version__") = REMKIT_VERSION;

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<CapacityError>(m, "CapacityError", PyExc_MemoryError);
  py::register_exception<TailTooLargeError>(m, "TailTooLargeError", PyExc_ArithmeticError);
  py::register_exception<DegenerateError>(m, "DegenerateError", PyExc_ValueError);

  py::class_<GremParams>(m, "GremParams")
      .def_static("rem", &GremParams::rem, py::arg("N"))
      .def_static("from_blocks", &GremParams::from_blocks, py::arg("a"), py::arg("blocks"))
      .def_static("from_proportions", &GremParams::from_proportions, py::arg("a"), py::arg("kappa"),
                  py::arg("N"))
      .def_property_readonly("levels", &GremParams::levels)
      .def_property_readonly("size", &GremParams::size)
      .def_property_readonly("a", [](const GremParams& p) { return to_vector(p.a()); })
      .def_property_readonly("kappa", [](const GremParams& p) { return to_vector(p.kappa()); })
      .def_property_readonly("blocks", [](const GremParams& p) {
        return std::vector<int>(p.blocks().begin(), p.blocks().end());
      })
      .def_property_readonly("nondegenerate", &GremParams::nondegenerate)
      .def("resized", &GremParams::resized, py::arg("N"))
      .def("__repr__", [](const GremParams& p) {
        return "GremParams(levels=" + std::to_string(p.levels()) + ", N=" + std::to_string(p.size()) + ")";
      });

  py::class_<PressureEstimate>(m, "PressureEstimate")
      .def_readonly("mean", &PressureEstimate::mean)
      .def_readonly("std_error", &PressureEstimate::std_error)
      .def_readonly("replicas", &PressureEstimate::replicas)
      .def_readonly("beta", &PressureEstimate::beta)
      .def_readonly("seed", &PressureEstimate::seed);

  m.def(
      "log_partition",
      [](const GremParams& p, std::uint64_t seed, double beta) {
        return log_partition(DisorderSample(p, seed), beta);
      },
      py::arg("params"), py::arg("seed"), py::arg("beta"),
      "ln Z(beta) of the disorder realization drawn from seed.");
  m.def(
      "overlap_ratio",
      [](const GremParams& p, std::uint64_t seed, double beta) {
        return overlap_ratio(DisorderSample(p, seed), beta);
      },
      py::arg("params"), py::arg("seed"), py::arg("beta"));
  m.def(
      "quenched_pressure",
      [](const GremParams& p, double beta, std::size_t replicas, std::uint64_t seed) {
        py::gil_scoped_release release;
        return quenched_pressure(p, beta, replicas, seed);
      },
      py::arg("params"), py::arg("beta"), py::arg("replicas"), py::arg("seed"));
  m.def(
      "quenched_pressure_sweep",
      [](const GremParams& p, const std::vector<double>& betas, std::size_t replicas,
         std::uint64_t seed) {
        py::gil_scoped_release release;
        return quenched_pressure_sweep(p, betas, replicas, seed);
      },
      py::arg("params"), py::arg("betas"), py::arg("replicas"), py::arg("seed"));
  m.def(
      "overlap_expectation",
      [](const GremParams& p, double beta, std::size_t replicas, std::uint64_t seed) {
        py::gil_scoped_release release;
        const auto o = overlap_expectation(p, beta, replicas, seed);
        return std::pair{o.mean, o.std_error};
      },
      py::arg("params"), py::arg("beta"), py::arg("replicas"), py::arg("seed"),
      "(mean, std_error) of the replica overlap probability.");

  m.def("beta_c", &beta_c);
  m.def("q_rem", &q_rem, py::arg("beta"));
  m.def("q_grem", &q_grem, py::arg("beta"), py::arg("params"));
  m.def("grem_decomposition", &grem_decomposition, py::arg("beta"), py::arg("params"));
  m.def(
      "grem_objective",
      [](const std::vector<double>& mv, double beta, const GremParams& p) {
        return grem_objective(VariationalPoint(mv), beta, p);
      },
      py::arg("m"), py::arg("beta"), py::arg("params"));
  m.def(
      "critical_temperatures",
      [](const GremParams& p) { return critical_temperatures(p).beta_star; }, py::arg("params"));
  auto opt_dict = [](const OptimizeResult& r) {
    py::dict d;
    d["m"] = r.point.values();
    d["value"] = r.value;
    d["closed_form"] = r.closed_form;
    d["iterations"] = r.iterations;
    d["warning"] = r.warning;
    return d;
  };
  m.def(
      "optimize", [opt_dict](double beta, const GremParams& p) { return opt_dict(optimize(beta, p)); },
      py::arg("beta"), py::arg("params"));
  m.def(
      "numeric_optimize",
      [opt_dict](double beta, const GremParams& p, double tolerance) {
        NumericOptions o;
        o.tolerance = tolerance;
        return opt_dict(numeric_optimize(beta, p, o));
      },
      py::arg("beta"), py::arg("params"), py::arg("tolerance") = 1e-8);

  m.def(
      "sample_ppp", [](std::size_t K, std::uint64_t seed) { return sample_ppp(K, seed).points; },
      py::arg("K"), py::arg("seed"), "The K largest points, decreasing.");
  m.def(
      "weight_sum",
      [](std::size_t K, std::uint64_t seed, double mm, double rel_tol) {
        const auto w = weight_sum(sample_ppp(K, seed), mm, rel_tol);
        py::dict d;
        d["partial"] = w.partial;
        d["tail"] = w.tail;
        d["tail_flag"] = w.tail_flag;
        return d;
      },
      py::arg("K"), py::arg("seed"), py::arg("m"), py::arg("rel_tol") = 1e-6);

  py::class_<FDistribution>(m, "FDistribution")
      .def_static("constant", &FDistribution::constant, py::arg("value"))
      .def_static("gaussian", &FDistribution::gaussian, py::arg("mean"), py::arg("variance"))
      .def_static("uniform", &FDistribution::uniform, py::arg("lo"), py::arg("hi"))
      .def_static("rem_log_partition", &FDistribution::rem_log_partition, py::arg("N"),
                  py::arg("beta"), py::arg("moment_samples") = 20000, py::arg("moment_seed") = 0x5eed)
      .def_property_readonly("name", &FDistribution::name)
      .def("log_mgf", &FDistribution::log_mgf, py::arg("m"))
      .def("log_invariance_constant", &FDistribution::log_invariance_constant, py::arg("m"));

  py::class_<InvarianceReport>(m, "InvarianceReport")
      .def_readonly("distribution", &InvarianceReport::distribution)
      .def_readonly("m", &InvarianceReport::m)
      .def_readonly("ks", &InvarianceReport::ks)
      .def_readonly("c", &InvarianceReport::c)
      .def_readonly("threshold", &InvarianceReport::threshold)
      .def_readonly("tail_clear", &InvarianceReport::tail_clear)
      .def_readonly("max_relative_tail", &InvarianceReport::max_relative_tail)
      .def_readonly("trials", &InvarianceReport::trials)
      .def_readonly("mean_points", &InvarianceReport::mean_points)
      .def_readonly("passed", &InvarianceReport::pass);
  m.def(
      "invariance_test",
      [](double mm, const FDistribution& f, std::size_t K, std::size_t trials, std::uint64_t seed,
         double rel_tol, double threshold, std::size_t max_points, bool raise_on_tail) {
        InvarianceOptions o;
        o.rel_tol = rel_tol;
        o.threshold = threshold;
        o.max_points = max_points;
        o.tail_policy = raise_on_tail ? TailPolicy::kThrow : TailPolicy::kReport;
        py::gil_scoped_release release;
        return invariance_test(mm, f, K, trials, seed, o);
      },
      py::arg("m"), py::arg("f"), py::arg("K"), py::arg("trials"), py::arg("seed"),
      py::arg("rel_tol") = 1e-6, py::arg("threshold") = 0.02, py::arg("max_points") = 0,
      py::arg("raise_on_tail") = true);

  py::class_<CheckReport>(m, "CheckReport")
      .def_readonly("name", &CheckReport::name)
      .def_readonly("passed", &CheckReport::pass)
      .def_readonly("lhs", &CheckReport::lhs)
      .def_readonly("rhs", &CheckReport::rhs)
      .def_readonly("tolerance", &CheckReport::tolerance)
      .def_property_readonly("metadata", &metadata_dict)
      .def("to_json", &CheckReport::to_json)
      .def("__repr__", &CheckReport::to_json);

  m.def("sum_rule_check", &sum_rule_check, py::arg("beta_max"), py::arg("N"), py::arg("replicas"),
        py::arg("grid_points"), py::arg("seed"), py::call_guard<py::gil_scoped_release>());
  m.def("derivative_check", &derivative_check, py::arg("beta"), py::arg("N"), py::arg("replicas"),
        py::arg("seed"), py::arg("h") = 1e-3, py::call_guard<py::gil_scoped_release>());
  m.def("concentration_check", &concentration_check, py::arg("N"), py::arg("beta"), py::arg("t"),
        py::arg("replicas"), py::arg("seed"), py::call_guard<py::gil_scoped_release>());
  m.def("concentration_bound", &concentration_bound, py::arg("N"), py::arg("t"));
  m.def("overlap_decay_check", &overlap_decay_check, py::arg("betas"), py::arg("N_list"),
        py::arg("replicas"), py::arg("seed"), py::arg("eps0") = 0.01,
        py::call_guard<py::gil_scoped_release>());
  m.def("grem_lower_check", &grem_lower_check, py::arg("params"), py::arg("beta"),
        py::arg("replicas"), py::arg("seed"), py::call_guard<py::gil_scoped_release>());
  m.def("upper_bound_check", &upper_bound_check, py::arg("params"), py::arg("beta"),
        py::arg("replicas"), py::arg("seed"), py::call_guard<py::gil_scoped_release>());
  m.def(
      "stability_constant",
      [](std::size_t lattice_size, const std::vector<double>& deltas) {
        return stability_constant(GeneralHamiltonianSpec(lattice_size, deltas));
      },
      py::arg("lattice_size"), py::arg("deltas"));
  m.def(
      "rem_stability_constant",
      [](int N) { return stability_constant(GeneralHamiltonianSpec::rem(N)); }, py::arg("N"));
  m.def("lipschitz_constant", &lipschitz_constant, py::arg("beta"), py::arg("c"),
        py::arg("lattice_size"));
}
