#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fracheat/hitting.hpp"
#include "fracheat/kernel.hpp"
#include "fracheat/potential.hpp"
#include "fracheat/spde.hpp"
#include "fracheat/stats.hpp"
#include "fracheat/types.hpp"

namespace py = pybind11;
using namespace fracheat;

namespace {

stats::Direction parse_direction(const std::string& name) {
  if (name == "time") return stats::Direction::time;
  if (name == "space") return stats::Direction::space;
  throw std::domain_error("direction must be 'time' or 'space'");
}

hitting::Mode parse_mode(const std::string& name) {
  if (name == "space-time") return hitting::Mode::space_time;
  if (name == "fixed-time") return hitting::Mode::fixed_time;
  if (name == "fixed-space") return hitting::Mode::fixed_space;
  throw std::domain_error("mode must be space-time, fixed-time or fixed-space");
}

}  // namespace

PYBIND11_MODULE(_fracheat, m) {
  m.doc() = "Numerical laboratory for systems of stochastic fractional heat "
            "equations: kernels, spectral solvers, regularity statistics, "
            "potential theory, and hitting-probability experiments.";

  // --- kernel ---------------------------------------------------------------
  m.def("green_kernel",
        [](double a, double t, double x) {
          return kernel::green_kernel(Alpha{a}, t, x);
        },
        py::arg("alpha"), py::arg("t"), py::arg("x"));
  m.def("squared_mass_constant",
        [](double a) { return kernel::squared_mass_constant(Alpha{a}); },
        py::arg("alpha"));
  m.def("increment_variance",
        [](double a, double t, double x, double s, double y) {
          return kernel::increment_variance_exact(Alpha{a}, {t, x}, {s, y});
        },
        py::arg("alpha"), py::arg("t"), py::arg("x"), py::arg("s"),
        py::arg("y"));
  m.def("zeta",
        [](double a, double x) { return kernel::zeta(Alpha{a}, x); },
        py::arg("alpha"), py::arg("x"));
  m.def("zeta_min", [](double a) { return kernel::zeta_min(Alpha{a}); },
        py::arg("alpha"));
  m.def("delta_metric",
        [](double a, double t, double x, double s, double y) {
          return delta_metric(Alpha{a}, {t, x}, {s, y});
        },
        py::arg("alpha"), py::arg("t"), py::arg("x"), py::arg("s"),
        py::arg("y"));

  // --- spde -----------------------------------------------------------------
  py::class_<spde::SolverGrid>(m, "SolverGrid")
      .def(py::init([](double a, double T, double L, std::size_t nt,
                       std::size_t nx) {
             return spde::SolverGrid(Alpha{a}, T, L, nt, nx);
           }),
           py::arg("alpha"), py::arg("T"), py::arg("L"), py::arg("nt"),
           py::arg("nx"))
      .def_property_readonly("alpha",
                             [](const spde::SolverGrid& g) {
                               return g.alpha.value();
                             })
      .def_readonly("T", &spde::SolverGrid::T)
      .def_readonly("L", &spde::SolverGrid::L)
      .def_readonly("nt", &spde::SolverGrid::nt)
      .def_readonly("nx", &spde::SolverGrid::nx)
      .def("dt", &spde::SolverGrid::dt)
      .def("dx", &spde::SolverGrid::dx);

  py::class_<spde::FieldSample>(m, "FieldSample")
      .def_readonly("seed", &spde::FieldSample::seed)
      .def_readonly("d", &spde::FieldSample::d)
      .def_readonly("values", &spde::FieldSample::values)
      .def_readonly("grid", &spde::FieldSample::grid)
      .def("at", &spde::FieldSample::at, py::arg("k"), py::arg("j"),
           py::arg("c"));

  m.def("solve",
        [](const std::string& preset, int d, const spde::SolverGrid& grid,
           std::uint64_t seed, std::size_t substeps) {
          return spde::solve(spde::CoefficientSet::preset(preset, d), grid,
                             seed, substeps);
        },
        py::arg("preset"), py::arg("d"), py::arg("grid"), py::arg("seed"),
        py::arg("substeps") = 1);
  m.def("solve_additive_exact", &spde::solve_additive_exact, py::arg("d"),
        py::arg("grid"), py::arg("seed"));

  // --- stats ----------------------------------------------------------------
  py::class_<stats::HolderFit>(m, "HolderFit")
      .def_readonly("slope", &stats::HolderFit::slope)
      .def_readonly("std_error", &stats::HolderFit::std_error)
      .def_readonly("r2", &stats::HolderFit::r2)
      .def_readonly("lags", &stats::HolderFit::lags)
      .def_readonly("moments", &stats::HolderFit::moments);

  m.def("holder_fit",
        [](const std::string& preset, int d, const spde::SolverGrid& grid,
           const std::string& direction, std::size_t n_samples,
           std::uint64_t seed0, double p, std::size_t min_lag_cells,
           std::size_t substeps) {
          const auto coeffs = spde::CoefficientSet::preset(preset, d);
          std::vector<spde::FieldSample> samples;
          samples.reserve(n_samples);
          for (std::size_t i = 0; i < n_samples; ++i)
            samples.push_back(spde::solve(coeffs, grid, seed0 + i, substeps));
          return stats::holder_fit(samples, parse_direction(direction), p,
                                   min_lag_cells);
        },
        py::arg("preset"), py::arg("d"), py::arg("grid"), py::arg("direction"),
        py::arg("n_samples"), py::arg("seed0"), py::arg("p") = 2.0,
        py::arg("min_lag_cells") = 4, py::arg("substeps") = 1);

  // --- potential ------------------------------------------------------------
  py::class_<potential::CapacityResult>(m, "CapacityResult")
      .def_readonly("capacity", &potential::CapacityResult::capacity)
      .def_readonly("minimum_energy",
                    &potential::CapacityResult::minimum_energy)
      .def_readonly("gap", &potential::CapacityResult::gap)
      .def_readonly("iterations", &potential::CapacityResult::iterations)
      .def_readonly("atom_count", &potential::CapacityResult::atom_count);

  m.def("capacity",
        [](const std::string& set_json, double beta, double mesh, double tol) {
          return potential::capacity(potential::parse_set_spec(set_json),
                                     beta, mesh, tol);
        },
        py::arg("set_json"), py::arg("beta"), py::arg("mesh"),
        py::arg("tol") = 1e-6);
  m.def("hausdorff_premeasure",
        [](const std::string& set_json, double beta, double eps) {
          return potential::hausdorff_premeasure(
              potential::parse_set_spec(set_json), beta, eps);
        },
        py::arg("set_json"), py::arg("beta"), py::arg("eps"));
  m.def("dimension_thresholds",
        [](double a, int d) {
          const auto t = potential::dimension_thresholds(Alpha{a}, d);
          return std::make_tuple(t.space_time, t.fixed_time, t.fixed_space);
        },
        py::arg("alpha"), py::arg("d"));

  // --- hitting --------------------------------------------------------------
  py::class_<hitting::HittingResult>(m, "HittingResult")
      .def_readonly("estimate", &hitting::HittingResult::estimate)
      .def_readonly("ci_lo", &hitting::HittingResult::ci_lo)
      .def_readonly("ci_hi", &hitting::HittingResult::ci_hi)
      .def_readonly("n", &hitting::HittingResult::n)
      .def_readonly("hit_count", &hitting::HittingResult::hit_count)
      .def_readonly("dilation", &hitting::HittingResult::dilation)
      .def_readonly("threshold", &hitting::HittingResult::threshold)
      .def_readonly("capacity", &hitting::HittingResult::capacity_value)
      .def_readonly("hausdorff", &hitting::HittingResult::hausdorff_value);

  m.def("wilson_interval", &hitting::wilson_interval, py::arg("hits"),
        py::arg("n"));
  m.def("hitting_probability",
        [](const std::string& preset, int d, const spde::SolverGrid& grid,
           const std::string& mode, double t0, double t1, double x0, double x1,
           const std::string& target_json, double dilation,
           std::size_t n_samples, std::uint64_t seed0, unsigned workers) {
          hitting::HittingExperiment exp{grid};
          exp.preset = preset;
          exp.d = d;
          exp.mode = parse_mode(mode);
          exp.window = {t0, t1, x0, x1};
          exp.target = potential::parse_set_spec(target_json);
          exp.dilation = dilation;
          exp.n_samples = n_samples;
          exp.seed0 = seed0;
          exp.workers = workers;
          return hitting::hitting_probability_mc(exp);
        },
        py::arg("preset"), py::arg("d"), py::arg("grid"), py::arg("mode"),
        py::arg("t0"), py::arg("t1"), py::arg("x0"), py::arg("x1"),
        py::arg("target_json"), py::arg("dilation") = 0.0,
        py::arg("n_samples") = 400, py::arg("seed0") = 1,
        py::arg("workers") = 0);

  py::register_exception<NumericError>(m, "NumericError");
}
