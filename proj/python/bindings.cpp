#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qcurv/axisym_solver.hpp"
#include "qcurv/core.hpp"
#include "qcurv/diagnostics.hpp"
#include "qcurv/errors.hpp"
#include "qcurv/oracle2d.hpp"
#include "qcurv/quadrature.hpp"
#include "qcurv/radial_kernel.hpp"
#include "qcurv/radial_solver.hpp"
#include "qcurv/run.hpp"

namespace py = pybind11;
using namespace qcurv;

namespace {

std::optional<double> opt(const py::object& o) {
  if (o.is_none()) return std::nullopt;
  return o.cast<double>();
}

SolverConfig solver_config(double damping, double tol, std::size_t max_iter, std::vector<double> initial_v) {
  SolverConfig c;
  c.damping = damping;
  c.tol = tol;
  c.max_iter = max_iter;
  c.initial_v = std::move(initial_v);
  return c;
}

}  // namespace

PYBIND11_MODULE(_qcurv, m) {
  m.doc() = "Prescribed Q-curvature solvers on R^n";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_RuntimeError);
  py::register_exception<DiagnosticError>(m, "DiagnosticError", PyExc_RuntimeError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def("sphere_area", &sphere_area, py::arg("k"));
  m.def("gamma_n", &gamma_n, py::arg("n"));
  m.def("lambda_1", &lambda_1, py::arg("n"));
  m.def("critical_lambda", &critical_lambda, py::arg("n"), py::arg("alpha"));

  py::class_<ProblemParams>(m, "ProblemParams")
      .def(py::init([](int n, double alpha, double lambda, const py::object& mu) {
             return mu.is_none() ? ProblemParams(n, alpha, lambda) : ProblemParams(n, alpha, lambda, mu.cast<double>());
           }),
           py::arg("n"), py::arg("alpha"), py::arg("lambda_"), py::arg("mu") = py::none())
      .def_property_readonly("n", &ProblemParams::n)
      .def_property_readonly("alpha", &ProblemParams::alpha)
      .def_property_readonly("lambda_", &ProblemParams::lambda)
      .def_property_readonly("mu", &ProblemParams::mu)
      .def("with_lambda", &ProblemParams::with_lambda)
      .def("__repr__", [](const ProblemParams& p) {
        return "ProblemParams(n=" + std::to_string(p.n()) + ", alpha=" + std::to_string(p.alpha()) +
               ", lambda_=" + std::to_string(p.lambda()) + ", mu=" + std::to_string(p.mu()) + ")";
      });

  m.def("angular_log_mean", &angular_log_mean, py::arg("a"), py::arg("b"), py::arg("n"));

  py::class_<RadialGrid>(m, "RadialGrid")
      .def_readonly("nodes", &RadialGrid::nodes)
      .def_readonly("weights", &RadialGrid::weights)
      .def_readonly("r_max", &RadialGrid::r_max)
      .def_readonly("grading_exponent", &RadialGrid::grading_exponent)
      .def_readonly("panel_order", &RadialGrid::panel_order)
      .def("__len__", &RadialGrid::size)
      .def("rescaled", &RadialGrid::rescaled, py::arg("factor"))
      .def("resolution_radius", &RadialGrid::resolution_radius);

  m.def("default_r_max", &default_r_max, py::arg("params"));
  m.def(
      "build_radial_grid",
      [](const ProblemParams& p, std::size_t nodes, const py::object& r_max, const py::object& grading) {
        return build_radial_grid(p, GridSpec{nodes, opt(r_max), opt(grading)});
      },
      py::arg("params"), py::arg("nodes") = 512, py::arg("r_max") = py::none(), py::arg("grading") = py::none());
  m.def(
      "integrate_radial",
      [](const std::vector<double>& f, const RadialGrid& g, int n) { return integrate_radial(f, g, n); },
      py::arg("f"), py::arg("grid"), py::arg("n"));

  py::enum_<SolveStatus>(m, "SolveStatus")
      .value("converged", SolveStatus::converged)
      .value("max_iterations", SolveStatus::max_iterations)
      .value("blowup", SolveStatus::blowup);

  py::class_<RadialSolution>(m, "RadialSolution")
      .def_readonly("params", &RadialSolution::params)
      .def_readonly("grid", &RadialSolution::grid)
      .def_readonly("v", &RadialSolution::v)
      .def_readonly("u", &RadialSolution::u)
      .def_readonly("density", &RadialSolution::density)
      .def_readonly("c_v", &RadialSolution::c_v)
      .def_readonly("v_origin", &RadialSolution::v_origin)
      .def_readonly("residual_sup", &RadialSolution::residual_sup)
      .def_readonly("iterations", &RadialSolution::iterations)
      .def_readonly("converged", &RadialSolution::converged)
      .def_readonly("status", &RadialSolution::status)
      .def_property_readonly("w0", &RadialSolution::w0);

  m.def(
      "solve_fixed_point",
      [](const ProblemParams& p, const RadialGrid& g, double damping, double tol, std::size_t max_iter,
         std::vector<double> initial_v) {
        return solve_fixed_point(p, g, solver_config(damping, tol, max_iter, std::move(initial_v)));
      },
      py::arg("params"), py::arg("grid"), py::arg("damping") = 0.5, py::arg("tol") = 1e-8,
      py::arg("max_iter") = 50000, py::arg("initial_v") = std::vector<double>{},
      py::call_guard<py::gil_scoped_release>());
  m.def(
      "normalize_c",
      [](const std::vector<double>& v, const ProblemParams& p, const RadialGrid& g) { return normalize_c(v, p, g); },
      py::arg("v"), py::arg("params"), py::arg("grid"));

  py::class_<SweepStep>(m, "SweepStep")
      .def_readonly("lambda_", &SweepStep::lambda)
      .def_readonly("solution", &SweepStep::solution)
      .def_readonly("error", &SweepStep::error)
      .def_property_readonly("converged", &SweepStep::converged);

  m.def(
      "continuation_sweep",
      [](const ProblemParams& base, const std::vector<double>& lambdas, const RadialGrid& g, double damping,
         double tol, std::size_t max_iter) {
        return continuation_sweep(base, lambdas, g, solver_config(damping, tol, max_iter, {}));
      },
      py::arg("params"), py::arg("lambdas"), py::arg("grid"), py::arg("damping") = 0.5, py::arg("tol") = 1e-8,
      py::arg("max_iter") = 50000, py::call_guard<py::gil_scoped_release>());

  py::class_<NormalProfile>(m, "NormalProfile")
      .def_property_readonly("r_k", [](const NormalProfile& p) { return p.profile.r_k; })
      .def_property_readonly("source_peak", [](const NormalProfile& p) { return p.profile.source_peak; })
      .def_property_readonly("radii", [](const NormalProfile& p) { return p.profile.grid.nodes; })
      .def_property_readonly("eta", [](const NormalProfile& p) { return p.profile.eta; })
      .def("__call__", [](const NormalProfile& p, double x) { return p.profile(x); })
      .def_readonly("lambda_source", &NormalProfile::lambda_source)
      .def_readonly("total_curvature", &NormalProfile::total_curvature)
      .def_readonly("c", &NormalProfile::c)
      .def_readonly("normality_residual", &NormalProfile::normality_residual);

  m.def(
      "extract_normal_solution",
      [](const std::vector<SweepStep>& sweep, double min_peak, double test_radius) {
        return extract_normal_solution(sweep, NormalExtractionOptions{min_peak, test_radius});
      },
      py::arg("sweep"), py::arg("min_peak") = 2.0, py::arg("test_radius") = 5.0);

  py::class_<AxisymField>(m, "AxisymField")
      .def_readonly("v", &AxisymField::v)
      .def_readonly("u", &AxisymField::u)
      .def_readonly("density", &AxisymField::density)
      .def_readonly("c_v", &AxisymField::c_v)
      .def_readonly("v_star", &AxisymField::v_star)
      .def_readonly("residual_sup", &AxisymField::residual_sup)
      .def_readonly("iterations", &AxisymField::iterations)
      .def_readonly("converged", &AxisymField::converged)
      .def_readonly("status", &AxisymField::status)
      .def_readonly("volume", &AxisymField::volume)
      .def_readonly("asymmetry", &AxisymField::asymmetry)
      .def_readonly("norm", &AxisymField::norm)
      .def_readonly("tail_ratio", &AxisymField::tail_ratio);

  py::class_<TiltedPohozaev>(m, "TiltedPohozaev")
      .def_readonly("lambda_", &TiltedPohozaev::lambda)
      .def_readonly("lhs", &TiltedPohozaev::lhs)
      .def_readonly("rhs", &TiltedPohozaev::rhs)
      .def_readonly("tilt_term", &TiltedPohozaev::tilt_term)
      .def_readonly("relative_residual", &TiltedPohozaev::relative_residual);

  m.def(
      "solve_axisym",
      [](const ProblemParams& p, std::size_t radial_nodes, std::size_t angular_nodes, bool tilt, double damping,
         double tol, std::size_t max_iter) {
        AxisymConfig c;
        c.radial_nodes = radial_nodes;
        c.angular_nodes = angular_nodes;
        c.tilt = tilt;
        c.damping = damping;
        c.tol = tol;
        c.max_iter = max_iter;
        return solve_axisym(p, c);
      },
      py::arg("params"), py::arg("radial_nodes") = 128, py::arg("angular_nodes") = 96, py::arg("tilt") = true,
      py::arg("damping") = 0.5, py::arg("tol") = 1e-8, py::arg("max_iter") = 50000,
      py::call_guard<py::gil_scoped_release>());
  m.def("tilted_pohozaev", &tilted_pohozaev, py::arg("field"));

  py::class_<PohozaevResult>(m, "PohozaevResult")
      .def_readonly("lambda_", &PohozaevResult::lambda)
      .def_readonly("lhs", &PohozaevResult::lhs)
      .def_readonly("rhs", &PohozaevResult::rhs)
      .def_readonly("mu_term", &PohozaevResult::mu_term)
      .def_readonly("residual", &PohozaevResult::residual)
      .def_readonly("relative_residual", &PohozaevResult::relative_residual);

  m.def(
      "pohozaev_residual",
      [](const std::vector<double>& eta, double alpha, double mu, int n, const RadialGrid& g, double tail_tol) {
        return pohozaev_residual(eta, WeightSpec(alpha, mu), n, g, tail_tol);
      },
      py::arg("eta"), py::arg("alpha"), py::arg("mu"), py::arg("n"), py::arg("grid"), py::arg("tail_tol") = 1e-8);
  m.def(
      "log_slope",
      [](const std::vector<double>& v, const RadialGrid& g, const py::object& lo, const py::object& hi) {
        if (lo.is_none() && hi.is_none()) return log_slope(v, g);
        if (lo.is_none() || hi.is_none()) throw UsageError("log_slope: give both ends of the window or neither");
        return log_slope(v, g, lo.cast<double>(), hi.cast<double>());
      },
      py::arg("v"), py::arg("grid"), py::arg("r_lo") = py::none(), py::arg("r_hi") = py::none());
  m.def(
      "lower_bound_check",
      [](const std::vector<double>& v, const RadialGrid& g, double beta, double slack) {
        return lower_bound_check(v, g, beta, slack);
      },
      py::arg("v"), py::arg("grid"), py::arg("beta"), py::arg("slack_scale") = 1e-3);

  py::class_<DiagnosticsReport>(m, "DiagnosticsReport")
      .def_readonly("lambda_measured", &DiagnosticsReport::lambda_measured)
      .def_readonly("beta_estimate", &DiagnosticsReport::beta_estimate)
      .def_readonly("beta_expected", &DiagnosticsReport::beta_expected)
      .def_readonly("pohozaev_relative", &DiagnosticsReport::pohozaev_relative)
      .def_readonly("lower_bound_violations", &DiagnosticsReport::lower_bound_violations);
  m.def("diagnose_radial", &diagnose_radial, py::arg("solution"));

  py::class_<ScanRow>(m, "ScanRow")
      .def_readonly("lambda_", &ScanRow::lambda)
      .def_readonly("fraction", &ScanRow::fraction)
      .def_readonly("converged", &ScanRow::converged)
      .def_readonly("w0", &ScanRow::w0)
      .def_readonly("status", &ScanRow::status);
  py::class_<ThresholdScan>(m, "ThresholdScan")
      .def_readonly("rows", &ThresholdScan::rows)
      .def_readonly("threshold", &ThresholdScan::threshold)
      .def_readonly("last_converged", &ThresholdScan::last_converged)
      .def_readonly("first_failed", &ThresholdScan::first_failed)
      .def_readonly("consistent", &ThresholdScan::consistent)
      .def_readonly("beyond_proposition", &ThresholdScan::beyond_proposition);
  m.def(
      "threshold_scan",
      [](const ProblemParams& base, const std::vector<double>& fractions, const RadialGrid& g, double damping,
         double tol, std::size_t max_iter) {
        return threshold_scan(base, fractions, g, solver_config(damping, tol, max_iter, {}));
      },
      py::arg("params"), py::arg("fractions"), py::arg("grid"), py::arg("damping") = 0.5, py::arg("tol") = 1e-8,
      py::arg("max_iter") = 50000, py::call_guard<py::gil_scoped_release>());

  py::class_<ExplicitSolution2D>(m, "ExplicitSolution2D")
      .def(py::init<double, double, std::complex<double>>(), py::arg("alpha"), py::arg("lambda_scale") = 1.0,
           py::arg("zeta") = std::complex<double>{})
      .def_readonly("alpha", &ExplicitSolution2D::alpha)
      .def_readonly("lambda_scale", &ExplicitSolution2D::lambda_scale)
      .def_readonly("zeta", &ExplicitSolution2D::zeta)
      .def("__call__", [](const ExplicitSolution2D& s, double x1, double x2) { return eval_u(s, x1, x2); });
  m.def("eval_u", &eval_u, py::arg("solution"), py::arg("x1"), py::arg("x2"));

  py::class_<CurvatureResult>(m, "CurvatureResult")
      .def_readonly("value", &CurvatureResult::value)
      .def_readonly("coarse", &CurvatureResult::coarse)
      .def_readonly("disagreement", &CurvatureResult::disagreement);
  m.def(
      "total_curvature",
      [](const ExplicitSolution2D& s, std::size_t radial_nodes, std::size_t angular_nodes, double refinement_tol) {
        return total_curvature(s, Oracle2DGridSpec{radial_nodes, angular_nodes, refinement_tol});
      },
      py::arg("solution"), py::arg("radial_nodes") = 512, py::arg("angular_nodes") = 256,
      py::arg("refinement_tol") = 1e-6);

  py::class_<NormalityFit>(m, "NormalityFit")
      .def_readonly("c", &NormalityFit::c)
      .def_readonly("residual", &NormalityFit::residual)
      .def_readonly("radii", &NormalityFit::radii)
      .def_readonly("errors", &NormalityFit::errors);
  m.def("normality_residual_2d", &normality_residual_2d, py::arg("solution"), py::arg("nodes") = 512,
        py::arg("test_radius") = 5.0);

  // Runs one CLI command in-process; returns (exit_code, report as JSON text).
  m.def(
      "_run",
      [](std::vector<std::string> args) -> py::tuple {
        args.insert(args.begin(), "qcurv");
        RunConfig cfg;
        try {
          cfg = parse_and_validate(args);
        } catch (const HelpRequested& h) {
          return py::make_tuple(0, py::none(), h.text);
        }
        RunReport r;
        {
          py::gil_scoped_release release;
          r = run(cfg);
        }
        return py::make_tuple(r.exit_code, r.json.dump(), r.reason);
      },
      py::arg("args"));
}
