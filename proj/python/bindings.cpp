#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "phasered/diagnostics.hpp"
#include "phasered/errors.hpp"
#include "phasered/limit_cycle.hpp"
#include "phasered/models.hpp"
#include "phasered/network.hpp"
#include "phasered/phase_geometry.hpp"
#include "phasered/reduction.hpp"

namespace py = pybind11;
using namespace phasered;

namespace {

Mat stack(const std::vector<Vec>& rows) {
  if (rows.empty()) return Mat(0, 0);
  Mat m(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return m;
}

SensitivityMethod parse_method(const std::string& s) {
  if (s == "adjoint") return SensitivityMethod::adjoint;
  if (s == "finite_difference") return SensitivityMethod::finite_difference;
  throw InvalidArgument("method must be 'adjoint' or 'finite_difference'");
}

CouplingKind parse_coupling(const std::string& s) {
  if (s == "direct") return CouplingKind::direct;
  if (s == "diffusive") return CouplingKind::diffusive;
  throw InvalidArgument("coupling must be 'direct' or 'diffusive'");
}

Vec imaginary_exp(double theta) {
  Vec z(2);
  z << std::sin(theta), std::cos(theta);
  return z;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Phase reduction of limit-cycle oscillators";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<IntegrationError>(m, "IntegrationError", error.ptr());
  py::register_exception<CrossingError>(m, "CrossingError", error.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", error.ptr());
  py::register_exception<StabilityError>(m, "StabilityError", error.ptr());

  py::class_<OscillatorModel>(m, "OscillatorModel")
      .def_readonly("name", &OscillatorModel::name)
      .def_readonly("dim", &OscillatorModel::dim)
      .def_readonly("params", &OscillatorModel::params)
      .def("f", [](const OscillatorModel& self, const Vec& x) { return self.f(x); })
      .def("jacobian", &OscillatorModel::jacobian_at)
      .def("in_basin", &OscillatorModel::in_basin)
      .def("analytic_phase",
           [](const OscillatorModel& self, const Vec& x) -> py::object {
             if (!self.analytic_phase) return py::none();
             return py::float_(self.analytic_phase(x));
           })
      .def("analytic_Z", [](const OscillatorModel& self, double theta) -> py::object {
        if (!self.analytic_Z) return py::none();
        return py::cast(Vec(self.analytic_Z(theta)));
      });

  m.def("make_model",
        [](const std::string& name, const std::map<std::string, double>& params) {
          Params p(params.begin(), params.end());
          return make_model(name, p);
        },
        py::arg("name"), py::arg("params") = std::map<std::string, double>{});

  py::class_<LimitCycle>(m, "LimitCycle")
      .def_readonly("period", &LimitCycle::period)
      .def_readonly("omega0", &LimitCycle::omega0)
      .def_readonly("floquet", &LimitCycle::floquet)
      .def_readonly("grid", &LimitCycle::grid)
      .def_readonly("anchor", &LimitCycle::anchor)
      .def_property_readonly("points",
                             [](const LimitCycle& c) { return stack(c.points); })
      .def("at", &LimitCycle::at, py::arg("theta"));

  m.def("find_limit_cycle",
        [](const OscillatorModel& model, const Vec& guess, std::size_t grid_size) {
          CycleOptions opt;
          opt.grid_size = grid_size;
          return find_limit_cycle(model, guess, opt);
        },
        py::arg("model"), py::arg("guess"), py::arg("grid_size") = 256);
  m.def("floquet_exponent",
        [](const OscillatorModel& model, const LimitCycle& c) {
          return floquet_exponent(model, c);
        });
  m.def("flow", [](const OscillatorModel& model, const Vec& x, double t) {
    return flow(model, x, t);
  });

  m.def("asymptotic_phase",
        [](const OscillatorModel& model, const LimitCycle& c, const Vec& x) {
          return asymptotic_phase(model, c, x);
        },
        py::arg("model"), py::arg("cycle"), py::arg("x"));

  py::class_<PhaseSensitivity>(m, "PhaseSensitivity")
      .def_readonly("grid", &PhaseSensitivity::grid)
      .def_readonly("omega0", &PhaseSensitivity::omega0)
      .def_readonly("prescribed", &PhaseSensitivity::prescribed)
      .def_property_readonly("Z", [](const PhaseSensitivity& s) { return stack(s.Z); })
      .def("at", &PhaseSensitivity::at, py::arg("theta"));

  m.def("phase_sensitivity",
        [](const OscillatorModel& model, const LimitCycle& c,
           const std::string& method) {
          return phase_sensitivity(model, c, parse_method(method));
        },
        py::arg("model"), py::arg("cycle"), py::arg("method") = "adjoint");
  m.def("normalization_error", &normalization_error);

  py::class_<Isochron>(m, "Isochron")
      .def_readonly("theta", &Isochron::theta)
      .def_readonly("residual", &Isochron::residual)
      .def_readonly("extent", &Isochron::extent)
      .def_property_readonly("points", [](const Isochron& i) { return stack(i.points); });

  m.def("compute_isochron",
        [](const OscillatorModel& model, const LimitCycle& c, double theta,
           std::pair<double, double> radial_range, std::size_t n_points) {
          return compute_isochron(model, c, theta, radial_range, n_points);
        },
        py::arg("model"), py::arg("cycle"), py::arg("theta"),
        py::arg("radial_range"), py::arg("n_points"));

  py::class_<CouplingFunction>(m, "CouplingFunction")
      .def_property_readonly("grid", &CouplingFunction::grid)
      .def_property_readonly("values", &CouplingFunction::values)
      .def_property_readonly("provenance",
                             [](const CouplingFunction& q) { return to_string(q.provenance()); })
      .def("__call__", &CouplingFunction::operator())
      .def("derivative", &CouplingFunction::derivative)
      .def("max_abs", &CouplingFunction::max_abs)
      .def_static("from_function",
                  [](const std::function<double(double)>& g, std::size_t n) {
                    return CouplingFunction::from_function(g, n);
                  },
                  py::arg("g"), py::arg("n") = 256);

  m.def("average_periodic",
        [](const PhaseSensitivity& Z, const LimitCycle& c, int component,
           double amplitude, double frequency, double omega_force) {
          const Perturbation p =
              sinusoidal_forcing(c.dim(), component, amplitude, frequency);
          AverageOptions opt;
          opt.threads = 1;
          return average_periodic(Z, c, p, omega_force, opt);
        },
        py::arg("Z"), py::arg("cycle"), py::arg("component"),
        py::arg("amplitude"), py::arg("frequency"), py::arg("omega_force"));

  m.def("mean_value",
        [](const std::function<double(double)>& g, double t_max, double tol) {
          return mean_value(g, t_max, tol);
        },
        py::arg("g"), py::arg("t_max"), py::arg("tol") = 1e-6);

  py::class_<FixedPoint>(m, "FixedPoint")
      .def_readonly("psi", &FixedPoint::psi)
      .def_readonly("stable", &FixedPoint::stable)
      .def_readonly("slope", &FixedPoint::slope);
  py::class_<LockResult>(m, "LockResult")
      .def_readonly("locked", &LockResult::locked)
      .def_readonly("fixed_points", &LockResult::fixed_points)
      .def_readonly("condition_value", &LockResult::condition_value);
  m.def("lock_analysis", &lock_analysis, py::arg("delta"), py::arg("epsilon"),
        py::arg("q"));

  py::class_<PhaseModel>(m, "PhaseModel")
      .def_readonly("N", &PhaseModel::N)
      .def_readonly("epsilon", &PhaseModel::epsilon)
      .def_readonly("Omega", &PhaseModel::Omega)
      .def_readonly("warnings", &PhaseModel::warnings)
      .def_readonly("adjoint_max_q", &PhaseModel::adjoint_max_q)
      .def("max_abs_q", &PhaseModel::max_abs_q)
      .def("q", [](const PhaseModel& pm, std::size_t i, std::size_t j) -> py::object {
        if (i >= pm.N || j >= pm.N) throw InvalidArgument("node index out of range");
        if (!pm.Q[i][j]) return py::none();
        return py::cast(*pm.Q[i][j]);
      });

  m.def("build_phase_model",
        [](const std::vector<OscillatorModel>& models, double epsilon,
           const std::vector<std::vector<std::tuple<double, double, double>>>& adjacency,
           const std::string& coupling, double nu1, double nu2,
           const std::vector<std::string>& prescribed_z) {
          NetworkSpec spec;
          spec.models = models;
          spec.epsilon = epsilon;
          for (const auto& row : adjacency) {
            spec.adjacency.emplace_back();
            for (const auto& [a, b, c] : row) spec.adjacency.back().push_back({a, b, c});
          }
          spec.coupling = parse_coupling(coupling);
          spec.nu1 = nu1;
          spec.nu2 = nu2;
          for (const auto& z : prescribed_z) {
            if (z == "imaginary_exp") spec.prescribed_Z.emplace_back(imaginary_exp);
            else if (z.empty()) spec.prescribed_Z.emplace_back();
            else throw InvalidArgument("prescribed_z entries must be '' or 'imaginary_exp'");
          }
          return build_phase_model(spec);
        },
        py::arg("models"), py::arg("epsilon"), py::arg("adjacency"),
        py::arg("coupling") = "diffusive", py::arg("nu1") = 0.0,
        py::arg("nu2") = 0.0, py::arg("prescribed_z") = std::vector<std::string>{});

  py::class_<SyncReport>(m, "SyncReport")
      .def_readonly("S", &SyncReport::S)
      .def_readonly("locked", &SyncReport::locked)
      .def_readonly("psi_star", &SyncReport::psi_star)
      .def_readonly("slips", &SyncReport::slips)
      .def_readonly("threshold", &SyncReport::threshold);
  m.def("sync_measure", &sync_measure, py::arg("times"), py::arg("phi"),
        py::arg("s_threshold"), py::arg("transient_frac") = 0.5);

  py::class_<PairExperiment>(m, "PairExperiment")
      .def(py::init<>())
      .def_readwrite("omega", &PairExperiment::omega)
      .def_readwrite("c2", &PairExperiment::c2)
      .def_readwrite("a", &PairExperiment::a)
      .def_readwrite("tail_min", &PairExperiment::tail_min)
      .def_readwrite("tail_per_eps", &PairExperiment::tail_per_eps)
      .def_readwrite("sample_dt", &PairExperiment::sample_dt)
      .def_readwrite("threshold_rel", &PairExperiment::threshold_rel);
  m.def("run_pair", &run_pair, py::arg("experiment"), py::arg("detuning"),
        py::arg("epsilon"));

  py::class_<CriticalResult>(m, "CriticalResult")
      .def_property_readonly("status",
                             [](const CriticalResult& r) { return to_string(r.status); })
      .def_readonly("epsilon_c", &CriticalResult::epsilon_c)
      .def_readonly("lower", &CriticalResult::lower);
  m.def("critical_coupling",
        [](const PairExperiment& ex, double detuning, const std::vector<double>& grid,
           double rel_width) {
          CriticalOptions opt;
          opt.rel_width = rel_width;
          opt.threads = 1;
          return critical_coupling(ex, detuning, grid, opt);
        },
        py::arg("experiment"), py::arg("detuning"), py::arg("eps_grid"),
        py::arg("rel_width") = 0.05);

  py::class_<ScalingFit>(m, "ScalingFit")
      .def_readonly("points", &ScalingFit::points)
      .def_readonly("exponent", &ScalingFit::exponent)
      .def_readonly("intercept", &ScalingFit::intercept)
      .def_readonly("r_squared", &ScalingFit::r_squared)
      .def_readonly("warnings", &ScalingFit::warnings);
  m.def("scaling_fit",
        [](const std::vector<std::pair<double, double>>& points) {
          return scaling_fit(points);
        },
        py::arg("points"));

  py::class_<OrderRatio>(m, "OrderRatio")
      .def_readonly("first_order", &OrderRatio::first_order)
      .def_readonly("effective", &OrderRatio::effective)
      .def_readonly("ratio", &OrderRatio::ratio)
      .def_readonly("first_order_vanishing", &OrderRatio::first_order_vanishing);
  m.def("order_ratio", py::overload_cast<double, double>(&order_ratio),
        py::arg("first_order_force"), py::arg("effective_force"));
  m.def("order_ratio_pair",
        py::overload_cast<const PhaseModel&, double, double>(&order_ratio),
        py::arg("phase_model"), py::arg("epsilon"), py::arg("detuning"));
}
