#include "phasered/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>

#include "phasered/errors.hpp"
#include "phasered/ode.hpp"
#include "phasered/parallel.hpp"
#include "phasered/table.hpp"

namespace phasered {

const char* to_string(CouplingProvenance provenance) {
  switch (provenance) {
    case CouplingProvenance::periodic_average:
      return "periodic_average";
    case CouplingProvenance::mean_value:
      return "mean_value";
    case CouplingProvenance::analytic:
      return "analytic";
  }
  return "unknown";
}

CouplingFunction::CouplingFunction(std::vector<double> values,
                                   CouplingProvenance provenance)
    : grid_(phase_grid(values.size())),
      values_(std::move(values)),
      provenance_(provenance) {
  for (double v : values_)
    if (!std::isfinite(v))
      throw InvalidArgument("coupling function has non-finite values");
  series_ = PeriodicSeries(values_);
}

CouplingFunction CouplingFunction::from_function(
    const std::function<double(double)>& g, std::size_t m,
    CouplingProvenance provenance) {
  std::vector<double> values;
  values.reserve(m);
  for (double phi : phase_grid(m)) values.push_back(g(phi));
  return CouplingFunction(std::move(values), provenance);
}

double CouplingFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

CouplingFunction CouplingFunction::scaled(double factor) const {
  std::vector<double> v = values_;
  for (double& x : v) x *= factor;
  return CouplingFunction(std::move(v), provenance_);
}

double gamma_instantaneous(const PhaseSensitivity& Z, const LimitCycle& cycle,
                           const Perturbation& pert, double theta, double t) {
  return Z.at(theta).dot(pert(cycle.at(theta), t));
}

PhaseTrajectory simulate_reduced(const PhaseSensitivity& Z,
                                 const LimitCycle& cycle,
                                 const Perturbation& pert, double theta0,
                                 std::pair<double, double> t_span,
                                 const std::vector<double>& times,
                                 Tolerance tol) {
  PhaseTrajectory out;
  const double eps = pert.amplitude;
  if (std::abs(eps) > weak_coupling_limit)
    out.warnings.push_back("epsilon = " + format_double(eps) +
                           " exceeds the weak-coupling range of the reduction");
  for (double t : times)
    if (t < t_span.first || t > t_span.second)
      throw InvalidArgument("sample time outside the integration span");
  const double w = cycle.omega0;
  out.times = times;
  out.theta.assign(1, {});
  if (eps == 0.0) {
    for (double t : times) out.theta[0].push_back(theta0 + w * (t - t_span.first));
    return out;
  }
  const Rhs rhs = [&](double t, const Vec& y, Vec& dy) {
    dy[0] = w + eps * gamma_instantaneous(Z, cycle, pert, y[0], t);
  };
  OdeOptions opt;
  opt.tol = tol;
  Vec y0(1);
  y0[0] = theta0;
  for (const Vec& y : sample(rhs, y0, t_span.first, times, opt))
    out.theta[0].push_back(y[0]);
  return out;
}

CouplingFunction average_periodic(const PhaseSensitivity& Z,
                                  const LimitCycle& cycle,
                                  const Perturbation& pert, double omega_force,
                                  const AverageOptions& options) {
  if (!pert.period)
    throw InvalidArgument("periodic averaging needs a periodic perturbation");
  if (!(omega_force > 0.0))
    throw InvalidArgument("forcing frequency must be positive");
  const double T = two_pi / omega_force;
  const double tp = *pert.period;
  const double ratio = T / tp;
  const double panels = std::round(ratio);
  if (panels < 1.0 || std::abs(ratio - panels) > 1e-9 * ratio)
    throw InvalidArgument(
        "averaging window 2π/Ω must be a whole number of forcing periods");

  using Rule = boost::math::quadrature::gauss<double, 64>;
  const auto n_panels = static_cast<std::size_t>(panels);
  std::vector<double> values(options.grid_size);
  const std::vector<double> grid = phase_grid(options.grid_size);
  parallel_for(grid.size(), options.threads, [&](std::size_t k) {
    const double psi = grid[k];
    auto integrand = [&](double t) {
      const double theta = psi + omega_force * t;
      return Z.at(theta).dot(pert(cycle.at(theta), t));
    };
    double sum = 0.0;
    for (std::size_t p = 0; p < n_panels; ++p) {
      const double a = static_cast<double>(p) * tp;
      sum += Rule::integrate(integrand, a, a + tp);
    }
    values[k] = sum / T;
  });
  return CouplingFunction(std::move(values),
                          CouplingProvenance::periodic_average);
}

double mean_value(const std::function<double(double)>& g, double t_max,
                  double tol, const MeanValueOptions& options) {
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  if (!(options.initial_window > 0.0) || !(options.panel > 0.0))
    throw InvalidArgument("mean-value windows must be positive");
  if (t_max < options.initial_window)
    throw InvalidArgument("t_max is shorter than the first averaging window");

  using Rule = boost::math::quadrature::gauss<double, 20>;
  auto window_average = [&](double W) {
    const auto panels =
        static_cast<std::size_t>(std::ceil(W / options.panel));
    const double h = W / static_cast<double>(panels);
    auto weighted = [&](double t) {
      return g(t) * (1.0 - std::cos(two_pi * t / W));
    };
    double sum = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
      const double a = static_cast<double>(p) * h;
      sum += Rule::integrate(weighted, a, a + h);
    }
    return sum / W;
  };

  double W = options.initial_window;
  double prev = window_average(W);
  double spread = std::numeric_limits<double>::infinity();
  while (2.0 * W <= t_max) {
    W *= 2.0;
    const double cur = window_average(W);
    spread = std::abs(cur - prev);
    prev = cur;
    if (spread < tol) return cur;
  }
  throw ConvergenceError("mean value did not converge within t_max = " +
                             format_double(t_max),
                         prev, spread);
}

LockResult lock_analysis(double delta, double epsilon,
                         const CouplingFunction& q) {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (q.size() == 0) throw InvalidArgument("coupling function is empty");
  LockResult out;
  out.condition_value = std::abs(delta) / epsilon;

  auto F = [&](double psi) { return delta + epsilon * q(psi); };
  constexpr std::size_t scan = 4096;
  const double h = two_pi / static_cast<double>(scan);
  std::vector<double> roots;
  double f_prev = F(0.0);
  if (f_prev == 0.0) roots.push_back(0.0);
  for (std::size_t i = 1; i <= scan; ++i) {
    const double a = h * static_cast<double>(i - 1);
    const double b = h * static_cast<double>(i);
    const double f_next = i == scan ? F(0.0) : F(b);
    if (f_next == 0.0) {
      if (i < scan) roots.push_back(b);
    } else if (f_prev != 0.0 && (f_prev < 0.0) != (f_next < 0.0)) {
      std::uintmax_t iters = 200;
      auto tol = [](double x, double y) {
        return std::abs(x - y) <= 1e-15 * std::max(1.0, std::abs(x));
      };
      const auto r =
          boost::math::tools::toms748_solve(F, a, b, f_prev, f_next, tol, iters);
      roots.push_back(0.5 * (r.first + r.second));
    }
    f_prev = f_next;
  }
  for (double& r : roots) {
    if (two_pi - r < 1e-12) r = 0.0;
    r = wrap_phase(r);
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](double a, double b) { return b - a < 1e-12; }),
              roots.end());
  for (double r : roots) {
    const double slope = epsilon * q.derivative(r);
    out.fixed_points.push_back({r, slope < 0.0, slope});
  }
  out.locked = std::any_of(out.fixed_points.begin(), out.fixed_points.end(),
                           [](const FixedPoint& p) { return p.stable; });
  return out;
}

PhaseTrajectory simulate_averaged(double delta, double epsilon,
                                  const CouplingFunction& q, double psi0,
                                  const std::vector<double>& times,
                                  Tolerance tol) {
  PhaseTrajectory out;
  out.times = times;
  out.theta.assign(1, {});
  if (times.empty()) return out;
  const Rhs rhs = [&](double, const Vec& y, Vec& dy) {
    dy[0] = delta + epsilon * q(y[0]);
  };
  OdeOptions opt;
  opt.tol = tol;
  Vec y0(1);
  y0[0] = psi0;
  const double t0 = std::min(0.0, times.front());
  for (const Vec& y : sample(rhs, y0, t0, times, opt)) out.theta[0].push_back(y[0]);
  return out;
}

double phase_of(const OscillatorModel& model, const LimitCycle& cycle,
                const Vec& x, bool prefer_analytic,
                const PhaseOptions& options) {
  if (prefer_analytic && model.has_analytic_phase()) {
    if (!model.in_basin(x))
      throw InvalidArgument("state lies in the excluded phaseless neighbourhood");
    return wrap_phase(model.analytic_phase(x));
  }
  return asymptotic_phase(model, cycle, x, options);
}

ReductionError forced_reduction_error(const OscillatorModel& model,
                                      const LimitCycle& cycle,
                                      const PhaseSensitivity& Z,
                                      const Perturbation& pert, double theta0,
                                      double horizon, std::size_t samples,
                                      Tolerance tol) {
  if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
  if (samples < 2) throw InvalidArgument("need at least two samples");
  ReductionError out;
  out.epsilon = pert.amplitude;
  out.horizon = horizon;
  for (std::size_t k = 0; k < samples; ++k)
    out.times.push_back(horizon * static_cast<double>(k) /
                        static_cast<double>(samples - 1));

  const double eps = pert.amplitude;
  const Rhs full = [&](double t, const Vec& x, Vec& dx) {
    dx = model.f(x) + eps * pert(x, t);
  };
  OdeOptions opt;
  opt.tol = tol;
  opt.admissible = [&model](const Vec& x) { return model.in_basin(x); };
  const auto states =
      sample(full, cycle_point(model, cycle, theta0), 0.0, out.times, opt);
  const PhaseTrajectory red =
      simulate_reduced(Z, cycle, pert, theta0, {0.0, horizon}, out.times, tol);

  double sq = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const double full_phase = asymptotic_phase(model, cycle, states[k]);
    const double red_phase = wrap_phase(red.theta[0][k]);
    const double e = std::abs(wrap_difference(full_phase - red_phase));
    out.full_phase.push_back(full_phase);
    out.reduced_phase.push_back(red_phase);
    out.max_error = std::max(out.max_error, e);
    sq += e * e;
  }
  out.rms_error = std::sqrt(sq / static_cast<double>(samples));
  return out;
}

void write_coupling_csv(const CouplingFunction& q, std::ostream& os) {
  Table table({"phi", "q"});
  for (std::size_t k = 0; k < q.size(); ++k)
    table.add_row({q.grid()[k], q.values()[k]});
  table.write_csv(os);
}

void write_phase_csv(const PhaseTrajectory& trajectory, std::ostream& os) {
  std::vector<std::string> cols{"t"};
  for (std::size_t i = 0; i < trajectory.nodes(); ++i)
    cols.push_back("theta" + std::to_string(i + 1));
  Table table(std::move(cols));
  for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
    std::vector<double> row{trajectory.times[k]};
    for (std::size_t i = 0; i < trajectory.nodes(); ++i)
      row.push_back(trajectory.wrapped(i, k));
    table.add_row(std::move(row));
  }
  table.write_csv(os);
}

}  // namespace phasered
