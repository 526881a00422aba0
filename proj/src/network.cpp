#include "phasered/network.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "phasered/errors.hpp"
#include "phasered/ode.hpp"
#include "phasered/table.hpp"

namespace phasered {

Vec NetworkSpec::h(const Vec& xi, const Vec& xj) const {
  switch (coupling) {
    case CouplingKind::direct:
      return xj;
    case CouplingKind::diffusive:
      return xj - xi;
    case CouplingKind::custom:
      return custom_h(xi, xj);
  }
  return xj;
}

void NetworkSpec::validate() const {
  const std::size_t n = size();
  if (n == 0) throw InvalidArgument("network has no nodes");
  const int dim = models.front().dim;
  for (const auto& m : models)
    if (m.dim != dim)
      throw InvalidArgument("all network nodes must share one state dimension");
  if (adjacency.size() != n)
    throw InvalidArgument("adjacency must be N x N");
  bool oscillating = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (adjacency[i].size() != n)
      throw InvalidArgument("adjacency must be N x N");
    for (std::size_t j = 0; j < n; ++j) {
      const EdgeWeight& w = adjacency[i][j];
      if (!std::isfinite(w.a) || !std::isfinite(w.b) || !std::isfinite(w.c))
        throw InvalidArgument("adjacency weights must be finite");
      if (i == j && !w.is_zero() && !allow_self_coupling)
        throw InvalidArgument("self-coupling a_ii must be zero");
      if (w.b != 0.0 || w.c != 0.0) oscillating = true;
    }
  }
  if (oscillating && (!(nu1 > 0.0) || !(nu2 > 0.0)))
    throw InvalidArgument("nu1 and nu2 must be positive for time-varying weights");
  if (coupling == CouplingKind::custom && !custom_h)
    throw InvalidArgument("custom coupling needs a pair function h");
  if (!prescribed_Z.empty() && prescribed_Z.size() != n)
    throw InvalidArgument("prescribed_Z needs one entry per node");
  if (!cycle_guess.empty() && cycle_guess.size() != n)
    throw InvalidArgument("cycle_guess needs one entry per node");
  if (!std::isfinite(epsilon)) throw InvalidArgument("epsilon must be finite");
}

bool NetworkSpec::time_varying() const {
  for (const auto& row : adjacency)
    for (const auto& w : row)
      if (!w.is_constant()) return true;
  return false;
}

double PhaseModel::max_abs_q() const {
  double m = 0.0;
  for (const auto& row : Q)
    for (const auto& q : row)
      if (q) m = std::max(m, q->max_abs());
  return m;
}

CouplingFunction pair_coupling(const NetworkSpec& spec, const LimitCycle& ci,
                               const PhaseSensitivity& Zi,
                               const LimitCycle& cj) {
  const std::size_t m = ci.size();
  if (cj.size() != m || Zi.Z.size() != m)
    throw InvalidArgument("pair coupling needs cycles on a common grid");
  std::vector<double> values(m);
  for (std::size_t k = 0; k < m; ++k) {
    double sum = 0.0;
    for (std::size_t s = 0; s < m; ++s)
      sum += Zi.Z[s].dot(spec.h(ci.points[s], cj.points[(s + k) % m]));
    values[k] = sum / static_cast<double>(m);
  }
  return CouplingFunction(std::move(values),
                          CouplingProvenance::periodic_average);
}

PhaseModel build_phase_model(const NetworkSpec& spec,
                             const NetworkOptions& options) {
  spec.validate();
  const std::size_t n = spec.size();
  PhaseModel pm;
  pm.N = n;
  pm.epsilon = spec.epsilon;
  if (std::abs(spec.epsilon) > weak_coupling_limit)
    pm.warnings.push_back("epsilon = " + format_double(spec.epsilon) +
                          " exceeds the weak-coupling range of the reduction");

  bool any_prescribed = false;
  for (std::size_t i = 0; i < n; ++i) {
    const OscillatorModel& model = spec.models[i];
    Vec guess;
    if (!spec.cycle_guess.empty()) {
      guess = spec.cycle_guess[i];
    } else {
      guess = model.center.size() == model.dim ? model.center
                                               : Vec::Zero(model.dim);
      guess[0] += 1.0;
    }
    pm.cycles.push_back(find_limit_cycle(model, guess, options.cycle));
    pm.Omega.push_back(pm.cycles.back().omega0);
    const bool given = !spec.prescribed_Z.empty() && spec.prescribed_Z[i];
    any_prescribed = any_prescribed || given;
    pm.prescribed.push_back(given);
    pm.sensitivities.push_back(
        given ? prescribed_sensitivity(pm.cycles.back(), spec.prescribed_Z[i])
              : phase_sensitivity(model, pm.cycles.back(),
                                  SensitivityMethod::adjoint,
                                  options.sensitivity));
  }

  const bool varying = spec.time_varying();
  pm.mean_weight.assign(n * n, 0.0);
  pm.Q.assign(n, std::vector<std::optional<CouplingFunction>>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const EdgeWeight& w = spec.adjacency[i][j];
      if (w.is_zero()) continue;
      double mean = w.a;
      if (!w.is_constant()) {
        mean = mean_value(
            [&](double t) { return w.at(t, spec.nu1, spec.nu2); },
            options.mean_t_max, options.mean_tol);
      }
      pm.mean_weight[i * n + j] = mean;
      const CouplingFunction h = pair_coupling(spec, pm.cycles[i],
                                               pm.sensitivities[i],
                                               pm.cycles[j]);
      std::vector<double> v = h.values();
      for (double& x : v) x *= mean;
      pm.Q[i][j] = CouplingFunction(std::move(v),
                                    varying ? CouplingProvenance::mean_value
                                            : CouplingProvenance::periodic_average);
    }
  }

  if (any_prescribed) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const PhaseSensitivity Za =
          pm.prescribed[i] ? phase_sensitivity(spec.models[i], pm.cycles[i],
                                               SensitivityMethod::adjoint,
                                               options.sensitivity)
                           : pm.sensitivities[i];
      for (std::size_t j = 0; j < n; ++j) {
        const double mean = pm.mean_weight[i * n + j];
        if (mean == 0.0) continue;
        worst = std::max(worst, std::abs(mean) *
                                    pair_coupling(spec, pm.cycles[i], Za,
                                                  pm.cycles[j])
                                        .max_abs());
      }
    }
    pm.adjoint_max_q = worst;
  }

  const double qmax = pm.max_abs_q();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (!pm.Q[i][j]) continue;
      const double detuning = std::abs(pm.Omega[i] - pm.Omega[j]);
      if (detuning > 10.0 * std::abs(spec.epsilon) * qmax)
        pm.warnings.push_back(
            "detuning " + format_double(detuning) + " between nodes " +
            std::to_string(i + 1) + " and " + std::to_string(j + 1) +
            " is large compared with the first-order coupling");
    }
  return pm;
}

NetworkTrajectory simulate_full(const NetworkSpec& spec, const Vec& x0,
                                double t0, const std::vector<double>& times,
                                Tolerance tol) {
  spec.validate();
  const std::size_t n = spec.size();
  const int d = spec.models.front().dim;
  if (x0.size() != static_cast<Eigen::Index>(n) * d)
    throw InvalidArgument("initial state must stack all node states");
  for (std::size_t i = 0; i < n; ++i)
    if (!spec.models[i].in_basin(
            x0.segment(static_cast<Eigen::Index>(i) * d, d)))
      throw InvalidArgument("node " + std::to_string(i + 1) +
                            " starts outside its basin region");

  const double eps = spec.epsilon;
  const Rhs rhs = [&](double t, const Vec& x, Vec& dx) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto off = static_cast<Eigen::Index>(i) * d;
      const Vec xi = x.segment(off, d);
      Vec dxi = spec.models[i].f(xi);
      if (eps != 0.0) {
        for (std::size_t j = 0; j < n; ++j) {
          const EdgeWeight& w = spec.adjacency[i][j];
          if (w.is_zero()) continue;
          dxi += eps * w.at(t, spec.nu1, spec.nu2) *
                 spec.h(xi, x.segment(static_cast<Eigen::Index>(j) * d, d));
        }
      }
      dx.segment(off, d) = dxi;
    }
  };
  OdeOptions opt;
  opt.tol = tol;
  opt.admissible = [&](const Vec& x) {
    for (std::size_t i = 0; i < n; ++i)
      if (!spec.models[i].in_basin(
              x.segment(static_cast<Eigen::Index>(i) * d, d)))
        return false;
    return true;
  };

  NetworkTrajectory out;
  out.times = times;
  out.nodes = n;
  out.node_dim = d;
  try {
    out.states = sample(rhs, x0, t0, times, opt);
  } catch (const IntegrationError& e) {
    if (e.kind() == IntegrationError::Kind::left_region)
      throw IntegrationError(e.kind(), e.time(),
                             std::string("a network node escaped its basin: ") +
                                 e.what());
    throw;
  }
  return out;
}

PhaseTrajectory simulate_phase_model(const PhaseModel& pm,
                                     const std::vector<double>& theta0,
                                     double t0,
                                     const std::vector<double>& times,
                                     Tolerance tol) {
  const std::size_t n = pm.N;
  if (theta0.size() != n)
    throw InvalidArgument("need one initial phase per node");
  PhaseTrajectory out;
  out.times = times;
  out.theta.assign(n, {});
  const double eps = pm.epsilon;
  const Rhs rhs = [&](double, const Vec& th, Vec& dth) {
    for (std::size_t i = 0; i < n; ++i) {
      double v = pm.Omega[i];
      if (eps != 0.0)
        for (std::size_t j = 0; j < n; ++j)
          if (pm.Q[i][j])
            v += eps * (*pm.Q[i][j])(th[static_cast<Eigen::Index>(j)] -
                                     th[static_cast<Eigen::Index>(i)]);
      dth[static_cast<Eigen::Index>(i)] = v;
    }
  };
  OdeOptions opt;
  opt.tol = tol;
  Vec y0(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) y0[static_cast<Eigen::Index>(i)] = theta0[i];
  for (const Vec& y : sample(rhs, y0, t0, times, opt))
    for (std::size_t i = 0; i < n; ++i)
      out.theta[i].push_back(y[static_cast<Eigen::Index>(i)]);
  return out;
}

Vec on_cycle_state(const NetworkSpec& spec, const PhaseModel& pm,
                   const std::vector<double>& theta) {
  const std::size_t n = spec.size();
  if (theta.size() != n) throw InvalidArgument("need one phase per node");
  const int d = spec.models.front().dim;
  Vec x(static_cast<Eigen::Index>(n) * d);
  for (std::size_t i = 0; i < n; ++i)
    x.segment(static_cast<Eigen::Index>(i) * d, d) =
        cycle_point(spec.models[i], pm.cycles[i], theta[i]);
  return x;
}

PhaseTrajectory node_phases(const NetworkSpec& spec, const PhaseModel& pm,
                            const NetworkTrajectory& trajectory) {
  PhaseTrajectory out;
  out.times = trajectory.times;
  out.theta.assign(trajectory.nodes, {});
  for (std::size_t i = 0; i < trajectory.nodes; ++i) {
    auto& th = out.theta[i];
    for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
      const double p =
          phase_of(spec.models[i], pm.cycles[i], trajectory.node(k, i), true);
      // Lift assuming successive samples advance by less than π.
      th.push_back(k == 0 ? p : th.back() + wrap_difference(p - th.back()));
    }
  }
  return out;
}

ComparisonReport compare_full_vs_reduced(const NetworkSpec& spec,
                                         const PhaseModel& pm,
                                         double horizon_mult,
                                         const CompareOptions& options) {
  if (!(horizon_mult > 0.0))
    throw InvalidArgument("horizon multiplier must be positive");
  if (options.samples < 2) throw InvalidArgument("need at least two samples");
  const std::size_t n = spec.size();
  std::vector<double> theta0 = options.theta0;
  if (theta0.empty()) theta0.assign(n, 0.0);

  ComparisonReport rep;
  rep.epsilon = spec.epsilon;
  double period = 0.0;
  for (const auto& c : pm.cycles) period = std::max(period, c.period);
  rep.horizon = spec.epsilon != 0.0 ? horizon_mult / std::abs(spec.epsilon)
                                    : horizon_mult * period;
  std::vector<double> times(options.samples);
  for (std::size_t k = 0; k < times.size(); ++k)
    times[k] = rep.horizon * static_cast<double>(k) /
               static_cast<double>(times.size() - 1);

  const NetworkTrajectory full = simulate_full(
      spec, on_cycle_state(spec, pm, theta0), 0.0, times, options.full_tol);
  rep.full = node_phases(spec, pm, full);
  rep.reduced =
      simulate_phase_model(pm, theta0, 0.0, times, options.reduced_tol);

  double sq = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double e = std::abs(
          wrap_difference(rep.full.theta[i][k] - rep.reduced.theta[i][k]));
      rep.max_error = std::max(rep.max_error, e);
      sq += e * e;
      ++count;
      if (i > 0) {
        const double df = rep.full.theta[i][k] - rep.full.theta[0][k];
        const double dr = rep.reduced.theta[i][k] - rep.reduced.theta[0][k];
        rep.max_difference_error =
            std::max(rep.max_difference_error, std::abs(wrap_difference(df - dr)));
      }
    }
  }
  rep.rms_error = std::sqrt(sq / static_cast<double>(count));
  rep.exceeds_first_order = rep.max_error > 2.0 * std::abs(spec.epsilon);
  return rep;
}

void write_network_csv(const NetworkTrajectory& trajectory, std::ostream& os) {
  std::vector<std::string> cols{"t"};
  for (std::size_t i = 0; i < trajectory.nodes; ++i)
    for (int c = 0; c < trajectory.node_dim; ++c)
      cols.push_back("x" + std::to_string(i + 1) + "_" + std::to_string(c + 1));
  Table table(std::move(cols));
  for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
    std::vector<double> row{trajectory.times[k]};
    for (Eigen::Index c = 0; c < trajectory.states[k].size(); ++c)
      row.push_back(trajectory.states[k][c]);
    table.add_row(std::move(row));
  }
  table.write_csv(os);
}

}  // namespace phasered
