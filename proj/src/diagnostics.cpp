#include "phasered/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "phasered/errors.hpp"
#include "phasered/parallel.hpp"
#include "phasered/table.hpp"

namespace phasered {

std::vector<double> unwrap(const std::vector<double>& phase, double jump) {
  std::vector<double> out;
  out.reserve(phase.size());
  double offset = 0.0;
  for (std::size_t k = 0; k < phase.size(); ++k) {
    if (k > 0) {
      const double d = phase[k] - phase[k - 1];
      if (d > jump) offset -= two_pi * std::round(d / two_pi);
      else if (d < -jump) offset += two_pi * std::round(-d / two_pi);
    }
    out.push_back(phase[k] + offset);
  }
  return out;
}

SyncReport sync_measure(const std::vector<double>& times,
                        const std::vector<double>& phi, double s_threshold,
                        double transient_frac) {
  if (times.size() != phi.size())
    throw InvalidArgument("times and phase samples differ in length");
  if (!(transient_frac >= 0.0 && transient_frac < 1.0))
    throw InvalidArgument("transient fraction must lie in [0, 1)");
  const auto start =
      static_cast<std::size_t>(std::floor(transient_frac * times.size()));
  if (times.size() < start + 3)
    throw InvalidArgument("phase trajectory is too short for the tail");

  const std::vector<double> lift = unwrap(phi);
  double sq = 0.0;
  std::size_t count = 0;
  for (std::size_t k = start + 1; k + 1 < times.size(); ++k) {
    const double rate = (lift[k + 1] - lift[k - 1]) / (times[k + 1] - times[k - 1]);
    sq += rate * rate;
    ++count;
  }
  SyncReport rep;
  rep.S = std::sqrt(sq / static_cast<double>(count));
  rep.threshold = s_threshold;
  const auto [lo, hi] = std::minmax_element(lift.begin() + static_cast<std::ptrdiff_t>(start),
                                            lift.end());
  rep.slips = static_cast<int>(std::floor((*hi - *lo) / two_pi));
  rep.locked = rep.S < s_threshold && rep.slips == 0;
  if (rep.locked) {
    double c = 0.0, s = 0.0;
    for (std::size_t k = start; k < lift.size(); ++k) {
      c += std::cos(lift[k]);
      s += std::sin(lift[k]);
    }
    rep.psi_star = wrap_phase(std::atan2(s, c));
  }
  return rep;
}

NetworkSpec PairExperiment::make_spec(double detuning, double epsilon) const {
  NetworkSpec spec;
  spec.models.push_back(make_model(
      "stuart_landau", {{"omega", omega - 0.5 * detuning}, {"c2", c2}}));
  spec.models.push_back(make_model(
      "stuart_landau", {{"omega", omega + 0.5 * detuning}, {"c2", c2}}));
  spec.epsilon = epsilon;
  spec.adjacency = {{EdgeWeight{}, EdgeWeight{a, 0.0, 0.0}},
                    {EdgeWeight{a, 0.0, 0.0}, EdgeWeight{}}};
  spec.coupling = coupling;
  return spec;
}

SyncReport run_pair(const PairExperiment& experiment, double detuning,
                    double epsilon) {
  const NetworkSpec spec = experiment.make_spec(detuning, epsilon);
  const double tail =
      epsilon > 0.0
          ? std::max(experiment.tail_per_eps / epsilon, experiment.tail_min)
          : experiment.tail_min;
  const double total = tail / (1.0 - experiment.transient_frac);
  const auto n = static_cast<std::size_t>(std::ceil(total / experiment.sample_dt));
  std::vector<double> times(n + 1);
  for (std::size_t k = 0; k <= n; ++k)
    times[k] = total * static_cast<double>(k) / static_cast<double>(n);

  // Both nodes start on their cycle (a unit circle for every detuning).
  Vec x0(4);
  x0 << 1.0, 0.0, std::cos(experiment.initial_difference),
      std::sin(experiment.initial_difference);
  const NetworkTrajectory traj = simulate_full(spec, x0, 0.0, times, experiment.tol);
  std::vector<double> phi(times.size());
  for (std::size_t k = 0; k < times.size(); ++k)
    phi[k] = wrap_difference(spec.models[1].analytic_phase(traj.node(k, 1)) -
                             spec.models[0].analytic_phase(traj.node(k, 0)));
  return sync_measure(times, phi, experiment.s_threshold(),
                      experiment.transient_frac);
}

const char* to_string(CriticalStatus status) {
  switch (status) {
    case CriticalStatus::found:
      return "found";
    case CriticalStatus::below_range:
      return "below_range";
    case CriticalStatus::above_range:
      return "above_range";
  }
  return "unknown";
}

CriticalResult critical_coupling(const PairExperiment& experiment,
                                 double detuning,
                                 const std::vector<double>& eps_grid,
                                 const CriticalOptions& options) {
  if (eps_grid.empty()) throw InvalidArgument("epsilon grid is empty");
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > 0.0))
      throw InvalidArgument("epsilon grid values must be positive");
    if (i > 0 && !(eps_grid[i] > eps_grid[i - 1]))
      throw InvalidArgument("epsilon grid must be increasing");
  }
  if (!(options.rel_width > 0.0))
    throw InvalidArgument("relative width must be positive");

  CriticalResult out;
  std::vector<SyncReport> reports(eps_grid.size());
  parallel_for(eps_grid.size(), options.threads, [&](std::size_t i) {
    reports[i] = run_pair(experiment, detuning, eps_grid[i]);
  });
  for (std::size_t i = 0; i < eps_grid.size(); ++i)
    out.points.push_back({detuning, eps_grid[i], reports[i]});

  std::size_t first = eps_grid.size();
  for (std::size_t i = 0; i < eps_grid.size(); ++i)
    if (reports[i].locked) {
      first = i;
      break;
    }
  if (first == eps_grid.size()) {
    out.status = CriticalStatus::above_range;
    out.lower = eps_grid.back();
    return out;
  }
  if (first == 0) {
    out.status = CriticalStatus::below_range;
    out.epsilon_c = eps_grid.front();
    return out;
  }

  double lo = eps_grid[first - 1], hi = eps_grid[first];
  while ((hi - lo) / hi > options.rel_width) {
    const double mid = 0.5 * (lo + hi);
    const SyncReport r = run_pair(experiment, detuning, mid);
    out.points.push_back({detuning, mid, r});
    (r.locked ? hi : lo) = mid;
  }
  std::sort(out.points.begin(), out.points.end(),
            [](const SweepPoint& a, const SweepPoint& b) {
              return a.epsilon < b.epsilon;
            });
  out.status = CriticalStatus::found;
  out.epsilon_c = hi;
  out.lower = lo;
  return out;
}

ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3)
    throw InvalidArgument("scaling fit needs at least three points");
  ScalingFit fit;
  fit.points = points;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
  for (const auto& [d, e] : points) {
    if (!(d > 0.0) || !(e > 0.0))
      throw InvalidArgument("scaling fit needs positive detunings and thresholds");
    const double x = std::log(d), y = std::log(e);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);
  }
  const double n = static_cast<double>(points.size());
  const double vx = sxx - sx * sx / n;
  const double vy = syy - sy * sy / n;
  const double cxy = sxy - sx * sy / n;
  if (!(vx > 0.0)) throw InvalidArgument("scaling fit needs distinct detunings");
  fit.exponent = cxy / vx;
  fit.intercept = (sy - fit.exponent * sx) / n;
  fit.r_squared = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
  if (dmax / dmin < 10.0)
    fit.warnings.push_back("detunings span less than one decade");
  return fit;
}

ScalingFit scaling_fit(const PairExperiment& experiment,
                       const std::vector<double>& detunings,
                       const std::vector<double>& eps_grid,
                       const CriticalOptions& options,
                       std::vector<CriticalResult>* details) {
  std::vector<std::pair<double, double>> points;
  for (double d : detunings) {
    CriticalResult r = critical_coupling(experiment, d, eps_grid, options);
    if (r.status != CriticalStatus::found)
      throw ConvergenceError("no critical coupling inside the grid for detuning " +
                                 format_double(d) + " (" + to_string(r.status) +
                                 ")",
                             r.epsilon_c);
    points.emplace_back(d, r.epsilon_c);
    if (details) details->push_back(std::move(r));
  }
  return scaling_fit(points);
}

OrderRatio order_ratio(double first_order_force, double effective_force) {
  OrderRatio out;
  out.first_order = first_order_force;
  out.effective = effective_force;
  out.ratio = (effective_force - first_order_force) /
              std::max(first_order_force, order_ratio_floor);
  out.first_order_vanishing = first_order_force < order_ratio_floor;
  return out;
}

OrderRatio order_ratio(const PhaseModel& pm, double epsilon, double detuning) {
  if (pm.N != 2) throw InvalidArgument("order ratio is defined for node pairs");
  if (!std::isfinite(epsilon) || !(epsilon > 0.0))
    throw InvalidArgument("locking threshold not found");
  const auto& q12 = pm.Q[0][1];
  const auto& q21 = pm.Q[1][0];
  double force = 0.0;
  for (double phi : phase_grid(1024)) {
    const double a = q21 ? (*q21)(-phi) : 0.0;
    const double b = q12 ? (*q12)(phi) : 0.0;
    force = std::max(force, std::abs(a - b));
  }
  return order_ratio(epsilon * force, std::abs(detuning));
}

}  // namespace phasered
