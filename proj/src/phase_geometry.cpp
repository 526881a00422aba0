#include "phasered/phase_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>

#include <boost/math/tools/roots.hpp>

#include "phasered/errors.hpp"
#include "phasered/ode.hpp"
#include "phasered/table.hpp"

namespace phasered {

namespace {

OdeOptions basin_options(const OscillatorModel& model, Tolerance tol) {
  OdeOptions opt;
  opt.tol = tol;
  opt.admissible = [&model](const Vec& x) { return model.in_basin(x); };
  return opt;
}

Vec model_center(const OscillatorModel& model) {
  return model.center.size() == model.dim ? model.center
                                          : Vec::Zero(model.dim);
}

// Nearest cycle point. Close to the cycle the Hermite estimate is polished
// against the exact orbit so the distance is not limited by interpolation.
CycleProjection refined_projection(const OscillatorModel& model,
                                   const LimitCycle& cycle, const Vec& x,
                                   Tolerance tol) {
  CycleProjection p = project_to_cycle(cycle, x);
  if (p.distance > 1e-4) return p;
  for (int iter = 0; iter < 3; ++iter) {
    const Vec g = cycle_point(model, cycle, p.theta, tol);
    const Vec dg = model.f(g) / cycle.omega0;
    const double step = (x - g).dot(dg) / dg.squaredNorm();
    p.theta = wrap_phase(p.theta + step);
    p.distance = (x - g).norm();
    if (std::abs(step) < 1e-14) break;
  }
  p.distance = (x - cycle_point(model, cycle, p.theta, tol)).norm();
  return p;
}

}  // namespace

Vec cycle_point(const OscillatorModel& model, const LimitCycle& cycle,
                double theta, Tolerance tol) {
  const std::size_t m = cycle.size();
  if (m == 0) throw InvalidArgument("empty limit cycle");
  const double dtheta = two_pi / static_cast<double>(m);
  const double u = wrap_phase(theta) / dtheta;
  const auto k = static_cast<std::size_t>(std::llround(u)) % m;
  const double delta = wrap_difference(theta - cycle.grid[k]);
  if (delta == 0.0) return cycle.points[k];
  OdeOptions opt;
  opt.tol = tol;
  return advance(autonomous_rhs(model), cycle.points[k], 0.0,
                 delta / cycle.omega0, opt);
}

double asymptotic_phase(const OscillatorModel& model, const LimitCycle& cycle,
                        const Vec& x, const PhaseOptions& options) {
  if (x.size() != model.dim)
    throw InvalidArgument("state has the wrong dimension for " + model.name);
  if (!model.in_basin(x))
    throw InvalidArgument(
        "state lies in the excluded phaseless neighbourhood of " + model.name);
  int budget = options.max_periods;
  if (budget <= 0)
    budget = static_cast<int>(
        std::max(10.0, std::ceil(12.0 / std::abs(cycle.floquet))));

  const Rhs rhs = autonomous_rhs(model);
  const OdeOptions opt = basin_options(model, options.tol);
  Vec cur = x;
  CycleProjection p = refined_projection(model, cycle, cur, options.tol);
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= budget; ++k) {
    if (p.distance <= options.settle_distance) return p.theta;
    // Integration noise floor: the distance has stopped contracting.
    if (k > 0 && p.distance < 1e-7 && p.distance > 0.5 * prev) return p.theta;
    if (k == budget) break;
    prev = p.distance;
    try {
      cur = advance(rhs, cur, 0.0, cycle.period, opt);
    } catch (const IntegrationError& e) {
      throw IntegrationError(e.kind(), e.time(),
                             std::string("asymptotic phase: ") + e.what());
    }
    p = refined_projection(model, cycle, cur, options.tol);
  }
  throw ConvergenceError("trajectory did not approach the cycle within " +
                             std::to_string(budget) + " periods",
                         p.theta, p.distance);
}

Vec PhaseSensitivity::at(double theta) const {
  if (series_.empty()) throw InvalidArgument("phase sensitivity is empty");
  Vec out(static_cast<Eigen::Index>(series_.size()));
  for (std::size_t i = 0; i < series_.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = series_[i](theta);
  return out;
}

void PhaseSensitivity::build() {
  series_.clear();
  if (Z.empty()) return;
  std::vector<double> column(Z.size());
  for (int i = 0; i < dim(); ++i) {
    for (std::size_t k = 0; k < Z.size(); ++k) column[k] = Z[k][i];
    series_.emplace_back(column);
  }
}

namespace {

PhaseSensitivity adjoint_sensitivity(const OscillatorModel& model,
                                     const LimitCycle& cycle,
                                     const SensitivityOptions& options) {
  const int n = model.dim;
  const std::size_t m = cycle.size();
  // Smooth interpolant of γ for the coefficient matrix.
  std::vector<PeriodicSeries> gamma;
  std::vector<double> column(m);
  for (int i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < m; ++k) column[k] = cycle.points[k][i];
    gamma.emplace_back(column);
  }
  const double w = cycle.omega0;
  const Rhs rhs = [&](double t, const Vec& z, Vec& dz) {
    Vec g(n);
    for (int i = 0; i < n; ++i) g[i] = gamma[static_cast<std::size_t>(i)](w * t);
    dz = -model.jacobian_at(g).transpose() * z;
  };
  OdeOptions opt;
  opt.tol = options.tol;

  const Vec f0 = model.f(cycle.points[0]);
  Vec z = w * f0 / f0.squaredNorm();
  bool converged = false;
  double change = 0.0;
  for (int it = 0; it < options.max_periods; ++it) {
    Vec next = advance(rhs, z, cycle.period, 0.0, opt);
    next *= w / next.dot(f0);
    change = (next - z).norm();
    z = next;
    if (change < options.periodic_tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw ConvergenceError("adjoint solution did not become periodic", 0.0,
                           change);

  std::vector<double> times(m);
  for (std::size_t i = 0; i < m; ++i)
    times[i] = cycle.period * static_cast<double>(m - 1 - i) /
               static_cast<double>(m);
  const auto states = sample(rhs, z, cycle.period, times, opt);

  PhaseSensitivity out;
  out.grid = cycle.grid;
  out.omega0 = w;
  out.Z.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t k = m - 1 - i;
    const Vec f = model.f(cycle.points[k]);
    out.Z[k] = states[i] * (w / states[i].dot(f));
  }
  out.build();
  return out;
}

PhaseSensitivity difference_sensitivity(const OscillatorModel& model,
                                        const LimitCycle& cycle,
                                        const SensitivityOptions& options) {
  const int n = model.dim;
  PhaseSensitivity out;
  out.grid = cycle.grid;
  out.omega0 = cycle.omega0;
  out.Z.reserve(cycle.size());
  for (const Vec& g : cycle.points) {
    const double h = options.fd_step * std::max(1.0, g.norm());
    Vec z(n);
    for (int i = 0; i < n; ++i) {
      Vec xp = g, xm = g;
      xp[i] += h;
      xm[i] -= h;
      if (!model.in_basin(xp) || !model.in_basin(xm))
        throw InvalidArgument("finite-difference step reaches the phaseless set");
      const double tp = asymptotic_phase(model, cycle, xp, options.fd_phase);
      const double tm = asymptotic_phase(model, cycle, xm, options.fd_phase);
      z[i] = wrap_difference(tp - tm) / (2.0 * h);
    }
    out.Z.push_back(std::move(z));
  }
  out.build();
  return out;
}

}  // namespace

PhaseSensitivity phase_sensitivity(const OscillatorModel& model,
                                   const LimitCycle& cycle,
                                   SensitivityMethod method,
                                   const SensitivityOptions& options) {
  if (cycle.dim() != model.dim)
    throw InvalidArgument("cycle does not belong to model " + model.name);
  return method == SensitivityMethod::adjoint
             ? adjoint_sensitivity(model, cycle, options)
             : difference_sensitivity(model, cycle, options);
}

PhaseSensitivity prescribed_sensitivity(const LimitCycle& cycle,
                                        const std::function<Vec(double)>& Z) {
  if (!Z) throw InvalidArgument("prescribed sensitivity is empty");
  PhaseSensitivity out;
  out.grid = cycle.grid;
  out.omega0 = cycle.omega0;
  out.prescribed = true;
  for (double theta : cycle.grid) {
    Vec z = Z(theta);
    if (z.size() != cycle.dim())
      throw InvalidArgument("prescribed sensitivity has the wrong dimension");
    out.Z.push_back(std::move(z));
  }
  out.build();
  return out;
}

double normalization_error(const OscillatorModel& model,
                           const LimitCycle& cycle,
                           const PhaseSensitivity& sensitivity) {
  double worst = 0.0;
  for (std::size_t k = 0; k < cycle.size(); ++k)
    worst = std::max(worst, std::abs(sensitivity.Z[k].dot(
                                         model.f(cycle.points[k])) -
                                     cycle.omega0));
  return worst;
}

namespace {

// Direction of the nontrivial Floquet multiplier at γ(θ): the range of
// M − I, since M f = f and M v = μ v.
Vec stable_direction(const OscillatorModel& model, const LimitCycle& cycle,
                     double theta, Tolerance tol) {
  const Mat mono = monodromy(model, cycle, theta, tol);
  const Mat d = mono - Mat::Identity(mono.rows(), mono.cols());
  Eigen::Index best = 0;
  d.colwise().norm().maxCoeff(&best);
  Vec v = d.col(best);
  const double norm = v.norm();
  if (!(norm > 0.0)) throw StabilityError("monodromy has no contracting direction");
  return v / norm;
}

struct Shot {
  double value;  // signed progress past the target radius; +inf on failure
  Vec x;
};

}  // namespace

Isochron compute_isochron(const OscillatorModel& model, const LimitCycle& cycle,
                          double theta, std::pair<double, double> radial_range,
                          std::size_t n_points,
                          const IsochronOptions& options) {
  if (model.dim != 2)
    throw InvalidArgument("isochrons are computed for planar models only");
  if (n_points == 0) throw InvalidArgument("n_points must be positive");
  auto [r_lo, r_hi] = radial_range;
  if (!(r_lo > 0.0) || !(r_hi >= r_lo))
    throw InvalidArgument("radial range must satisfy 0 < r_lo <= r_hi");
  if (r_lo < model.basin_radius_min)
    throw InvalidArgument("radial range reaches the phaseless neighbourhood");

  theta = wrap_phase(theta);
  const Vec c = model_center(model);
  const Vec base = cycle_point(model, cycle, theta, options.tol);
  const double r_c = (base - c).norm();
  Vec v = stable_direction(model, cycle, theta, options.tol);
  if ((base - c).dot(v) < 0.0) v = -v;  // +v points away from the centre

  // Target radii; the one nearest the cycle is replaced by γ(θ) itself.
  std::vector<double> targets;
  if (r_hi - r_lo <= 1e-12 || n_points == 1) {
    targets.push_back(0.5 * (r_lo + r_hi));
  } else {
    for (std::size_t j = 0; j < n_points; ++j)
      targets.push_back(r_lo + (r_hi - r_lo) * static_cast<double>(j) /
                                   static_cast<double>(n_points - 1));
    if (r_c >= r_lo && r_c <= r_hi) {
      auto nearest = std::min_element(
          targets.begin(), targets.end(), [&](double a, double b) {
            return std::abs(a - r_c) < std::abs(b - r_c);
          });
      *nearest = r_c;
    }
  }

  const Rhs rhs = autonomous_rhs(model);
  OdeOptions opt;
  opt.tol = options.tol;
  opt.max_steps = 200000;
  opt.admissible = [&](const Vec& x) {
    return model.in_basin(x) && (x - c).norm() < 1e3;
  };

  auto solve_target = [&](double rho) -> Vec {
    if (std::abs(rho - r_c) <= 1e-12) return base;
    const double sigma = rho > r_c ? 1.0 : -1.0;
    const int m0 = std::abs(rho - r_c) <= 1e-4 ? 0 : 1;
    for (int m = m0; m <= options.max_periods; ++m) {
      auto shoot = [&](double u) -> Shot {
        const Vec seed = base + sigma * u * v;
        try {
          Vec x = m == 0 ? seed
                         : advance(rhs, seed, 0.0, -m * cycle.period, opt);
          return {sigma * ((x - c).norm() - rho), std::move(x)};
        } catch (const IntegrationError&) {
          return {std::numeric_limits<double>::infinity(), Vec()};
        }
      };
      double lo = 0.0, hi = options.seed_max;
      Shot s_hi = shoot(hi);
      if (s_hi.value < 0.0) continue;  // cannot reach the target yet
      double f_lo = sigma * (r_c - rho);
      for (int i = 0; i < 200 && !std::isfinite(s_hi.value); ++i) {
        const double mid = 0.5 * (lo + hi);
        Shot s_mid = shoot(mid);
        if (std::isfinite(s_mid.value) && s_mid.value < 0.0) {
          lo = mid;
          f_lo = s_mid.value;
        } else {
          hi = mid;
          s_hi = std::move(s_mid);
        }
      }
      if (!std::isfinite(s_hi.value)) break;
      if (s_hi.value == 0.0) return s_hi.x;
      std::uintmax_t iters = 200;
      auto tol = [](double a, double b) {
        return std::abs(b - a) <= 4e-16 * std::max(std::abs(a), std::abs(b));
      };
      auto g = [&](double u) {
        const Shot s = shoot(u);
        return std::isfinite(s.value) ? s.value : 1e300;
      };
      const auto root = boost::math::tools::toms748_solve(
          g, lo, hi, f_lo, s_hi.value, tol, iters);
      Shot a = shoot(root.first), b = shoot(root.second);
      if (!std::isfinite(a.value)) return b.x;
      if (!std::isfinite(b.value)) return a.x;
      return std::abs(a.value) <= std::abs(b.value) ? a.x : b.x;
    }
    throw ConvergenceError("isochron point at radius " + format_double(rho) +
                           " not reached within " +
                           std::to_string(options.max_periods) + " periods");
  };

  Isochron iso;
  iso.theta = theta;
  std::stable_sort(targets.begin(), targets.end(), [&](double a, double b) {
    return std::abs(a - r_c) < std::abs(b - r_c);
  });
  double d_min = std::numeric_limits<double>::infinity(), d_max = 0.0;
  for (double rho : targets) {
    Vec x = solve_target(rho);
    const double phase = asymptotic_phase(model, cycle, x, options.verify);
    const double res = std::abs(wrap_difference(phase - theta));
    if (res > options.verify_tol)
      throw ConvergenceError("isochron point failed phase verification", phase,
                             res);
    const double d = (x - c).norm();
    d_min = std::min(d_min, d);
    d_max = std::max(d_max, d);
    iso.points.push_back(std::move(x));
    iso.residual.push_back(res);
  }
  iso.extent = d_max - d_min;
  return iso;
}

void write_sensitivity_csv(const PhaseSensitivity& sensitivity,
                           std::ostream& os) {
  std::vector<std::string> cols{"theta"};
  for (int i = 0; i < sensitivity.dim(); ++i)
    cols.push_back("Z" + std::to_string(i + 1));
  Table table(std::move(cols));
  for (std::size_t k = 0; k < sensitivity.Z.size(); ++k) {
    std::vector<double> row{sensitivity.grid[k]};
    for (int i = 0; i < sensitivity.dim(); ++i)
      row.push_back(sensitivity.Z[k][i]);
    table.add_row(std::move(row));
  }
  table.write_csv(os);
}

void write_isochrons_csv(const std::vector<Isochron>& isochrons,
                         std::ostream& os) {
  const int n = isochrons.empty() || isochrons.front().points.empty()
                    ? 2
                    : static_cast<int>(isochrons.front().points.front().size());
  std::vector<std::string> cols{"theta", "index"};
  for (int i = 0; i < n; ++i) cols.push_back("x" + std::to_string(i + 1));
  cols.push_back("residual");
  Table table(std::move(cols));
  for (const Isochron& iso : isochrons) {
    for (std::size_t j = 0; j < iso.points.size(); ++j) {
      std::vector<double> row{iso.theta, static_cast<double>(j)};
      for (int i = 0; i < n; ++i) row.push_back(iso.points[j][i]);
      row.push_back(iso.residual[j]);
      table.add_row(std::move(row));
    }
  }
  table.write_csv(os);
}

}  // namespace phasered
