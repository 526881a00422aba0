#include "phasered/limit_cycle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "phasered/errors.hpp"
#include "phasered/periodic_series.hpp"
#include "phasered/table.hpp"

namespace phasered {

namespace {

OdeOptions options_for(const OscillatorModel& model, Tolerance tol) {
  OdeOptions opt;
  opt.tol = tol;
  opt.admissible = [&model](const Vec& x) { return model.in_basin(x); };
  return opt;
}

// Orthonormal basis of the hyperplane orthogonal to g (n x (n-1)).
Mat tangent_basis(const Vec& g) {
  const auto n = g.size();
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(n, n);
  return q.rightCols(n - 1);
}

// Variational system: x, Φ (column-major), and ∫ tr Df.
Rhs variational_rhs(const OscillatorModel& model) {
  const int n = model.dim;
  return [&model, n](double, const Vec& y, Vec& dy) {
    const Vec x = y.head(n);
    const Mat J = model.jacobian_at(x);
    dy.head(n) = model.f(x);
    Eigen::Map<const Mat> phi(y.data() + n, n, n);
    Eigen::Map<Mat> dphi(dy.data() + n, n, n);
    dphi = J * phi;
    dy[n + n * n] = J.trace();
  };
}

Vec variational_endpoint(const OscillatorModel& model, const Vec& x0, double T,
                         Tolerance tol) {
  const int n = model.dim;
  Vec y = Vec::Zero(n + n * n + 1);
  y.head(n) = x0;
  Eigen::Map<Mat>(y.data() + n, n, n).setIdentity();
  OdeOptions opt;
  opt.tol = tol;
  return advance(variational_rhs(model), y, 0.0, T, opt);
}

}  // namespace

Vec LimitCycle::at(double theta) const {
  const std::size_t m = points.size();
  if (m == 0) throw InvalidArgument("empty limit cycle");
  const double dtheta = two_pi / static_cast<double>(m);
  const double u = wrap_phase(theta) / dtheta;
  auto k = static_cast<std::size_t>(std::floor(u));
  if (k >= m) k = m - 1;
  const double s = u - static_cast<double>(k);
  if (s == 0.0) return points[k];
  const std::size_t k1 = (k + 1) % m;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s,
               h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  return h00 * points[k] + h10 * dtheta * tangents[k] + h01 * points[k1] +
         h11 * dtheta * tangents[k1];
}

Vec LimitCycle::derivative(double theta) const {
  const std::size_t m = points.size();
  if (m == 0) throw InvalidArgument("empty limit cycle");
  const double dtheta = two_pi / static_cast<double>(m);
  const double u = wrap_phase(theta) / dtheta;
  auto k = static_cast<std::size_t>(std::floor(u));
  if (k >= m) k = m - 1;
  const double s = u - static_cast<double>(k);
  const std::size_t k1 = (k + 1) % m;
  const double s2 = s * s;
  const double d00 = 6 * s2 - 6 * s, d10 = 3 * s2 - 4 * s + 1,
               d01 = -6 * s2 + 6 * s, d11 = 3 * s2 - 2 * s;
  return (d00 * points[k] + d01 * points[k1]) / dtheta + d10 * tangents[k] +
         d11 * tangents[k1];
}

LimitCycle find_limit_cycle(const OscillatorModel& model, const Vec& guess,
                            const Section& section,
                            const CycleOptions& options) {
  if (guess.size() != model.dim)
    throw InvalidArgument("guess has the wrong dimension for " + model.name);
  if (!model.in_basin(guess))
    throw InvalidArgument("guess is outside the basin region of " + model.name);
  if (model.dim < 2)
    throw InvalidArgument("a limit cycle needs state dimension >= 2");
  if (options.grid_size < 8) throw InvalidArgument("grid_size must be >= 8");

  const Rhs rhs = autonomous_rhs(model);
  const OdeOptions opt = options_for(model, options.tol);
  auto return_map = [&](const Vec& x) {
    return find_crossing(rhs, x, 0.0, section, options.max_return_time, opt);
  };

  Vec x = return_map(guess).x;
  // Plain return iterations first: a stable cycle attracts them.
  for (int i = 0; i < 3; ++i) {
    const Crossing c = return_map(x);
    const bool close = (c.x - x).norm() <= options.newton_tol;
    x = c.x;
    if (close) break;
  }

  bool converged = false;
  double period = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter <= options.max_newton; ++iter) {
    const Crossing c = return_map(x);
    residual = (c.x - x).norm();
    if (residual <= options.newton_tol) {
      converged = true;
      period = c.t;
      break;
    }
    if (iter == options.max_newton) break;
    const Mat B = tangent_basis(section.grad(x));
    const auto k = B.cols();
    Mat J(k, k);
    const double h = 1e-6 * std::max(1.0, x.norm());
    for (Eigen::Index j = 0; j < k; ++j) {
      const Vec xp = x + h * B.col(j);
      const Vec xm = x - h * B.col(j);
      const Vec dp = return_map(xp).x - xp;
      const Vec dm = return_map(xm).x - xm;
      J.col(j) = B.transpose() * (dp - dm) / (2.0 * h);
    }
    Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) < 1e-12 * std::max(1.0, sv(0)))
      throw StabilityError(
          "return map has a unit multiplier; the cycle is not hyperbolic");
    const Vec delta = svd.solve(-(B.transpose() * (c.x - x)));
    x += B * delta;
    if (!model.in_basin(x))
      throw ConvergenceError("Newton iterate left the basin region", residual);
  }
  if (!converged)
    throw ConvergenceError("return-map Newton iteration did not converge in " +
                               std::to_string(options.max_newton) +
                               " iterations",
                           residual);

  // Phase origin: the crossing with the largest first coordinate
  // (ties broken by the second).
  const auto crossings =
      find_crossings(rhs, x, 0.0, period * (1.0 + 1e-6), section, opt);
  Vec anchor = x;
  for (const Crossing& c : crossings) {
    const double dx = c.x[0] - anchor[0];
    if (dx > 1e-9 || (std::abs(dx) <= 1e-9 && c.x[1] > anchor[1] + 1e-9))
      anchor = c.x;
  }

  LimitCycle cycle;
  cycle.period = period;
  cycle.omega0 = two_pi / period;
  cycle.anchor = anchor;
  cycle.grid = phase_grid(options.grid_size);
  std::vector<double> times(options.grid_size);
  for (std::size_t k = 0; k < times.size(); ++k)
    times[k] = period * static_cast<double>(k) /
               static_cast<double>(options.grid_size);
  cycle.points = sample(rhs, anchor, 0.0, times, opt);
  cycle.tangents.reserve(cycle.points.size());
  for (const Vec& p : cycle.points)
    cycle.tangents.push_back(model.f(p) / cycle.omega0);

  cycle.floquet = floquet_exponent(model, cycle, options.floquet_tol);
  if (!(cycle.floquet < 0.0))
    throw StabilityError("cycle is not exponentially stable (floquet = " +
                         format_double(cycle.floquet) + ")");
  return cycle;
}

LimitCycle find_limit_cycle(const OscillatorModel& model, const Vec& guess,
                            const CycleOptions& options) {
  return find_limit_cycle(model, guess, default_section(model), options);
}

Mat monodromy(const OscillatorModel& model, const LimitCycle& cycle,
              double theta, Tolerance tol) {
  const int n = model.dim;
  const Vec y = variational_endpoint(model, cycle.at(theta), cycle.period, tol);
  return Eigen::Map<const Mat>(y.data() + n, n, n);
}

double floquet_exponent(const OscillatorModel& model, const LimitCycle& cycle,
                        Tolerance tol) {
  const int n = model.dim;
  if (n < 2) throw InvalidArgument("floquet exponent needs dimension >= 2");
  Vec y;
  try {
    y = variational_endpoint(model, cycle.anchor, cycle.period, tol);
  } catch (const IntegrationError& e) {
    throw IntegrationError(e.kind(), e.time(),
                           std::string("monodromy integration failed: ") +
                               e.what());
  }
  if (n == 2) return y[n + n * n] / cycle.period;

  const Mat phi = Eigen::Map<const Mat>(y.data() + n, n, n);
  Eigen::EigenSolver<Mat> es(phi, false);
  auto mu = es.eigenvalues();
  Eigen::Index trivial = 0;
  for (Eigen::Index i = 1; i < mu.size(); ++i)
    if (std::abs(mu[i] - 1.0) < std::abs(mu[trivial] - 1.0)) trivial = i;
  double largest = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    if (i != trivial) largest = std::max(largest, std::abs(mu[i]));
  return std::log(largest) / cycle.period;
}

CycleProjection project_to_cycle(const LimitCycle& cycle, const Vec& x) {
  const std::size_t m = cycle.size();
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < m; ++k) {
    const double d2 = (x - cycle.points[k]).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = k;
    }
  }
  double theta = cycle.grid[best];
  // Newton on F(θ) = (x - γ)·γ'; the curvature term matters away from the
  // cycle. Gauss–Newton when F' has the wrong sign.
  const double h = 1e-5;
  for (int iter = 0; iter < 50; ++iter) {
    const Vec r = x - cycle.at(theta);
    const Vec dg = cycle.derivative(theta);
    const Vec ddg = (cycle.derivative(theta + h) - cycle.derivative(theta - h)) / (2.0 * h);
    const double fp = dg.squaredNorm() - r.dot(ddg);
    const double step = r.dot(dg) / (fp > 0.0 ? fp : dg.squaredNorm());
    theta += step;
    if (std::abs(step) < 1e-15) break;
  }
  theta = wrap_phase(theta);
  return {theta, (x - cycle.at(theta)).norm()};
}

void write_cycle_csv(const LimitCycle& cycle, std::ostream& os) {
  std::vector<std::string> cols{"theta"};
  for (int i = 0; i < cycle.dim(); ++i) cols.push_back("x" + std::to_string(i + 1));
  Table table(std::move(cols));
  for (std::size_t k = 0; k < cycle.size(); ++k) {
    std::vector<double> row{cycle.grid[k]};
    for (int i = 0; i < cycle.dim(); ++i) row.push_back(cycle.points[k][i]);
    table.add_row(std::move(row));
  }
  table.write_csv(os);
}

}  // namespace phasered
