#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace phasered {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Relative/absolute local error tolerance for the adaptive integrator.
struct Tolerance {
  double rel = 1e-9;
  double abs = 1e-11;
};

/// Defaults for geometry computations (cycles, isochrons, sensitivity).
inline constexpr Tolerance geometry_tolerance{1e-9, 1e-11};
/// Defaults for long network sweeps.
inline constexpr Tolerance sweep_tolerance{1e-7, 1e-9};

/// Maps any real phase into [0, 2π).
inline double wrap_phase(double theta) {
  double r = std::fmod(theta, two_pi);
  if (r < 0.0) r += two_pi;
  if (r >= two_pi) r = 0.0;
  return r;
}

/// Maps a phase difference into (-π, π].
inline double wrap_difference(double d) {
  double r = wrap_phase(d);
  return r > pi ? r - two_pi : r;
}

}  // namespace phasered
