#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "phasered/models.hpp"
#include "phasered/ode.hpp"
#include "phasered/types.hpp"

namespace phasered {

/// A stable periodic orbit sampled at M equally spaced phases.
///
/// points[k] = γ(2πk/M), reached from the anchor after time kT/M, so the
/// phase advances uniformly at omega0 = 2π/T. `floquet` is the signed
/// nontrivial exponent (negative for a stable cycle).
struct LimitCycle {
  double period = 0.0;
  double omega0 = 0.0;
  double floquet = 0.0;
  std::vector<double> grid;
  std::vector<Vec> points;
  std::vector<Vec> tangents;  // dγ/dθ = f(γ)/omega0 at the nodes
  Vec anchor;

  int dim() const { return static_cast<int>(anchor.size()); }
  std::size_t size() const { return points.size(); }

  /// γ(θ) by periodic cubic Hermite interpolation; exact at the nodes.
  Vec at(double theta) const;
  /// dγ/dθ of the same interpolant.
  Vec derivative(double theta) const;
};

struct CycleOptions {
  Tolerance tol{1e-11, 1e-13};
  double newton_tol = 1e-9;
  int max_newton = 50;
  std::size_t grid_size = 256;
  double max_return_time = 1000.0;
  Tolerance floquet_tol{1e-11, 1e-13};
};

/// Locates the cycle as a fixed point of the first-return map on `section`
/// (Newton iteration in section coordinates), fixes the phase origin at the
/// crossing with the largest first coordinate, and samples one period.
LimitCycle find_limit_cycle(const OscillatorModel& model, const Vec& guess,
                            const Section& section,
                            const CycleOptions& options = {});

/// Same, on default_section(model).
LimitCycle find_limit_cycle(const OscillatorModel& model, const Vec& guess,
                            const CycleOptions& options = {});

/// Nontrivial Floquet exponent λ = ln|μ|/T. For planar systems μ is the
/// determinant of the monodromy matrix, which Liouville's formula gives as
/// exp(∫ tr Df(γ(t)) dt); otherwise it is read from the eigenvalues of the
/// variational monodromy.
double floquet_exponent(const OscillatorModel& model, const LimitCycle& cycle,
                        Tolerance tol = {1e-11, 1e-13});

/// Monodromy matrix of the cycle starting at phase θ.
Mat monodromy(const OscillatorModel& model, const LimitCycle& cycle,
              double theta = 0.0, Tolerance tol = {1e-11, 1e-13});

inline Vec gamma_at(const LimitCycle& cycle, double theta) {
  return cycle.at(theta);
}

struct CycleProjection {
  double theta = 0.0;
  double distance = 0.0;
};

/// Nearest point of the cycle: grid search, then Gauss–Newton on
/// (x - γ(θ))·γ'(θ) = 0.
CycleProjection project_to_cycle(const LimitCycle& cycle, const Vec& x);

/// CSV with columns theta, x1..xn.
void write_cycle_csv(const LimitCycle& cycle, std::ostream& os);

}  // namespace phasered
