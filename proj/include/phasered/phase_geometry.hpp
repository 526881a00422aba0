#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "phasered/limit_cycle.hpp"
#include "phasered/models.hpp"
#include "phasered/periodic_series.hpp"
#include "phasered/types.hpp"

namespace phasered {

struct PhaseOptions {
  Tolerance tol{1e-11, 1e-13};
  /// Distance to the cycle at which the phase is read off.
  double settle_distance = 1e-9;
  /// Whole periods allowed for settling; 0 means max(10, 12/|λ|).
  int max_periods = 0;
};

/// Asymptotic phase Θ(x) in [0, 2π): the flow is followed whole periods at a
/// time until it is within settle_distance of γ, and the phase of the nearest
/// cycle point is returned (whole periods leave the phase unchanged).
double asymptotic_phase(const OscillatorModel& model, const LimitCycle& cycle,
                        const Vec& x, const PhaseOptions& options = {});

/// γ(θ) to integrator accuracy: the nearest grid node flowed by the remaining
/// fraction of a grid step.
Vec cycle_point(const OscillatorModel& model, const LimitCycle& cycle,
                double theta, Tolerance tol = {1e-12, 1e-14});

/// Z(θ) = ∇Θ on the cycle, sampled on the cycle grid.
struct PhaseSensitivity {
  std::vector<double> grid;
  std::vector<Vec> Z;
  double omega0 = 0.0;
  bool prescribed = false;

  int dim() const { return Z.empty() ? 0 : static_cast<int>(Z.front().size()); }
  /// Trigonometric interpolant of the grid values.
  Vec at(double theta) const;
  /// Builds the per-component interpolants; called by the constructors below.
  void build();

 private:
  std::vector<PeriodicSeries> series_;
};

enum class SensitivityMethod { adjoint, finite_difference };

struct SensitivityOptions {
  Tolerance tol{1e-11, 1e-13};
  /// Adjoint: change of Z(0) between periods that counts as periodic.
  double periodic_tol = 1e-8;
  int max_periods = 200;
  /// Finite differences: step relative to max(1, |γ(θ)|).
  double fd_step = 1e-5;
  PhaseOptions fd_phase{{1e-12, 1e-14}, 1e-13, 0};
};

/// Adjoint: dZ/dt = -Df(γ(t))ᵀ Z integrated backward until periodic, then
/// normalized so that Z·f(γ) = ω₀ at every node. Finite differences: central
/// differences of asymptotic_phase along each coordinate.
PhaseSensitivity phase_sensitivity(const OscillatorModel& model,
                                   const LimitCycle& cycle,
                                   SensitivityMethod method,
                                   const SensitivityOptions& options = {});

/// Samples a given Z(θ) on the cycle grid (e.g. the model's analytic_Z).
PhaseSensitivity prescribed_sensitivity(const LimitCycle& cycle,
                                        const std::function<Vec(double)>& Z);

/// max_k |Z(θ_k)·f(γ(θ_k)) − ω₀|.
double normalization_error(const OscillatorModel& model,
                           const LimitCycle& cycle,
                           const PhaseSensitivity& sensitivity);

/// A sampled level set {Θ = θ}.
struct Isochron {
  double theta = 0.0;
  std::vector<Vec> points;      // ordered by distance from the cycle
  std::vector<double> residual;  // |Θ̂(x) − θ| per point
  double extent = 0.0;           // range of distances from the model centre
};

struct IsochronOptions {
  Tolerance tol{1e-11, 1e-13};
  /// Largest seed offset from γ(θ) along the stable direction.
  double seed_max = 1e-3;
  int max_periods = 40;
  double verify_tol = 1e-4;
  PhaseOptions verify{{1e-10, 1e-12}, 1e-9, 0};
};

/// Points of the isochron through γ(θ) at n_points radii (distances from the
/// model centre) spread over radial_range. Each point is found by shooting:
/// a seed γ(θ) + s·v on the local stable direction v is mapped back m whole
/// periods, with s chosen so the image lands at the requested radius. Every
/// point is verified with asymptotic_phase. Planar models only.
Isochron compute_isochron(const OscillatorModel& model, const LimitCycle& cycle,
                          double theta, std::pair<double, double> radial_range,
                          std::size_t n_points,
                          const IsochronOptions& options = {});

/// CSV with columns theta, Z1..Zn.
void write_sensitivity_csv(const PhaseSensitivity& sensitivity,
                           std::ostream& os);

/// CSV with columns theta, index, x1..xn, residual.
void write_isochrons_csv(const std::vector<Isochron>& isochrons,
                         std::ostream& os);

}  // namespace phasered
