#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "phasered/limit_cycle.hpp"
#include "phasered/models.hpp"
#include "phasered/periodic_series.hpp"
#include "phasered/phase_geometry.hpp"
#include "phasered/types.hpp"

namespace phasered {

enum class CouplingProvenance { periodic_average, mean_value, analytic };

const char* to_string(CouplingProvenance provenance);

/// Averaged phase interaction q̄(φ) (or Γ̄(ψ)) on a uniform phase grid.
class CouplingFunction {
 public:
  CouplingFunction() = default;
  CouplingFunction(std::vector<double> values, CouplingProvenance provenance);

  /// Samples g on an m-point grid.
  static CouplingFunction from_function(const std::function<double(double)>& g,
                                        std::size_t m = 256,
                                        CouplingProvenance provenance =
                                            CouplingProvenance::analytic);

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  CouplingProvenance provenance() const { return provenance_; }
  std::size_t size() const { return values_.size(); }

  double operator()(double phi) const { return series_(phi); }
  double derivative(double phi) const { return series_.derivative(phi); }
  double max_abs() const;

  CouplingFunction scaled(double factor) const;

 private:
  std::vector<double> grid_;
  std::vector<double> values_;
  CouplingProvenance provenance_ = CouplingProvenance::analytic;
  PeriodicSeries series_;
};

/// Phases at sample times. `theta` is the continuous lift (not wrapped).
struct PhaseTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> theta;  // theta[node][sample]
  std::vector<std::string> warnings;

  std::size_t nodes() const { return theta.size(); }
  double wrapped(std::size_t node, std::size_t k) const {
    return wrap_phase(theta[node][k]);
  }
};

/// Warning threshold for the coupling strength of first-order reductions.
inline constexpr double weak_coupling_limit = 0.3;

/// Γ(θ, t) = Z(θ)·p(γ(θ), t), without the amplitude ε.
double gamma_instantaneous(const PhaseSensitivity& Z, const LimitCycle& cycle,
                           const Perturbation& pert, double theta, double t);

/// Integrates dθ/dt = ω₀ + ε Γ(θ, t) with ε = pert.amplitude and reports θ at
/// `times` (monotone, within t_span).
PhaseTrajectory simulate_reduced(const PhaseSensitivity& Z,
                                 const LimitCycle& cycle,
                                 const Perturbation& pert, double theta0,
                                 std::pair<double, double> t_span,
                                 const std::vector<double>& times,
                                 Tolerance tol = {1e-10, 1e-12});

struct AverageOptions {
  std::size_t grid_size = 256;
  int threads = 0;
};

/// Γ̄(ψ) = (1/T) ∫₀ᵀ Z(ψ + Ω t)·p(γ(ψ + Ω t), t) dt with T = 2π/Ω, by
/// 64-point Gauss–Legendre panels over each forcing period. T must be a whole
/// number of forcing periods.
CouplingFunction average_periodic(const PhaseSensitivity& Z,
                                  const LimitCycle& cycle,
                                  const Perturbation& pert, double omega_force,
                                  const AverageOptions& options = {});

struct MeanValueOptions {
  double initial_window = 64.0;
  /// Quadrature panel length (20 Gauss nodes per panel).
  double panel = 0.5;
};

/// Long-time mean M[g] = lim (1/T) ∫₀ᵀ g. Raised-cosine weighted averages
/// over windows W, 2W, 4W, ... until two successive estimates differ by less
/// than tol. Throws ConvergenceError (with the last estimate and spread) when
/// the next window would exceed t_max.
double mean_value(const std::function<double(double)>& g, double t_max,
                  double tol = 1e-6, const MeanValueOptions& options = {});

struct FixedPoint {
  double psi = 0.0;
  bool stable = false;
  double slope = 0.0;
};

struct LockResult {
  bool locked = false;
  std::vector<FixedPoint> fixed_points;  // sorted by psi in [0, 2π)
  double condition_value = 0.0;          // |Δ|/ε
};

/// Roots of Δ + ε q̄(ψ) on [0, 2π), found by a sign scan and bracketed
/// refinement; stable where the slope is negative.
LockResult lock_analysis(double delta, double epsilon,
                         const CouplingFunction& q);

/// Integrates dψ/dt = Δ + ε q̄(ψ).
PhaseTrajectory simulate_averaged(double delta, double epsilon,
                                  const CouplingFunction& q, double psi0,
                                  const std::vector<double>& times,
                                  Tolerance tol = {1e-10, 1e-12});

/// Phase of a state: the model's analytic phase when `prefer_analytic` and it
/// exists, otherwise asymptotic_phase.
double phase_of(const OscillatorModel& model, const LimitCycle& cycle,
                const Vec& x, bool prefer_analytic = false,
                const PhaseOptions& options = {});

struct ReductionError {
  double epsilon = 0.0;
  double horizon = 0.0;
  double max_error = 0.0;
  double rms_error = 0.0;
  std::vector<double> times;
  std::vector<double> full_phase;     // wrapped
  std::vector<double> reduced_phase;  // wrapped
};

/// Runs ẋ = f(x) + ε p(x, t) from γ(θ0) and the reduced phase equation over
/// [0, horizon], reading the full phase with asymptotic_phase at `samples`
/// evenly spaced times.
ReductionError forced_reduction_error(const OscillatorModel& model,
                                      const LimitCycle& cycle,
                                      const PhaseSensitivity& Z,
                                      const Perturbation& pert, double theta0,
                                      double horizon, std::size_t samples = 101,
                                      Tolerance tol = {1e-10, 1e-12});

/// CSV with columns phi, q.
void write_coupling_csv(const CouplingFunction& q, std::ostream& os);

/// CSV with columns t, theta1..thetaN (wrapped).
void write_phase_csv(const PhaseTrajectory& trajectory, std::ostream& os);

}  // namespace phasered
