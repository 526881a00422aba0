#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "phasered/limit_cycle.hpp"
#include "phasered/models.hpp"
#include "phasered/phase_geometry.hpp"
#include "phasered/reduction.hpp"
#include "phasered/types.hpp"

namespace phasered {

/// A_ij(t) = a + b cos(ν₁ t) + c cos(ν₂ t).
struct EdgeWeight {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double at(double t, double nu1, double nu2) const {
    return a + b * std::cos(nu1 * t) + c * std::cos(nu2 * t);
  }
  bool is_zero() const { return a == 0.0 && b == 0.0 && c == 0.0; }
  bool is_constant() const { return b == 0.0 && c == 0.0; }
};

enum class CouplingKind { direct, diffusive, custom };

using PairCoupling = std::function<Vec(const Vec& xi, const Vec& xj)>;

/// ẋᵢ = fᵢ(xᵢ) + ε Σⱼ Aᵢⱼ(t) h(xᵢ, xⱼ).
struct NetworkSpec {
  std::vector<OscillatorModel> models;
  double epsilon = 0.0;
  std::vector<std::vector<EdgeWeight>> adjacency;  // N x N
  double nu1 = 0.0;
  double nu2 = 0.0;
  CouplingKind coupling = CouplingKind::direct;
  PairCoupling custom_h;
  /// Per-node override of Z(θ); empty entries are computed by the adjoint
  /// method. A complex Z is passed in its real 2-d form, so the pairing
  /// Re(conj(Z) h) is the ordinary dot product.
  std::vector<std::function<Vec(double)>> prescribed_Z;
  /// Per-node initial guess for the cycle search; default centre + e₁.
  std::vector<Vec> cycle_guess;
  bool allow_self_coupling = false;

  std::size_t size() const { return models.size(); }
  Vec h(const Vec& xi, const Vec& xj) const;
  /// Throws InvalidArgument on inconsistent dimensions or weights.
  void validate() const;
  bool time_varying() const;
};

struct NetworkOptions {
  CycleOptions cycle;
  SensitivityOptions sensitivity;
  /// mean_value of time-varying weights.
  double mean_tol = 1e-10;
  double mean_t_max = 1e7;
};

/// Averaged phase model dθᵢ/dt = Ωᵢ + ε Σⱼ q̄ᵢⱼ(θⱼ − θᵢ), where q̄ᵢⱼ already
/// includes the mean value of Aᵢⱼ(t).
struct PhaseModel {
  std::size_t N = 0;
  double epsilon = 0.0;
  std::vector<double> Omega;
  std::vector<std::vector<std::optional<CouplingFunction>>> Q;
  std::vector<double> mean_weight;  // row-major N x N, M[Aᵢⱼ]
  std::vector<LimitCycle> cycles;
  std::vector<PhaseSensitivity> sensitivities;
  std::vector<bool> prescribed;
  /// max|q̄ᵢⱼ| over edges under the adjoint sensitivity, when any Z was
  /// prescribed (NaN otherwise).
  double adjoint_max_q = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> warnings;

  double max_abs_q() const;
};

/// Finds each node's cycle and sensitivity and averages the pair integrand
/// q̄ᵢⱼ(φ) = (1/2π) ∫ Zᵢ(s)·h(γᵢ(s), γⱼ(s + φ)) ds, scaled by M[Aᵢⱼ].
PhaseModel build_phase_model(const NetworkSpec& spec,
                             const NetworkOptions& options = {});

/// The pair integrand for two given cycles and a sensitivity.
CouplingFunction pair_coupling(const NetworkSpec& spec, const LimitCycle& ci,
                               const PhaseSensitivity& Zi,
                               const LimitCycle& cj);

struct NetworkTrajectory {
  std::vector<double> times;
  std::vector<Vec> states;  // stacked node states
  std::size_t nodes = 0;
  int node_dim = 0;

  Vec node(std::size_t k, std::size_t i) const {
    return states[k].segment(static_cast<Eigen::Index>(i) * node_dim, node_dim);
  }
};

/// Integrates the coupled system and samples it at `times`.
NetworkTrajectory simulate_full(const NetworkSpec& spec, const Vec& x0,
                                double t0, const std::vector<double>& times,
                                Tolerance tol = sweep_tolerance);

/// Integrates the phase model; the result holds lifted phases.
PhaseTrajectory simulate_phase_model(const PhaseModel& pm,
                                     const std::vector<double>& theta0,
                                     double t0,
                                     const std::vector<double>& times,
                                     Tolerance tol = {1e-10, 1e-12});

/// Stacked on-cycle state γᵢ(θᵢ) for every node.
Vec on_cycle_state(const NetworkSpec& spec, const PhaseModel& pm,
                   const std::vector<double>& theta);

/// Node phases of a full trajectory (analytic phase where the model has one).
PhaseTrajectory node_phases(const NetworkSpec& spec, const PhaseModel& pm,
                            const NetworkTrajectory& trajectory);

struct ComparisonReport {
  double epsilon = 0.0;
  double horizon = 0.0;
  double max_error = 0.0;  // max over nodes and samples of |θ_full − θ_red|
  double rms_error = 0.0;
  double max_difference_error = 0.0;  // same for θᵢ − θ₁
  /// max_error exceeds the first-order budget 2ε.
  bool exceeds_first_order = false;
  PhaseTrajectory full;
  PhaseTrajectory reduced;
};

struct CompareOptions {
  std::size_t samples = 201;
  std::vector<double> theta0;  // empty: all zero
  Tolerance full_tol{1e-10, 1e-12};
  Tolerance reduced_tol{1e-10, 1e-12};
};

/// Runs both models from θᵢ(0) (full model on the cycles) over
/// horizon_mult/ε (horizon_mult periods when ε = 0).
ComparisonReport compare_full_vs_reduced(const NetworkSpec& spec,
                                         const PhaseModel& pm,
                                         double horizon_mult,
                                         const CompareOptions& options = {});

/// CSV with columns t, x1_1, x1_2, ..., xN_n.
void write_network_csv(const NetworkTrajectory& trajectory, std::ostream& os);

}  // namespace phasered
