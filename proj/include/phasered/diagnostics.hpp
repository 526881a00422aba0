#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "phasered/network.hpp"
#include "phasered/types.hpp"

namespace phasered {

/// Continuous lift of a sampled phase: jumps larger than `jump` in magnitude
/// are taken as 2π wraps.
std::vector<double> unwrap(const std::vector<double>& phase, double jump = pi);

struct SyncReport {
  double S = 0.0;  // RMS of dφ/dt over the tail
  bool locked = false;
  std::optional<double> psi_star;  // circular mean of φ over the tail, if locked
  int slips = 0;
  double threshold = 0.0;
};

/// Rate statistics of a phase difference φ(t) sampled at `times`. The first
/// transient_frac of the samples is discarded; dφ/dt comes from centred
/// differences of the unwrapped signal. Locked means S < s_threshold and no
/// 2π slips in the tail.
SyncReport sync_measure(const std::vector<double>& times,
                        const std::vector<double>& phi, double s_threshold,
                        double transient_frac = 0.5);

/// Two detuned Stuart–Landau nodes at ω ∓ Δω/2 (shared c₂), coupled
/// symmetrically with weight a.
struct PairExperiment {
  double omega = 2.0;
  double c2 = 1.0;
  double a = 1.0;
  CouplingKind coupling = CouplingKind::direct;
  double tail_min = 500.0;      // tail length max(tail_per_eps/ε, tail_min)
  double tail_per_eps = 10.0;
  double sample_dt = 0.5;
  double transient_frac = 0.5;  // the run is tail / (1 − transient_frac) long
  double threshold_rel = 1e-3;  // S threshold relative to ω − c₂
  double initial_difference = 1.0;
  Tolerance tol = sweep_tolerance;

  NetworkSpec make_spec(double detuning, double epsilon) const;
  double s_threshold() const { return threshold_rel * std::abs(omega - c2); }
};

/// Simulates the pair and measures θ₂ − θ₁.
SyncReport run_pair(const PairExperiment& experiment, double detuning,
                    double epsilon);

enum class CriticalStatus { found, below_range, above_range };

const char* to_string(CriticalStatus status);

struct SweepPoint {
  double detuning = 0.0;
  double epsilon = 0.0;
  SyncReport report;
};

struct CriticalResult {
  CriticalStatus status = CriticalStatus::above_range;
  double epsilon_c = std::numeric_limits<double>::quiet_NaN();
  double lower = 0.0;  // largest unlocked value seen below epsilon_c
  std::vector<SweepPoint> points;  // grid and bisection runs, by epsilon
};

struct CriticalOptions {
  double rel_width = 0.05;
  int threads = 0;
};

/// Smallest ε on the (increasing) grid at which the pair locks, refined by
/// bisection against the largest unlocked grid value below it.
CriticalResult critical_coupling(const PairExperiment& experiment,
                                 double detuning,
                                 const std::vector<double>& eps_grid,
                                 const CriticalOptions& options = {});

struct ScalingFit {
  std::vector<std::pair<double, double>> points;  // (Δω, ε_c)
  double exponent = 0.0;
  double intercept = 0.0;  // of log ε_c = intercept + exponent · log Δω
  double r_squared = 0.0;
  std::vector<std::string> warnings;
};

/// Least-squares line through (log Δω, log ε_c). Needs at least 3 positive
/// points; a span of less than a decade in Δω is reported as a warning.
ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& points);

/// Runs critical_coupling for every detuning and fits the result. Throws
/// ConvergenceError if a detuning has no threshold inside the grid.
ScalingFit scaling_fit(const PairExperiment& experiment,
                       const std::vector<double>& detunings,
                       const std::vector<double>& eps_grid,
                       const CriticalOptions& options = {},
                       std::vector<CriticalResult>* details = nullptr);

inline constexpr double order_ratio_floor = 1e-30;

struct OrderRatio {
  double first_order = 0.0;  // F₁
  double effective = 0.0;    // F_eff = Δω at threshold
  double ratio = 0.0;        // (F_eff − F₁) / max(F₁, floor)
  bool first_order_vanishing = false;
};

OrderRatio order_ratio(double first_order_force, double effective_force);

/// Empirical effective ratio for a two-node phase model at its locking
/// threshold ε: F₁ = ε·max_φ |q̄₂₁(−φ) − q̄₁₂(φ)|, the largest first-order
/// restoring rate on φ = θ₂ − θ₁, against F_eff = Δω.
OrderRatio order_ratio(const PhaseModel& pm, double epsilon, double detuning);

}  // namespace phasered
