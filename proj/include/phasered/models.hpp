#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "phasered/types.hpp"

namespace phasered {

using Params = std::map<std::string, double, std::less<>>;
using VectorField = std::function<Vec(const Vec&)>;
using JacobianField = std::function<Mat(const Vec&)>;

/// Radius of the excluded neighbourhood around the phaseless point of the
/// built-in planar models.
inline constexpr double phaseless_radius = 1e-3;

/// An autonomous vector field with a stable limit cycle.
///
/// Built-in models are planar; their basin region excludes a disc of radius
/// `basin_radius_min` around `center`, where the asymptotic phase is not
/// defined. The analytic oracles are optional and only used for validation
/// and as an exact phase readout.
struct OscillatorModel {
  std::string name;
  int dim = 0;
  VectorField f;
  JacobianField jacobian;                        // empty: finite differences
  std::function<double(const Vec&)> analytic_phase;  // empty: none
  std::function<Vec(double)> analytic_Z;         // empty: none
  Params params;
  Vec center;
  double basin_radius_min = 0.0;

  Vec operator()(const Vec& x) const { return f(x); }

  bool has_jacobian() const { return static_cast<bool>(jacobian); }
  bool has_analytic_phase() const { return static_cast<bool>(analytic_phase); }

  /// Analytic Jacobian if present, otherwise central differences.
  Mat jacobian_at(const Vec& x) const;

  bool in_basin(const Vec& x) const;

  /// Throws InvalidArgument if the parameter is missing.
  double param(std::string_view key) const;
};

/// Builds one of the named models: "radial", "spiral", "stuart_landau".
///
/// stuart_landau requires params "omega" and "c2" and stores the derived
/// cycle frequency as "Omega" = omega - c2. "custom" is rejected here because
/// it needs a vector field; use make_custom_model.
OscillatorModel make_model(std::string_view name, const Params& params = {});

OscillatorModel make_custom_model(std::string name, int dim, VectorField f,
                                  JacobianField jacobian = {},
                                  Params params = {});

/// Time-dependent additive forcing p(x, t), scaled by `amplitude`.
struct Perturbation {
  std::function<Vec(const Vec&, double)> p;
  std::optional<double> period;  // empty: almost-periodic
  double amplitude = 0.0;

  Vec operator()(const Vec& x, double t) const { return p(x, t); }
};

/// p(x, t) = e_component · sin(frequency · t), period 2π/frequency.
Perturbation sinusoidal_forcing(int dim, int component, double amplitude,
                                double frequency);

Perturbation zero_perturbation(int dim);

/// Spot-checks p(x, t + T) = p(x, t) at the given states over a few times.
bool check_periodicity(const Perturbation& pert, const std::vector<Vec>& states,
                       double tol = 1e-12);

}  // namespace phasered
