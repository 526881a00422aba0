#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "phasered/diagnostics.hpp"
#include "phasered/errors.hpp"
#include "phasered/limit_cycle.hpp"
#include "phasered/models.hpp"
#include "phasered/network.hpp"
#include "phasered/phase_geometry.hpp"

namespace phasered::cli {

using json = nlohmann::json;

/// Malformed config; `field` is the dotted path of the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct ModelConfig {
  std::string name;
  Params params;
  std::optional<Vec> guess;

  OscillatorModel build() const;
  Vec initial_guess(const OscillatorModel& model) const;
};

struct IsochronConfig {
  std::vector<double> thetas{0.0};
  double r_lo = 0.3;
  double r_hi = 2.0;
  std::size_t points = 50;
};

struct ForcingConfig {
  int component = 0;
  double amplitude = 0.05;
  double frequency = 1.0;
};

struct ReduceConfig {
  double omega_force = 1.0;
  std::size_t grid_size = 256;
  bool compare = false;
  double horizon_mult = 1.0;
  std::size_t samples = 101;
};

struct NodeConfig {
  ModelConfig model;
  std::string prescribed_z;  // "", "imaginary_exp", "analytic"
};

struct NetworkConfig {
  std::vector<NodeConfig> nodes;
  double epsilon = 0.0;
  CouplingKind coupling = CouplingKind::diffusive;
  std::vector<std::vector<EdgeWeight>> adjacency;
  double nu1 = 0.0;
  double nu2 = 0.0;
  std::vector<double> theta0;  // empty: zeros
  bool random_theta0 = false;
  double horizon_mult = 1.0;
  std::size_t samples = 201;

  NetworkSpec build() const;
};

struct SweepConfig {
  PairExperiment experiment;
  std::vector<double> detunings{0.02};
  std::vector<double> eps_grid;
  double rel_width = 0.05;
  std::string order_ratio_z;  // "", "adjoint", "imaginary_exp"
};

/// Parsed and validated run configuration. `raw` keeps the file verbatim.
struct RunConfig {
  json raw;
  std::optional<ModelConfig> model;
  CycleOptions cycle;
  SensitivityMethod prc_method = SensitivityMethod::adjoint;
  std::optional<IsochronConfig> isochrons;
  std::optional<ForcingConfig> forcing;
  ReduceConfig reduce;
  std::optional<NetworkConfig> network;
  std::optional<SweepConfig> sweep;
  std::vector<std::pair<double, double>> fit_points;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> format;
};

/// Throws ConfigError on unknown keys, missing required fields and values of
/// the wrong type or range.
RunConfig parse_config(const json& raw);

RunConfig load_config(const std::string& path);

/// Z(θ) = i e^{−iθ} in real form (sin θ, cos θ).
Vec imaginary_exp_sensitivity(double theta);

}  // namespace phasered::cli
