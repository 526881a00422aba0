#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

namespace phasered::cli {

namespace {

// Typed access to one JSON object, with the dotted path used in errors.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  void allow(std::initializer_list<std::string_view> keys) const {
    for (const auto& item : j_.items())
      if (std::find(keys.begin(), keys.end(), item.key()) == keys.end())
        throw ConfigError(field(item.key()), "unknown key");
  }

  std::string field(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  bool has(std::string_view key) const {
    return j_.contains(std::string(key)) && !j_.at(std::string(key)).is_null();
  }

  const json& at(std::string_view key) const {
    if (!has(key)) throw ConfigError(field(key), "missing required field");
    return j_.at(std::string(key));
  }

  Reader child(std::string_view key) const { return Reader(at(key), field(key)); }

  double number(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_number()) throw ConfigError(field(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(field(key), "must be finite");
    return d;
  }
  double number(std::string_view key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  double positive(std::string_view key, double fallback) const {
    const double d = number(key, fallback);
    if (!(d > 0.0)) throw ConfigError(field(key), "must be positive");
    return d;
  }

  long long integer(std::string_view key, long long fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number_integer())
      throw ConfigError(field(key), "expected an integer");
    return v.get<long long>();
  }
  std::size_t count(std::string_view key, std::size_t fallback,
                    std::size_t min = 1) const {
    const long long n = integer(key, static_cast<long long>(fallback));
    if (n < static_cast<long long>(min))
      throw ConfigError(field(key), "must be at least " + std::to_string(min));
    return static_cast<std::size_t>(n);
  }

  bool boolean(std::string_view key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_boolean()) throw ConfigError(field(key), "expected true or false");
    return v.get<bool>();
  }

  std::string str(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError(field(key), "expected a string");
    return v.get<std::string>();
  }
  std::string str(std::string_view key, std::string fallback) const {
    return has(key) ? str(key) : fallback;
  }

  std::vector<double> numbers(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_array()) throw ConfigError(field(key), "expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number())
        throw ConfigError(field(key) + "[" + std::to_string(i) + "]",
                          "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
};

Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

Tolerance read_tolerance(const Reader& r, Tolerance fallback) {
  r.allow({"rel", "abs"});
  return {r.positive("rel", fallback.rel), r.positive("abs", fallback.abs)};
}

ModelConfig read_model(const Reader& r) {
  r.allow({"name", "params", "guess"});
  ModelConfig m;
  m.name = r.str("name");
  if (r.has("params")) {
    const Reader p = r.child("params");
    for (const auto& item : r.at("params").items()) m.params[item.key()] = p.number(item.key());
  }
  if (r.has("guess")) m.guess = to_vec(r.numbers("guess"));
  try {
    m.build();
  } catch (const InvalidArgument& e) {
    throw ConfigError(r.field("name"), e.what());
  }
  return m;
}

EdgeWeight read_weight(const json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>(), 0.0, 0.0};
  const Reader r(v, path);
  r.allow({"a", "b", "c"});
  return {r.number("a", 0.0), r.number("b", 0.0), r.number("c", 0.0)};
}

NetworkConfig read_network(const Reader& r) {
  r.allow({"nodes", "epsilon", "coupling", "adjacency", "all_to_all", "nu1",
           "nu2", "theta0", "horizon_mult", "samples"});
  NetworkConfig n;
  const json& nodes = r.at("nodes");
  if (!nodes.is_array() || nodes.empty())
    throw ConfigError(r.field("nodes"), "expected a non-empty array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Reader nr(nodes[i], r.field("nodes") + "[" + std::to_string(i) + "]");
    nr.allow({"model", "prescribed_Z"});
    NodeConfig node;
    node.model = read_model(nr.child("model"));
    node.prescribed_z = nr.str("prescribed_Z", "");
    if (!node.prescribed_z.empty() && node.prescribed_z != "imaginary_exp" &&
        node.prescribed_z != "analytic")
      throw ConfigError(nr.field("prescribed_Z"),
                        "expected \"imaginary_exp\" or \"analytic\"");
    n.nodes.push_back(std::move(node));
  }
  const std::size_t N = n.nodes.size();
  n.epsilon = r.number("epsilon");
  const std::string kind = r.str("coupling", "diffusive");
  if (kind == "direct") n.coupling = CouplingKind::direct;
  else if (kind == "diffusive") n.coupling = CouplingKind::diffusive;
  else
    throw ConfigError(r.field("coupling"), "expected \"direct\" or \"diffusive\"");

  if (r.has("adjacency") == r.has("all_to_all"))
    throw ConfigError(r.field("adjacency"),
                      "give exactly one of adjacency or all_to_all");
  n.adjacency.assign(N, std::vector<EdgeWeight>(N));
  if (r.has("adjacency")) {
    const json& a = r.at("adjacency");
    if (!a.is_array() || a.size() != N)
      throw ConfigError(r.field("adjacency"), "expected an N x N array");
    for (std::size_t i = 0; i < N; ++i) {
      const std::string row = r.field("adjacency") + "[" + std::to_string(i) + "]";
      if (!a[i].is_array() || a[i].size() != N)
        throw ConfigError(row, "expected " + std::to_string(N) + " entries");
      for (std::size_t j = 0; j < N; ++j)
        n.adjacency[i][j] = read_weight(a[i][j], row + "[" + std::to_string(j) + "]");
    }
  } else {
    const EdgeWeight w = read_weight(r.at("all_to_all"), r.field("all_to_all"));
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j)
        if (i != j) n.adjacency[i][j] = w;
  }
  n.nu1 = r.number("nu1", 0.0);
  n.nu2 = r.number("nu2", 0.0);
  if (r.has("theta0")) {
    const json& t = r.at("theta0");
    if (t.is_string()) {
      if (t.get<std::string>() != "random")
        throw ConfigError(r.field("theta0"), "expected an array or \"random\"");
      n.random_theta0 = true;
    } else {
      n.theta0 = r.numbers("theta0");
      if (n.theta0.size() != N)
        throw ConfigError(r.field("theta0"), "needs one phase per node");
    }
  }
  n.horizon_mult = r.positive("horizon_mult", n.horizon_mult);
  n.samples = r.count("samples", n.samples, 2);
  try {
    n.build().validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(r.field("adjacency"), e.what());
  }
  return n;
}

SweepConfig read_sweep(const Reader& r) {
  r.allow({"omega", "c2", "a", "coupling", "detunings", "eps_grid", "rel_width",
           "tail_min", "tail_per_eps", "sample_dt", "transient_frac",
           "threshold_rel", "initial_difference", "tolerance", "order_ratio_z"});
  SweepConfig s;
  PairExperiment& e = s.experiment;
  e.omega = r.number("omega", e.omega);
  e.c2 = r.number("c2", e.c2);
  e.a = r.number("a", e.a);
  const std::string kind = r.str("coupling", "direct");
  if (kind == "direct") e.coupling = CouplingKind::direct;
  else if (kind == "diffusive") e.coupling = CouplingKind::diffusive;
  else throw ConfigError(r.field("coupling"), "expected \"direct\" or \"diffusive\"");
  if (!(e.omega - e.c2 > 0.0))
    throw ConfigError(r.field("omega"), "omega - c2 must be positive");
  if (r.has("detunings")) s.detunings = r.numbers("detunings");
  for (double d : s.detunings)
    if (!(d >= 0.0)) throw ConfigError(r.field("detunings"), "must be >= 0");
  s.eps_grid = r.numbers("eps_grid");
  if (s.eps_grid.empty()) throw ConfigError(r.field("eps_grid"), "must not be empty");
  for (std::size_t i = 0; i < s.eps_grid.size(); ++i)
    if (!(s.eps_grid[i] > 0.0) || (i > 0 && !(s.eps_grid[i] > s.eps_grid[i - 1])))
      throw ConfigError(r.field("eps_grid"), "must be positive and increasing");
  s.rel_width = r.positive("rel_width", s.rel_width);
  e.tail_min = r.positive("tail_min", e.tail_min);
  e.tail_per_eps = r.positive("tail_per_eps", e.tail_per_eps);
  e.sample_dt = r.positive("sample_dt", e.sample_dt);
  e.transient_frac = r.number("transient_frac", e.transient_frac);
  if (!(e.transient_frac >= 0.0 && e.transient_frac < 1.0))
    throw ConfigError(r.field("transient_frac"), "must lie in [0, 1)");
  e.threshold_rel = r.positive("threshold_rel", e.threshold_rel);
  e.initial_difference = r.number("initial_difference", e.initial_difference);
  if (r.has("tolerance")) e.tol = read_tolerance(r.child("tolerance"), e.tol);
  s.order_ratio_z = r.str("order_ratio_z", "");
  if (!s.order_ratio_z.empty() && s.order_ratio_z != "adjoint" &&
      s.order_ratio_z != "imaginary_exp")
    throw ConfigError(r.field("order_ratio_z"),
                      "expected \"adjoint\" or \"imaginary_exp\"");
  return s;
}

}  // namespace

Vec imaginary_exp_sensitivity(double theta) {
  Vec z(2);
  z << std::sin(theta), std::cos(theta);
  return z;
}

OscillatorModel ModelConfig::build() const { return make_model(name, params); }

Vec ModelConfig::initial_guess(const OscillatorModel& model) const {
  if (guess) return *guess;
  Vec g = model.center.size() == model.dim ? model.center : Vec::Zero(model.dim);
  g[0] += 1.0;
  return g;
}

NetworkSpec NetworkConfig::build() const {
  NetworkSpec spec;
  for (const NodeConfig& node : nodes) {
    spec.models.push_back(node.model.build());
    spec.cycle_guess.push_back(node.model.initial_guess(spec.models.back()));
  }
  spec.epsilon = epsilon;
  spec.coupling = coupling;
  spec.adjacency = adjacency;
  spec.nu1 = nu1;
  spec.nu2 = nu2;
  bool any = false;
  for (const NodeConfig& node : nodes) any = any || !node.prescribed_z.empty();
  if (any) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const std::string& z = nodes[i].prescribed_z;
      if (z == "imaginary_exp") {
        if (spec.models[i].dim != 2)
          throw InvalidArgument("imaginary_exp sensitivity needs a planar model");
        spec.prescribed_Z.emplace_back(imaginary_exp_sensitivity);
      } else if (z == "analytic") {
        if (!spec.models[i].analytic_Z)
          throw InvalidArgument("model " + spec.models[i].name +
                                " has no analytic sensitivity");
        spec.prescribed_Z.push_back(spec.models[i].analytic_Z);
      } else {
        spec.prescribed_Z.emplace_back();
      }
    }
  }
  return spec;
}

RunConfig parse_config(const json& raw) {
  const Reader r(raw, "");
  r.allow({"description", "model", "cycle", "tolerance", "prc", "isochrons",
           "forcing", "reduce", "network", "sweep", "fit_scaling", "seed",
           "format"});
  RunConfig cfg;
  cfg.raw = raw;
  if (r.has("description")) r.str("description");
  if (r.has("model")) cfg.model = read_model(r.child("model"));
  if (r.has("tolerance")) {
    cfg.cycle.tol = read_tolerance(r.child("tolerance"), cfg.cycle.tol);
  }
  if (r.has("cycle")) {
    const Reader c = r.child("cycle");
    c.allow({"grid_size", "newton_tol", "max_newton", "max_return_time"});
    cfg.cycle.grid_size = c.count("grid_size", cfg.cycle.grid_size, 8);
    cfg.cycle.newton_tol = c.positive("newton_tol", cfg.cycle.newton_tol);
    cfg.cycle.max_newton =
        static_cast<int>(c.count("max_newton", static_cast<std::size_t>(cfg.cycle.max_newton)));
    cfg.cycle.max_return_time = c.positive("max_return_time", cfg.cycle.max_return_time);
  }
  if (r.has("prc")) {
    const Reader p = r.child("prc");
    p.allow({"method"});
    const std::string m = p.str("method", "adjoint");
    if (m == "adjoint") cfg.prc_method = SensitivityMethod::adjoint;
    else if (m == "finite_difference") cfg.prc_method = SensitivityMethod::finite_difference;
    else throw ConfigError(p.field("method"), "expected \"adjoint\" or \"finite_difference\"");
  }
  if (r.has("isochrons")) {
    const Reader i = r.child("isochrons");
    i.allow({"thetas", "count", "radial_range", "points"});
    IsochronConfig iso;
    if (i.has("thetas") && i.has("count"))
      throw ConfigError(i.field("count"), "give thetas or count, not both");
    if (i.has("thetas")) iso.thetas = i.numbers("thetas");
    if (i.has("count")) {
      const std::size_t n = i.count("count", 1);
      iso.thetas = phase_grid(n);
    }
    if (i.has("radial_range")) {
      const auto range = i.numbers("radial_range");
      if (range.size() != 2 || !(range[0] > 0.0) || !(range[1] >= range[0]))
        throw ConfigError(i.field("radial_range"), "expected [r_lo, r_hi] with 0 < r_lo <= r_hi");
      iso.r_lo = range[0];
      iso.r_hi = range[1];
    }
    iso.points = i.count("points", iso.points);
    cfg.isochrons = iso;
  }
  if (r.has("forcing")) {
    const Reader f = r.child("forcing");
    f.allow({"component", "amplitude", "frequency"});
    ForcingConfig fc;
    fc.component = static_cast<int>(f.integer("component", fc.component));
    fc.amplitude = f.number("amplitude", fc.amplitude);
    fc.frequency = f.positive("frequency", fc.frequency);
    if (fc.component < 0) throw ConfigError(f.field("component"), "must be >= 0");
    cfg.forcing = fc;
  }
  if (r.has("reduce")) {
    const Reader d = r.child("reduce");
    d.allow({"omega_force", "grid_size", "compare", "horizon_mult", "samples"});
    cfg.reduce.omega_force = d.positive("omega_force", cfg.reduce.omega_force);
    cfg.reduce.grid_size = d.count("grid_size", cfg.reduce.grid_size, 8);
    cfg.reduce.compare = d.boolean("compare", cfg.reduce.compare);
    cfg.reduce.horizon_mult = d.positive("horizon_mult", cfg.reduce.horizon_mult);
    cfg.reduce.samples = d.count("samples", cfg.reduce.samples, 2);
  }
  if (r.has("network")) cfg.network = read_network(r.child("network"));
  if (r.has("sweep")) cfg.sweep = read_sweep(r.child("sweep"));
  if (r.has("fit_scaling")) {
    const Reader f = r.child("fit_scaling");
    f.allow({"points"});
    const json& pts = f.at("points");
    if (!pts.is_array()) throw ConfigError(f.field("points"), "expected an array");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::string path = f.field("points") + "[" + std::to_string(i) + "]";
      if (!pts[i].is_array() || pts[i].size() != 2 || !pts[i][0].is_number() ||
          !pts[i][1].is_number())
        throw ConfigError(path, "expected [detuning, eps_c]");
      cfg.fit_points.emplace_back(pts[i][0].get<double>(), pts[i][1].get<double>());
    }
  }
  if (r.has("seed")) {
    const long long s = r.integer("seed", 0);
    if (s < 0) throw ConfigError("seed", "must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (r.has("format")) {
    const std::string f = r.str("format");
    if (f != "csv" && f != "json") throw ConfigError("format", "expected csv or json");
    cfg.format = f;
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path);
  json raw;
  try {
    in >> raw;
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(raw);
}

}  // namespace phasered::cli
