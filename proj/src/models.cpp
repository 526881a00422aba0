#include "phasered/models.hpp"

#include <array>
#include <cmath>

#include "phasered/errors.hpp"

namespace phasered {

namespace {

// Stuart–Landau in real form, z = x + iy:
//   ż = (1 + iω) z − (1 + i c2) |z|² z
// radial is the special case ω = 1, c2 = 0.
Vec stuart_landau_field(const Vec& s, double omega, double c2) {
  const double x = s[0], y = s[1];
  const double r2 = x * x + y * y;
  Vec out(2);
  out[0] = x - omega * y - r2 * (x - c2 * y);
  out[1] = omega * x + y - r2 * (c2 * x + y);
  return out;
}

Mat stuart_landau_jacobian(const Vec& s, double omega, double c2) {
  const double x = s[0], y = s[1];
  const double r2 = x * x + y * y;
  Mat J(2, 2);
  J(0, 0) = 1.0 - r2 - 2.0 * x * x + 2.0 * c2 * x * y;
  J(0, 1) = -omega - 2.0 * x * y + c2 * (r2 + 2.0 * y * y);
  J(1, 0) = omega - c2 * (r2 + 2.0 * x * x) - 2.0 * x * y;
  J(1, 1) = 1.0 - r2 - 2.0 * y * y - 2.0 * c2 * x * y;
  return J;
}

OscillatorModel planar_base(std::string name) {
  OscillatorModel m;
  m.name = std::move(name);
  m.dim = 2;
  m.center = Vec::Zero(2);
  m.basin_radius_min = phaseless_radius;
  return m;
}

OscillatorModel make_radial() {
  OscillatorModel m = planar_base("radial");
  m.f = [](const Vec& s) { return stuart_landau_field(s, 1.0, 0.0); };
  m.jacobian = [](const Vec& s) { return stuart_landau_jacobian(s, 1.0, 0.0); };
  m.analytic_phase = [](const Vec& s) {
    return wrap_phase(std::atan2(s[1], s[0]));
  };
  m.analytic_Z = [](double theta) {
    Vec z(2);
    z << -std::sin(theta), std::cos(theta);
    return z;
  };
  return m;
}

// ẋ = x − (x + y) r², ẏ = y + (x − y) r²; in polar form ṙ = r(1 − r²), φ̇ = r².
OscillatorModel make_spiral() {
  OscillatorModel m = planar_base("spiral");
  m.f = [](const Vec& s) {
    const double x = s[0], y = s[1];
    const double r2 = x * x + y * y;
    Vec out(2);
    out[0] = x - (x + y) * r2;
    out[1] = y + (x - y) * r2;
    return out;
  };
  m.jacobian = [](const Vec& s) {
    const double x = s[0], y = s[1];
    const double r2 = x * x + y * y;
    Mat J(2, 2);
    J(0, 0) = 1.0 - r2 - 2.0 * x * (x + y);
    J(0, 1) = -r2 - 2.0 * y * (x + y);
    J(1, 0) = r2 + 2.0 * x * (x - y);
    J(1, 1) = 1.0 - r2 + 2.0 * y * (x - y);
    return J;
  };
  m.analytic_phase = [](const Vec& s) {
    const double r = std::hypot(s[0], s[1]);
    return wrap_phase(std::atan2(s[1], s[0]) + std::log(r));
  };
  m.analytic_Z = [](double theta) {
    Vec z(2);
    z << std::cos(theta) - std::sin(theta), std::cos(theta) + std::sin(theta);
    return z;
  };
  return m;
}

OscillatorModel make_stuart_landau(const Params& params) {
  auto need = [&](const char* key) {
    auto it = params.find(key);
    if (it == params.end())
      throw InvalidArgument(std::string("stuart_landau requires parameter '") +
                            key + "'");
    return it->second;
  };
  const double omega = need("omega");
  const double c2 = need("c2");
  for (const auto& [key, value] : params) {
    if (key != "omega" && key != "c2")
      throw InvalidArgument("stuart_landau: unknown parameter '" + key + "'");
  }
  if (omega - c2 <= 0.0)
    throw InvalidArgument(
        "stuart_landau: cycle frequency omega - c2 must be positive");

  OscillatorModel m = planar_base("stuart_landau");
  m.params = {{"omega", omega}, {"c2", c2}, {"Omega", omega - c2}};
  m.f = [omega, c2](const Vec& s) { return stuart_landau_field(s, omega, c2); };
  m.jacobian = [omega, c2](const Vec& s) {
    return stuart_landau_jacobian(s, omega, c2);
  };
  // Θ = arg z − c2 ln|z| advances at ω − c2 everywhere off the origin.
  m.analytic_phase = [c2](const Vec& s) {
    const double r = std::hypot(s[0], s[1]);
    return wrap_phase(std::atan2(s[1], s[0]) - c2 * std::log(r));
  };
  m.analytic_Z = [c2](double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    Vec z(2);
    z << -s - c2 * c, c - c2 * s;
    return z;
  };
  return m;
}

}  // namespace

Mat OscillatorModel::jacobian_at(const Vec& x) const {
  if (jacobian) return jacobian(x);
  Mat J(dim, dim);
  Vec xp = x, xm = x;
  for (int j = 0; j < dim; ++j) {
    const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    J.col(j) = (f(xp) - f(xm)) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return J;
}

bool OscillatorModel::in_basin(const Vec& x) const {
  if (x.size() != dim || !x.allFinite()) return false;
  if (basin_radius_min <= 0.0) return true;
  const Vec c = center.size() == dim ? center : Vec::Zero(dim);
  return (x - c).norm() >= basin_radius_min;
}

double OscillatorModel::param(std::string_view key) const {
  auto it = params.find(key);
  if (it == params.end())
    throw InvalidArgument(name + ": missing parameter '" + std::string(key) +
                          "'");
  return it->second;
}

OscillatorModel make_model(std::string_view name, const Params& params) {
  if (name == "radial" || name == "spiral") {
    if (!params.empty())
      throw InvalidArgument(std::string(name) + " takes no parameters");
    return name == "radial" ? make_radial() : make_spiral();
  }
  if (name == "stuart_landau") return make_stuart_landau(params);
  if (name == "custom")
    throw InvalidArgument(
        "custom models need a vector field; use make_custom_model");
  throw InvalidArgument("unknown model '" + std::string(name) + "'");
}

OscillatorModel make_custom_model(std::string name, int dim, VectorField f,
                                  JacobianField jacobian, Params params) {
  if (dim <= 0) throw InvalidArgument("model dimension must be positive");
  if (!f) throw InvalidArgument("custom model needs a vector field");
  OscillatorModel m;
  m.name = std::move(name);
  m.dim = dim;
  m.f = std::move(f);
  m.jacobian = std::move(jacobian);
  m.params = std::move(params);
  m.center = Vec::Zero(dim);
  return m;
}

Perturbation sinusoidal_forcing(int dim, int component, double amplitude,
                                double frequency) {
  if (component < 0 || component >= dim)
    throw InvalidArgument("forcing component out of range");
  if (frequency <= 0.0) throw InvalidArgument("forcing frequency must be > 0");
  Perturbation pert;
  pert.p = [dim, component, frequency](const Vec&, double t) {
    Vec out = Vec::Zero(dim);
    out[component] = std::sin(frequency * t);
    return out;
  };
  pert.period = two_pi / frequency;
  pert.amplitude = amplitude;
  return pert;
}

Perturbation zero_perturbation(int dim) {
  Perturbation pert;
  pert.p = [dim](const Vec&, double) { return Vec::Zero(dim).eval(); };
  pert.period = two_pi;
  return pert;
}

bool check_periodicity(const Perturbation& pert, const std::vector<Vec>& states,
                       double tol) {
  if (!pert.period) return true;
  const double T = *pert.period;
  constexpr std::array<double, 5> times{0.0, 0.37, 1.3, 2.9, 7.1};
  for (const Vec& x : states) {
    for (double t : times) {
      const Vec a = pert(x, t);
      const Vec b = pert(x, t + T);
      if ((a - b).lpNorm<Eigen::Infinity>() > tol * std::max(1.0, a.norm()))
        return false;
    }
  }
  return true;
}

}  // namespace phasered
