#include <doctest.h>

#include <cmath>
#include <random>

#include "phasered/limit_cycle.hpp"
#include "phasered/models.hpp"
#include "phasered/ode.hpp"
#include "phasered/phase_geometry.hpp"

using namespace phasered;

namespace {
Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}
Vec polar(double r, double phi) { return v2(r * std::cos(phi), r * std::sin(phi)); }
double circ(double a, double b) { return std::abs(wrap_difference(a - b)); }

struct Fixture {
  OscillatorModel model;
  LimitCycle cycle;
  explicit Fixture(const char* name, Params p = {})
      : model(make_model(name, p)), cycle(find_limit_cycle(model, v2(1.2, 0.1))) {}
};
}  // namespace

TEST_CASE("asymptotic phase equals the closed forms") {
  // radial: Θ = φ; spiral: Θ = φ + log r
  Fixture radial("radial"), spiral("spiral");
  for (double r : {0.2, 0.7, 1.0, 1.8}) {
    for (double phi : {0.0, 1.0, 4.0}) {
      const Vec x = polar(r, phi);
      CHECK(circ(asymptotic_phase(radial.model, radial.cycle, x), phi) < 1e-8);
      CHECK(circ(asymptotic_phase(spiral.model, spiral.cycle, x), phi + std::log(r)) < 1e-8);
    }
  }
}

TEST_CASE("phase advances uniformly along the flow") {
  Fixture f("stuart_landau", {{"omega", 2.0}, {"c2", 1.0}});
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> ur(0.3, 1.8), ua(0.0, two_pi);
  for (int k = 0; k < 10; ++k) {
    const Vec x = polar(ur(rng), ua(rng));
    const double t = 0.7;
    const double a = asymptotic_phase(f.model, f.cycle, x);
    const double b = asymptotic_phase(f.model, f.cycle, flow(f.model, x, t, {1e-12, 1e-14}));
    CHECK(circ(b, a + f.cycle.omega0 * t) < 1e-7);
  }
}

TEST_CASE("adjoint sensitivity reproduces the analytic gradients") {
  for (const auto* name : {"radial", "spiral"}) {
    Fixture f(name);
    const auto Z = phase_sensitivity(f.model, f.cycle, SensitivityMethod::adjoint);
    double worst = 0.0;
    for (std::size_t k = 0; k < Z.grid.size(); ++k)
      worst = std::max(worst, (Z.Z[k] - f.model.analytic_Z(Z.grid[k])).cwiseAbs().maxCoeff());
    CHECK(worst < 1e-8);
    CHECK(normalization_error(f.model, f.cycle, Z) < 1e-10);
    CHECK((Z.at(0.3) - f.model.analytic_Z(0.3)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("stuart landau sensitivity against the shear formula") {
  // Z = (−sin θ − c₂ cos θ, cos θ − c₂ sin θ) on the unit circle
  const double c2 = 0.7;
  Fixture f("stuart_landau", {{"omega", 1.5}, {"c2", c2}});
  const auto Z = phase_sensitivity(f.model, f.cycle, SensitivityMethod::adjoint);
  for (double th : {0.0, 1.0, 2.5, 5.0}) {
    // the cycle phase θ differs from the polar angle only by the anchor, which is (1,0)
    const Vec ref = v2(-std::sin(th) - c2 * std::cos(th), std::cos(th) - c2 * std::sin(th));
    CHECK((Z.at(th) - ref).norm() < 1e-7);
  }
}

TEST_CASE("finite differences agree with the adjoint") {
  Fixture f("spiral");
  CycleOptions co;
  co.grid_size = 32;
  const auto cycle = find_limit_cycle(f.model, v2(1.2, 0.1), co);
  const auto za = phase_sensitivity(f.model, cycle, SensitivityMethod::adjoint);
  const auto zf = phase_sensitivity(f.model, cycle, SensitivityMethod::finite_difference);
  double worst = 0.0;
  for (std::size_t k = 0; k < za.Z.size(); ++k)
    worst = std::max(worst, (za.Z[k] - zf.Z[k]).cwiseAbs().maxCoeff());
  CHECK(worst < 1e-4);
}

TEST_CASE("spiral isochrons are log spirals") {
  Fixture f("spiral");
  for (double theta : {0.0, 2.0}) {
    const auto iso = compute_isochron(f.model, f.cycle, theta, {0.3, 2.0}, 20);
    REQUIRE(iso.points.size() == 20);
    for (const auto& p : iso.points) {
      const double r = p.norm();
      CHECK(circ(std::atan2(p[1], p[0]) + std::log(r), theta) < 1e-6);
    }
    CHECK(iso.extent == doctest::Approx(1.7).epsilon(1e-6));
  }
}

TEST_CASE("radial isochrons are rays") {
  Fixture f("radial");
  const auto iso = compute_isochron(f.model, f.cycle, 1.0, {0.5, 1.5}, 11);
  for (const auto& p : iso.points) CHECK(circ(std::atan2(p[1], p[0]), 1.0) < 1e-6);
}

TEST_CASE("prescribed sensitivity is flagged") {
  Fixture f("radial");
  const auto Z = prescribed_sensitivity(f.cycle, f.model.analytic_Z);
  CHECK(Z.prescribed);
  CHECK(normalization_error(f.model, f.cycle, Z) < 1e-9);
}
