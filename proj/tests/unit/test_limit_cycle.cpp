#include <doctest.h>

#include <cmath>
#include <sstream>

#include "phasered/errors.hpp"
#include "phasered/limit_cycle.hpp"
#include "phasered/models.hpp"
#include "phasered/ode.hpp"

using namespace phasered;

namespace {
Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

// λ from the radial equation alone: r' = g(r) has λ = g'(1) at the fixed
// point r = 1, estimated by the decay of a small offset.
double radial_rate_oracle(double (*g)(double)) {
  const double d = 1e-6;
  return (g(1.0 + d) - g(1.0 - d)) / (2 * d);
}
double radial_g(double r) { return r * (1 - r * r); }
}  // namespace

TEST_CASE("period and frequency of the built-in cycles") {
  for (const auto* name : {"radial", "spiral"}) {
    const auto m = make_model(name);
    const auto c = find_limit_cycle(m, v2(1.3, 0.2));
    CHECK(c.period == doctest::Approx(two_pi).epsilon(1e-9));
    CHECK(c.omega0 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(c.size() == 256);
  }
  const auto sl = make_model("stuart_landau", {{"omega", 3.0}, {"c2", 0.5}});
  const auto c = find_limit_cycle(sl, v2(0.6, 0.0));
  CHECK(c.period == doctest::Approx(two_pi / 2.5).epsilon(1e-9));
}

TEST_CASE("cycle nodes lie on the unit circle and start at the anchor") {
  const auto m = make_model("spiral");
  const auto c = find_limit_cycle(m, v2(0.5, 0.5));
  CHECK((c.anchor - v2(1.0, 0.0)).norm() < 1e-8);
  double worst = 0.0;
  for (const auto& p : c.points) worst = std::max(worst, std::abs(p.norm() - 1.0));
  CHECK(worst < 1e-9);
  // spiral angular speed on r = 1 is 1, so γ(θ) = (cos θ, sin θ)
  CHECK((c.at(1.0) - v2(std::cos(1.0), std::sin(1.0))).norm() < 1e-8);
  CHECK((c.derivative(1.0) - v2(-std::sin(1.0), std::cos(1.0))).norm() < 1e-6);
}

TEST_CASE("floquet exponent agrees with the radial linearization") {
  const double oracle = radial_rate_oracle(radial_g);
  CHECK(oracle == doctest::Approx(-2.0).epsilon(1e-8));
  for (const auto* name : {"radial", "spiral"}) {
    const auto m = make_model(name);
    const auto c = find_limit_cycle(m, v2(1.1, 0.0));
    CHECK(std::abs(c.floquet - oracle) < 1e-4);
  }
}

TEST_CASE("monodromy has multipliers 1 and e^{λT}") {
  const auto m = make_model("radial");
  const auto c = find_limit_cycle(m, v2(1.1, 0.0));
  const Mat M = monodromy(m, c);
  Eigen::EigenSolver<Mat> es(M);
  auto ev = es.eigenvalues();
  double a = std::abs(ev[0]), b = std::abs(ev[1]);
  if (a < b) std::swap(a, b);
  CHECK(a == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(b == doctest::Approx(std::exp(-2.0 * two_pi)).epsilon(1e-4));
}

TEST_CASE("unstable cycle is rejected") {
  // time-reversed radial model: the cycle repels
  const auto base = make_model("radial");
  const auto m = make_custom_model("reversed", 2, [base](const Vec& x) { return Vec(-base.f(x)); });
  CHECK_THROWS_AS(find_limit_cycle(m, v2(1.0, 0.01)), Error);
}

TEST_CASE("projection onto the cycle") {
  const auto m = make_model("radial");
  const auto c = find_limit_cycle(m, v2(1.1, 0.0));
  const auto p = project_to_cycle(c, 1.5 * v2(std::cos(2.0), std::sin(2.0)));
  CHECK(p.theta == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(p.distance == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("cycle csv has one row per node") {
  const auto m = make_model("radial");
  CycleOptions o;
  o.grid_size = 16;
  const auto c = find_limit_cycle(m, v2(1.1, 0.0), o);
  std::ostringstream os;
  write_cycle_csv(c, os);
  const std::string s = os.str();
  CHECK(s.rfind("theta,x1,x2\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 17);
}
