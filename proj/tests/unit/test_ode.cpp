#include <doctest.h>

#include <cmath>
#include <vector>

#include "phasered/errors.hpp"
#include "phasered/models.hpp"
#include "phasered/ode.hpp"

using namespace phasered;

namespace {
Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}
}  // namespace

TEST_CASE("exponential decay to tolerance") {
  const Rhs rhs = [](double, const Vec& x, Vec& d) { d = -x; };
  OdeOptions o;
  o.tol = {1e-12, 1e-14};
  const Vec x = advance(rhs, Vec::Ones(1), 0.0, 5.0, o);
  CHECK(std::abs(x[0] - std::exp(-5.0)) < 1e-12);
}

TEST_CASE("backward integration inverts forward") {
  const auto m = make_model("spiral");
  const Vec x0 = v2(0.4, 0.9);
  const Vec x1 = flow(m, x0, 1.3, {1e-12, 1e-14});
  const Vec back = flow(m, x1, -1.3, {1e-12, 1e-14});
  CHECK((back - x0).norm() < 1e-9);
}

TEST_CASE("flow group property") {
  const auto m = make_model("radial");
  const Vec x0 = v2(0.3, -0.2);
  const Tolerance tol{1e-12, 1e-14};
  const Vec direct = flow(m, x0, 2.5, tol);
  const Vec split = flow(m, flow(m, x0, 1.1, tol), 1.4, tol);
  CHECK((direct - split).norm() < 1e-9);
}

TEST_CASE("radial flow matches the closed form") {
  // r(t)^2 = 1 / (1 + (1/r0^2 - 1) e^{-2t}), φ(t) = φ0 + t
  const auto m = make_model("radial");
  const double r0 = 0.25, t = 3.0;
  const Vec x = flow(m, v2(r0, 0.0), t, {1e-12, 1e-14});
  const double r = 1.0 / std::sqrt(1.0 + (1.0 / (r0 * r0) - 1.0) * std::exp(-2.0 * t));
  CHECK(std::hypot(x[0], x[1]) == doctest::Approx(r).epsilon(1e-10));
  CHECK(std::atan2(x[1], x[0]) == doctest::Approx(t).epsilon(1e-10));
}

TEST_CASE("dense output is accurate between steps") {
  const Rhs rhs = [](double t, const Vec&, Vec& d) { d[0] = std::cos(t); };
  OdeOptions o;
  o.tol = {1e-10, 1e-12};
  const Trajectory tr = integrate(rhs, Vec::Zero(1), 0.0, 10.0, o);
  double worst = 0.0;
  for (double t = 0.05; t < 10.0; t += 0.37) worst = std::max(worst, std::abs(tr.at(t)[0] - std::sin(t)));
  CHECK(worst < 1e-8);
  CHECK_THROWS(tr.at(11.0));
}

TEST_CASE("sample returns states at requested times") {
  const Rhs rhs = [](double, const Vec& x, Vec& d) { d = -2.0 * x; };
  const std::vector<double> times{0.0, 0.5, 1.0, 2.0};
  const auto xs = sample(rhs, Vec::Ones(1), 0.0, times);
  REQUIRE(xs.size() == times.size());
  for (std::size_t k = 0; k < times.size(); ++k)
    CHECK(xs[k][0] == doctest::Approx(std::exp(-2.0 * times[k])).epsilon(1e-7));
}

TEST_CASE("section crossing on the unit circle") {
  const auto m = make_model("radial");
  const auto c = find_crossing(m, v2(1.0, -0.1), default_section(m), 10.0, {1e-12, 1e-14});
  CHECK(std::abs(c.x[1]) < crossing_level_tolerance);
  CHECK(c.t == doctest::Approx(std::atan2(0.1, 1.0)).epsilon(1e-9));
}

TEST_CASE("all crossings of a periodic orbit") {
  const auto m = make_model("radial");
  const auto cs = find_crossings(autonomous_rhs(m), v2(1.0, -0.1), 0.0, 4 * two_pi,
                                 default_section(m));
  CHECK(cs.size() == 4);
  for (std::size_t k = 1; k < cs.size(); ++k)
    CHECK(cs[k].t - cs[k - 1].t == doctest::Approx(two_pi).epsilon(1e-7));
}

TEST_CASE("missing crossing and leaving the basin are reported") {
  const auto m = make_model("radial");
  CHECK_THROWS_AS(find_crossing(m, v2(1.0, -0.1), Section::coordinate(0, 5.0), 10.0),
                  CrossingError);
  CHECK_THROWS_AS(flow(m, v2(0.0, 0.0), 1.0), InvalidArgument);
}

TEST_CASE("finite-time blow-up is an integration error") {
  const Rhs rhs = [](double, const Vec& x, Vec& d) { d[0] = x[0] * x[0]; };
  CHECK_THROWS_AS(advance(rhs, Vec::Ones(1), 0.0, 2.0), IntegrationError);
}
