#include <doctest.h>

#include <cmath>
#include <vector>

#include "phasered/diagnostics.hpp"
#include "phasered/errors.hpp"

using namespace phasered;

namespace {
std::vector<double> grid(double t1, double dt) {
  std::vector<double> t;
  for (double s = 0.0; s <= t1 + 1e-12; s += dt) t.push_back(s);
  return t;
}
}  // namespace

TEST_CASE("unwrap restores a drifting phase") {
  std::vector<double> wrapped, exact;
  for (int k = 0; k < 200; ++k) {
    exact.push_back(0.1 * k);
    wrapped.push_back(wrap_phase(0.1 * k));
  }
  const auto u = unwrap(wrapped);
  for (std::size_t k = 0; k < u.size(); ++k) CHECK(u[k] == doctest::Approx(exact[k]));
}

TEST_CASE("constant drift gives S equal to the drift") {
  const auto t = grid(2000.0, 0.5);
  std::vector<double> phi;
  for (double s : t) phi.push_back(wrap_phase(0.02 * s + 0.4));
  const auto r = sync_measure(t, phi, 1e-3);
  CHECK(r.S == doctest::Approx(0.02).epsilon(1e-6));
  CHECK_FALSE(r.locked);
  CHECK(r.slips == 3);
  CHECK_FALSE(r.psi_star.has_value());
}

TEST_CASE("S is invariant under a constant offset") {
  const auto t = grid(500.0, 0.5);
  std::vector<double> a, b;
  for (double s : t) {
    a.push_back(0.3 * std::sin(0.1 * s));
    b.push_back(0.3 * std::sin(0.1 * s) + 2.0);
  }
  CHECK(sync_measure(t, a, 1e-3).S == doctest::Approx(sync_measure(t, b, 1e-3).S).epsilon(1e-9));
}

TEST_CASE("locked signal reports its mean difference") {
  const auto t = grid(500.0, 0.5);
  std::vector<double> phi(t.size(), 0.52);
  const auto r = sync_measure(t, phi, 1e-3);
  CHECK(r.locked);
  REQUIRE(r.psi_star.has_value());
  CHECK(*r.psi_star == doctest::Approx(0.52));
  CHECK_THROWS_AS(sync_measure({0.0, 1.0}, {0.0, 0.0}, 1e-3), InvalidArgument);
}

TEST_CASE("uncoupled pair drifts at the detuning") {
  PairExperiment ex;
  const auto r = run_pair(ex, 0.02, 0.0);
  CHECK(r.S == doctest::Approx(0.02).epsilon(0.05));
  CHECK_FALSE(r.locked);
}

TEST_CASE("weakly coupled pair follows the Adler rate") {
  // φ' = Δω − 2ε sin φ drifts at mean rate w = √(Δω² − 4ε²); over a slip
  // ⟨φ'²⟩ = (1/T)∫φ' dφ = Δω·w, so S = √(Δω·w).
  PairExperiment ex;
  const double dw = 0.02, eps = 0.002;
  const auto r = run_pair(ex, dw, eps);
  CHECK_FALSE(r.locked);
  const double S = std::sqrt(dw * std::sqrt(dw * dw - 4 * eps * eps));
  CHECK(r.S == doctest::Approx(S).epsilon(0.02));
}

TEST_CASE("strongly coupled pair locks") {
  PairExperiment ex;
  const auto r = run_pair(ex, 0.02, 0.2);
  CHECK(r.locked);
  CHECK(r.S < 1e-3);
}

TEST_CASE("critical coupling matches the first-order threshold") {
  PairExperiment ex;
  const std::vector<double> g{0.0025, 0.005, 0.01, 0.02, 0.04};
  const auto res = critical_coupling(ex, 0.02, g);
  REQUIRE(res.status == CriticalStatus::found);
  // q̄(φ) = sin φ − c₂ cos φ; the cosine parts cancel in the difference
  // equation φ' = Δω − 2ε sin φ, so ε_c = Δω/2
  CHECK(res.epsilon_c == doctest::Approx(0.01).epsilon(0.06));
  CHECK(res.lower < res.epsilon_c);
  CHECK((res.epsilon_c - res.lower) / res.epsilon_c <= 0.05 + 1e-12);
}

TEST_CASE("zero detuning locks below the grid") {
  PairExperiment ex;
  const auto res = critical_coupling(ex, 0.0, {0.01, 0.02});
  CHECK(res.status == CriticalStatus::below_range);
  CHECK(res.epsilon_c <= 0.01);
}

TEST_CASE("no locking inside the grid is reported") {
  PairExperiment ex;
  const auto res = critical_coupling(ex, 0.08, {0.001, 0.002});
  CHECK(res.status == CriticalStatus::above_range);
}

TEST_CASE("scaling fits on exact laws") {
  std::vector<std::pair<double, double>> sq, lin;
  for (double d : {0.01, 0.02, 0.04, 0.08, 0.16}) {
    sq.emplace_back(d, std::sqrt(d));
    lin.emplace_back(d, 0.5 * d);
  }
  const auto a = scaling_fit(sq);
  CHECK(a.exponent == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(a.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(scaling_fit(lin).exponent == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(scaling_fit({{0.1, 0.2}, {0.2, 0.3}}), InvalidArgument);
  CHECK_FALSE(scaling_fit({{0.01, 0.1}, {0.02, 0.14}, {0.04, 0.2}}).warnings.empty());
}

TEST_CASE("order ratio guard rails") {
  const auto z = order_ratio(0.0, 0.02);
  CHECK(z.first_order_vanishing);
  CHECK(z.ratio == doctest::Approx(0.02 / order_ratio_floor));
  CHECK(std::isfinite(z.ratio));
  CHECK(order_ratio(0.02, 0.02).ratio == doctest::Approx(0.0));
}

TEST_CASE("order ratio of Kuramoto-form coupling is near zero") {
  // diffusive radial pair: q̄(φ) = sin φ on both edges
  NetworkSpec s;
  s.models = {make_model("radial"), make_model("radial")};
  s.epsilon = 0.01;
  s.adjacency = {{{}, {1.0}}, {{1.0}, {}}};
  s.coupling = CouplingKind::diffusive;
  const auto pm = build_phase_model(s);
  // φ' = Δω − 2ε sin φ locks at ε = Δω/2
  const auto r = order_ratio(pm, 0.01, 0.02);
  CHECK(std::abs(r.ratio) < 1e-6);
  CHECK_FALSE(r.first_order_vanishing);
}
