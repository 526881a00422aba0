// Acceptance checks: one PASS/FAIL line per criterion, each with its accuracy
// bound and its runtime budget. Exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "phasered/diagnostics.hpp"
#include "phasered/limit_cycle.hpp"
#include "phasered/models.hpp"
#include "phasered/network.hpp"
#include "phasered/ode.hpp"
#include "phasered/phase_geometry.hpp"
#include "phasered/reduction.hpp"

using namespace phasered;

namespace {

Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

Vec polar(double r, double phi) { return v2(r * std::cos(phi), r * std::sin(phi)); }

double circ(double a, double b) { return std::abs(wrap_difference(a - b)); }

OscillatorModel stuart_landau(double omega = 2.0, double c2 = 1.0) {
  return make_model("stuart_landau", {{"omega", omega}, {"c2", c2}});
}

struct Outcome {
  bool ok = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs <= budget_s;
  const bool pass = o.ok && in_time;
  if (!pass) ++failures;
  std::printf("%s [%2d] %s: %s (%.2f s, budget %.0f s%s)\n", pass ? "PASS" : "FAIL", id, title,
              o.detail.c_str(), secs, budget_s, in_time ? "" : ", over budget");
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double sensitivity_error(const char* name) {
  const auto m = make_model(name);
  const auto c = find_limit_cycle(m, v2(1.3, 0.2));
  const auto Z = phase_sensitivity(m, c, SensitivityMethod::adjoint);
  double worst = 0.0;
  for (std::size_t k = 0; k < Z.grid.size(); ++k) {
    const double th = Z.grid[k];
    Vec ref = std::string(name) == "radial"
                  ? v2(-std::sin(th), std::cos(th))
                  : v2(std::cos(th) - std::sin(th), std::cos(th) + std::sin(th));
    worst = std::max(worst, (Z.Z[k] - ref).cwiseAbs().maxCoeff());
  }
  return worst;
}

// λ of r' = r(1 − r²) at r = 1 from the offset u = r − 1, which obeys
// u' = −2u − 3u² − u³, followed for one period from a tiny start. The radial
// equation is shared by all built-in models.
double brute_force_floquet() {
  const Rhs rhs = [](double, const Vec& u, Vec& d) {
    d[0] = -u[0] * (2.0 + u[0] * (3.0 + u[0]));
  };
  OdeOptions o;
  o.tol = {1e-13, 1e-30};
  const double delta = 1e-9;
  const Vec u1 = advance(rhs, Vec::Constant(1, delta), 0.0, two_pi, o);
  return std::log(u1[0] / delta) / two_pi;
}

const std::vector<double> eps_grid{0.0025, 0.005, 0.01, 0.02, 0.03, 0.04,
                                   0.05,   0.06,  0.08, 0.1,  0.15, 0.2};

}  // namespace

int main() {
  criterion(1, "analytic gradient reproduction", 10.0, [] {
    const double er = sensitivity_error("radial");
    const double es = sensitivity_error("spiral");
    return Outcome{er <= 1e-4 && es <= 1e-4,
                   fmt("radial max err %.2e", er) + fmt(", spiral max err %.2e (limit 1e-4)", es)};
  });

  criterion(2, "spiral isochron identity", 30.0, [] {
    const auto m = make_model("spiral");
    const auto c = find_limit_cycle(m, v2(1.2, 0.0));
    double worst = 0.0;
    std::size_t n = 0;
    for (int i = 0; i < 10; ++i) {
      const double theta = two_pi * i / 10.0;
      const auto iso = compute_isochron(m, c, theta, {0.3, 2.0}, 50);
      for (const auto& p : iso.points) {
        worst = std::max(worst, circ(std::atan2(p[1], p[0]) + std::log(p.norm()), theta));
        ++n;
      }
    }
    return Outcome{n == 500 && worst <= 1e-4,
                   std::to_string(n) + " points" + fmt(", max |phi + log r - theta| %.2e (limit 1e-4)", worst)};
  });

  criterion(3, "averaged sinusoidal forcing of the radial model", 5.0, [] {
    // dψ/dt = 1 − Ω + ε Γ̄(ψ) must equal 1 − Ω − ε·½cos ψ
    const auto m = make_model("radial");
    const auto c = find_limit_cycle(m, v2(1.1, 0.0));
    const auto Z = phase_sensitivity(m, c, SensitivityMethod::adjoint);
    const auto q = average_periodic(Z, c, sinusoidal_forcing(2, 0, 0.05, 1.0), 1.0);
    double worst = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k)
      worst = std::max(worst, std::abs(q.values()[k] + 0.5 * std::cos(q.grid()[k])));
    return Outcome{worst <= 1e-6, fmt("max |Gamma - (-cos/2)| %.2e (limit 1e-6)", worst)};
  });

  criterion(4, "phase-locking condition for sinusoidal coupling", 1.0, [] {
    const auto q = CouplingFunction::from_function([](double p) { return -std::sin(p); });
    const double eps = 0.05;
    double worst = 0.0;
    bool ok = true;
    for (double ratio : {0.25, 0.5, 0.9}) {
      const double Omega = 1.0 - ratio * eps;
      const auto res = lock_analysis(1.0 - Omega, eps, q);
      int stable = 0;
      for (const auto& fp : res.fixed_points)
        if (fp.stable) {
          ++stable;
          worst = std::max(worst, circ(fp.psi, std::asin((1.0 - Omega) / eps)));
        }
      ok = ok && res.locked && stable == 1;
    }
    bool none = true;
    for (double ratio : {1.05, 1.5, -1.2}) none = none && !lock_analysis(ratio * eps, eps, q).locked;
    return Outcome{ok && none && worst <= 1e-8,
                   fmt("max |psi* - arcsin| %.2e (limit 1e-8)", worst) +
                       (none ? ", no lock beyond |1-Omega| > eps" : ", spurious lock beyond threshold")};
  });

  criterion(5, "first-order reduction error scaling", 120.0, [] {
    const auto m = make_model("radial");
    const auto c = find_limit_cycle(m, v2(1.1, 0.0));
    const auto Z = phase_sensitivity(m, c, SensitivityMethod::adjoint);
    std::vector<std::pair<double, double>> pts;
    std::string detail;
    for (double eps : {0.1, 0.05, 0.025}) {
      const auto r = forced_reduction_error(m, c, Z, sinusoidal_forcing(2, 0, eps, 1.0), 0.0, 1.0 / eps);
      pts.emplace_back(eps, r.max_error);
      detail += fmt("err(%.3g)=", eps) + fmt("%.3e ", r.max_error);
    }
    const auto fit = scaling_fit(pts);
    return Outcome{std::abs(fit.exponent - 1.0) <= 0.25,
                   detail + fmt("slope %.3f (want 1.0 +/- 0.25)", fit.exponent)};
  });

  criterion(6, "vanishing first-order coupling with prescribed sensitivity", 5.0, [] {
    NetworkSpec s;
    s.models = {stuart_landau(1.99), stuart_landau(2.01)};
    s.epsilon = 0.05;
    s.adjacency = {{{}, {1.0}}, {{1.0}, {}}};
    s.coupling = CouplingKind::direct;
    const auto iexp = [](double th) { return v2(std::sin(th), std::cos(th)); };
    s.prescribed_Z = {iexp, iexp};
    const auto pm = build_phase_model(s);
    const double q = pm.max_abs_q();
    return Outcome{q <= 1e-10, fmt("max |q| %.2e (limit 1e-10)", q) +
                                   fmt("; under the adjoint sensitivity max |q| = %.3f", pm.adjoint_max_q)};
  });

  double eps_c_002 = std::nan("");
  criterion(7, "synchronization threshold at detuning 0.02", 300.0, [&] {
    PairExperiment ex;
    const auto res = critical_coupling(ex, 0.02, eps_grid);
    eps_c_002 = res.epsilon_c;
    const bool ok = res.status == CriticalStatus::found && res.epsilon_c >= 0.035 && res.epsilon_c <= 0.065;
    return Outcome{ok, std::string(to_string(res.status)) + fmt(", eps_c %.4g (want [0.035, 0.065])", res.epsilon_c)};
  });

  criterion(8, "critical coupling scaling exponent", 1200.0, [&] {
    PairExperiment ex;
    std::vector<std::pair<double, double>> pts;
    std::string detail;
    for (double dw : {0.01, 0.02, 0.04, 0.08}) {
      double ec = eps_c_002;
      if (dw != 0.02 || std::isnan(ec)) {
        const auto res = critical_coupling(ex, dw, eps_grid);
        if (res.status != CriticalStatus::found)
          return Outcome{false, fmt("no threshold inside the grid for detuning %.3g", dw)};
        ec = res.epsilon_c;
      }
      pts.emplace_back(dw, ec);
      detail += fmt("eps_c(%.2g)=", dw) + fmt("%.4g ", ec);
    }
    const auto fit = scaling_fit(pts);
    return Outcome{std::abs(fit.exponent - 0.5) <= 0.1,
                   detail + fmt("exponent %.3f (want 0.5 +/- 0.1)", fit.exponent)};
  });

  criterion(9, "quasi-periodic coupling averages to its mean weight", 30.0, [] {
    const double a = 0.8;
    auto make = [&](double aa, double b, double c) {
      NetworkSpec s;
      s.models = {stuart_landau(2.0, 1.0), stuart_landau(2.0, 1.0)};
      s.epsilon = 0.05;
      const EdgeWeight w{aa, b, c};
      s.adjacency = {{{}, w}, {w, {}}};
      s.nu1 = std::sqrt(2.0);
      s.nu2 = 1.0;
      s.coupling = CouplingKind::diffusive;
      return build_phase_model(s);
    };
    const auto unit = make(1.0, 0.0, 0.0);
    double indep = 0.0, scale = 0.0;
    const auto base = make(a, 0.0, 0.0);
    for (auto [b, c] : {std::pair{0.5, 0.3}, std::pair{1.0, -0.7}, std::pair{0.2, 0.9}}) {
      const auto pm = make(a, b, c);
      for (int k = 0; k < 64; ++k) {
        const double phi = two_pi * k / 64.0;
        indep = std::max(indep, std::abs((*pm.Q[0][1])(phi) - (*base.Q[0][1])(phi)));
        scale = std::max(scale, std::abs((*pm.Q[0][1])(phi) - a * (*unit.Q[0][1])(phi)));
      }
    }
    return Outcome{indep <= 1e-6 && scale <= 1e-6,
                   fmt("max (b,c) dependence %.2e", indep) + fmt(", max |q - a q_const| %.2e (limit 1e-6)", scale)};
  });

  criterion(10, "property suite", 120.0, [] {
    std::string detail;
    bool ok = true;
    const Tolerance tight{1e-12, 1e-14};
    std::mt19937 rng(20240601);
    std::uniform_real_distribution<double> ur(0.2, 2.0), ua(0.0, two_pi);

    // flow group property
    double group = 0.0;
    for (const auto* name : {"radial", "spiral", "stuart_landau"}) {
      const auto m = std::string(name) == "stuart_landau" ? stuart_landau() : make_model(name);
      for (int k = 0; k < 5; ++k) {
        const Vec x = polar(ur(rng), ua(rng));
        group = std::max(group, (flow(m, flow(m, x, 0.9, tight), 1.6, tight) - flow(m, x, 2.5, tight)).norm());
      }
    }
    ok = ok && group <= 1e-8;
    detail += fmt("group %.1e", group);

    // foliation invariance and oracle agreement
    double fol = 0.0, oracle = 0.0, norm = 0.0, floq = 0.0;
    const double lambda_ref = brute_force_floquet();
    for (const auto* name : {"radial", "spiral", "stuart_landau"}) {
      const auto m = std::string(name) == "stuart_landau" ? stuart_landau() : make_model(name);
      const auto c = find_limit_cycle(m, v2(1.2, 0.1));
      floq = std::max(floq, std::abs(c.floquet - lambda_ref));
      const auto Z = phase_sensitivity(m, c, SensitivityMethod::adjoint);
      norm = std::max(norm, normalization_error(m, c, Z));
      if (std::string(name) == "spiral") {
        for (int k = 0; k < 50; ++k) {
          const Vec x = polar(ur(rng), ua(rng));
          const double t = 3.0 * ua(rng) / two_pi;
          const double a = asymptotic_phase(m, c, x);
          const double b = asymptotic_phase(m, c, flow(m, x, t, tight));
          fol = std::max(fol, circ(b, a + c.omega0 * t));
        }
      }
      for (int k = 0; k < 200 / 3 + 1; ++k) {
        const Vec x = polar(ur(rng), ua(rng));
        oracle = std::max(oracle, circ(asymptotic_phase(m, c, x), m.analytic_phase(x)));
      }
    }
    ok = ok && fol <= 1e-5 && norm <= 1e-8 && std::abs(lambda_ref + 2.0) <= 1e-4 && floq <= 1e-4 && oracle <= 1e-5;
    detail += fmt(", foliation %.1e", fol) + fmt(", Z.f - w0 %.1e", norm) +
              fmt(", oracle lambda %.6f", lambda_ref) + fmt(", |lambda - oracle| %.1e", floq) +
              fmt(", phase vs closed form %.1e", oracle);
    return Outcome{ok, detail};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
