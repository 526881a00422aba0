#include "phasered/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <boost/math/tools/roots.hpp>

#include "phasered/errors.hpp"
#include "phasered/table.hpp"

namespace phasered {

namespace {

// Dormand–Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0,
                 c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                 a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                 a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0,
                 a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0,
                 e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Shampine's dense output coefficients.
constexpr double d1 = -12715105075.0 / 11282082432.0,
                 d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0,
                 d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0,
                 d7 = 69997945.0 / 29380423.0;

constexpr double safety = 0.9;
constexpr double fac_min = 0.2;   // largest step decrease factor 1/5
constexpr double fac_max = 10.0;  // largest step increase factor
constexpr double beta = 0.04;
constexpr double expo1 = 0.2 - beta * 0.75;

}  // namespace

Vec DenseSegment::operator()(double t) const {
  const double s = (t - t0) / h;
  const double s1 = 1.0 - s;
  return y0 + s * (r1 + s1 * (r2 + s * (r3 + s1 * r4)));
}

DormandPrince::DormandPrince(Rhs rhs, double t0, const Vec& x0, double t_end,
                             OdeOptions options)
    : rhs_(std::move(rhs)),
      opt_(std::move(options)),
      t_(t0),
      t_end_(t_end),
      dir_(t_end >= t0 ? 1.0 : -1.0),
      x_(x0) {
  if (!std::isfinite(t0) || !std::isfinite(t_end))
    throw InvalidArgument("integration span must be finite");
  if (!(opt_.tol.rel > 0.0) || !(opt_.tol.abs > 0.0))
    throw InvalidArgument("integration tolerances must be positive");
  if (!x0.allFinite()) throw InvalidArgument("initial state is not finite");
  const auto n = x0.size();
  for (Vec* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &y1_, &tmp_})
    v->resize(n);
  segment_.t0 = t0;
  segment_.h = 0.0;
  segment_.y0 = x0;
  if (done()) return;
  eval(t_, x_, k1_);
  h_ = opt_.initial_step > 0.0 ? dir_ * opt_.initial_step : initial_step();
}

void DormandPrince::eval(double t, const Vec& x, Vec& out) {
  rhs_(t, x, out);
  ++evaluations_;
}

double DormandPrince::initial_step() {
  const double atol = opt_.tol.abs, rtol = opt_.tol.rel;
  const auto n = static_cast<double>(x_.size());
  const Vec sk = (atol + rtol * x_.array().abs()).matrix();
  const double dnf = (k1_.array() / sk.array()).square().sum() / n;
  const double dny = (x_.array() / sk.array()).square().sum() / n;
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
  const double hmax = opt_.max_step > 0.0 ? opt_.max_step
                                          : std::abs(t_end_ - t_);
  h = std::min(h, hmax);
  tmp_ = x_ + dir_ * h * k1_;
  eval(t_ + dir_ * h, tmp_, k2_);
  const double der2 =
      std::sqrt(((k2_ - k1_).array() / sk.array()).square().sum() / n) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3)
                                   : std::pow(0.01 / der12, 0.2);
  h = std::min({100.0 * h, h1, hmax});
  return dir_ * h;
}

void DormandPrince::step() {
  if (done()) return;
  const double atol = opt_.tol.abs, rtol = opt_.tol.rel;
  const double hmax = opt_.max_step > 0.0 ? opt_.max_step
                                          : std::numeric_limits<double>::infinity();
  const auto n = static_cast<double>(x_.size());

  while (true) {
    if (accepted_ + rejected_ >= opt_.max_steps)
      throw IntegrationError(IntegrationError::Kind::max_steps, t_,
                             "integration exceeded the step budget at t = " +
                                 format_double(t_));
    const double hmin = 1e-14 * std::max(1.0, std::abs(t_));
    if (std::abs(h_) < hmin && std::abs(t_end_ - t_) > hmin)
      throw IntegrationError(IntegrationError::Kind::step_underflow, t_,
                             "step size underflow at t = " + format_double(t_));
    if (std::abs(h_) > hmax) h_ = dir_ * hmax;
    bool last = false;
    if (dir_ * (t_ + h_ - t_end_) >= 0.0) {
      h_ = t_end_ - t_;
      last = true;
    }
    const double h = h_;

    tmp_ = x_ + h * a21 * k1_;
    eval(t_ + c2 * h, tmp_, k2_);
    tmp_ = x_ + h * (a31 * k1_ + a32 * k2_);
    eval(t_ + c3 * h, tmp_, k3_);
    tmp_ = x_ + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
    eval(t_ + c4 * h, tmp_, k4_);
    tmp_ = x_ + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
    eval(t_ + c5 * h, tmp_, k5_);
    tmp_ = x_ + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
    eval(t_ + h, tmp_, k6_);
    y1_ = x_ + h * (a71 * k1_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
    const double t_new = last ? t_end_ : t_ + h;
    eval(t_new, y1_, k7_);

    tmp_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
    double err = 0.0;
    if (!y1_.allFinite() || !k7_.allFinite()) {
      err = 1e10;
    } else {
      for (Eigen::Index i = 0; i < x_.size(); ++i) {
        const double sk =
            atol + rtol * std::max(std::abs(x_[i]), std::abs(y1_[i]));
        err += (tmp_[i] / sk) * (tmp_[i] / sk);
      }
      err = std::sqrt(err / n);
      if (!std::isfinite(err)) err = 1e10;
    }

    const double fac11 = std::pow(err, expo1);
    if (err <= 1.0) {
      double fac = fac11 / std::pow(facold_, beta);
      fac = std::clamp(fac / safety, 1.0 / fac_max, 1.0 / fac_min);
      double h_new = h / fac;
      facold_ = std::max(err, 1e-4);

      segment_.t0 = t_;
      segment_.h = t_new - t_;
      segment_.y0 = x_;
      segment_.r1 = y1_ - x_;
      segment_.r2 = h * k1_ - segment_.r1;
      segment_.r3 = segment_.r1 - h * k7_ - segment_.r2;
      segment_.r4 = h * (d1 * k1_ + d3 * k3_ + d4 * k4_ + d5 * k5_ +
                         d6 * k6_ + d7 * k7_);

      t_ = t_new;
      x_.swap(y1_);
      k1_.swap(k7_);
      ++accepted_;
      if (last_rejected_)
        h_new = dir_ * std::min(std::abs(h_new), std::abs(h));
      last_rejected_ = false;
      h_ = h_new;
      if (opt_.admissible && !opt_.admissible(x_))
        throw IntegrationError(IntegrationError::Kind::left_region, t_,
                               "solution left the admissible region at t = " +
                                   format_double(t_));
      return;
    }
    h_ = h / std::min(1.0 / fac_min, fac11 / safety);
    last_rejected_ = true;
    ++rejected_;
    if (err >= 1e10 && std::abs(h_) < 1e-14 * std::max(1.0, std::abs(t_)))
      throw IntegrationError(IntegrationError::Kind::non_finite, t_,
                             "solution became non-finite near t = " +
                                 format_double(t_));
  }
}

Vec Trajectory::at(double t) const {
  if (times.empty()) throw InvalidArgument("empty trajectory");
  const double first = times.front(), last = times.back();
  const bool forward = last >= first;
  const double lo = forward ? first : last, hi = forward ? last : first;
  if (t < lo || t > hi)
    throw InvalidArgument("time " + format_double(t) +
                          " outside the trajectory span");
  auto it = forward
                ? std::lower_bound(times.begin(), times.end(), t)
                : std::lower_bound(times.begin(), times.end(), t,
                                   [](double a, double b) { return a > b; });
  const auto k = static_cast<std::size_t>(it - times.begin());
  if (k < times.size() && times[k] == t) return states[k];
  return segments.at(k - 1)(t);
}

Trajectory integrate(const Rhs& rhs, const Vec& x0, double t0, double t1,
                     const OdeOptions& options) {
  DormandPrince stepper(rhs, t0, x0, t1, options);
  Trajectory traj;
  traj.times.push_back(t0);
  traj.states.push_back(x0);
  while (!stepper.done()) {
    stepper.step();
    traj.times.push_back(stepper.t());
    traj.states.push_back(stepper.x());
    traj.segments.push_back(stepper.segment());
  }
  return traj;
}

Rhs autonomous_rhs(const OscillatorModel& model) {
  return [&model](double, const Vec& x, Vec& dx) { dx = model.f(x); };
}

namespace {

OdeOptions model_options(const OscillatorModel& model, Tolerance tol) {
  OdeOptions opt;
  opt.tol = tol;
  opt.admissible = [&model](const Vec& x) { return model.in_basin(x); };
  return opt;
}

void require_basin(const OscillatorModel& model, const Vec& x0) {
  if (x0.size() != model.dim)
    throw InvalidArgument("state has dimension " + std::to_string(x0.size()) +
                          ", model " + model.name + " expects " +
                          std::to_string(model.dim));
  if (!model.in_basin(x0))
    throw InvalidArgument("initial state is outside the basin region of " +
                          model.name);
}

}  // namespace

Trajectory integrate(const OscillatorModel& model, const Vec& x0,
                     std::pair<double, double> t_span, Tolerance tol) {
  require_basin(model, x0);
  return integrate(autonomous_rhs(model), x0, t_span.first, t_span.second,
                   model_options(model, tol));
}

Vec advance(const Rhs& rhs, const Vec& x0, double t0, double t1,
            const OdeOptions& options) {
  DormandPrince stepper(rhs, t0, x0, t1, options);
  while (!stepper.done()) stepper.step();
  return stepper.x();
}

Vec flow(const OscillatorModel& model, const Vec& x0, double t, Tolerance tol) {
  require_basin(model, x0);
  return advance(autonomous_rhs(model), x0, 0.0, t, model_options(model, tol));
}

std::vector<Vec> sample(const Rhs& rhs, const Vec& x0, double t0,
                        std::span<const double> times,
                        const OdeOptions& options) {
  std::vector<Vec> out;
  out.reserve(times.size());
  if (times.empty()) return out;
  const double t_end = times.back();
  const double dir = t_end >= t0 ? 1.0 : -1.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (dir * (times[i] - t0) < 0.0 ||
        (i > 0 && dir * (times[i] - times[i - 1]) < 0.0))
      throw InvalidArgument("sample times must be monotone from t0");
  }
  DormandPrince stepper(rhs, t0, x0, t_end, options);
  std::size_t next = 0;
  while (next < times.size() && times[next] == t0) {
    out.push_back(x0);
    ++next;
  }
  while (next < times.size()) {
    stepper.step();
    while (next < times.size() && dir * (times[next] - stepper.t()) <= 0.0) {
      out.push_back(times[next] == stepper.t() ? stepper.x()
                                               : stepper.segment()(times[next]));
      ++next;
    }
  }
  return out;
}

Section Section::coordinate(int index, double value, int direction) {
  if (index < 0) throw InvalidArgument("section coordinate index must be >= 0");
  Section s;
  s.level = [index, value](const Vec& x) { return x[index] - value; };
  s.direction = direction;
  s.gradient = [index](const Vec& x) {
    Vec g = Vec::Zero(x.size());
    g[index] = 1.0;
    return g;
  };
  return s;
}

Vec Section::grad(const Vec& x) const {
  if (gradient) return gradient(x);
  Vec g(x.size());
  Vec xp = x, xm = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-7 * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    g[i] = (level(xp) - level(xm)) / (2.0 * h);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return g;
}

Section default_section(const OscillatorModel& model) {
  if (model.dim < 2)
    throw InvalidArgument("default section needs a state dimension >= 2");
  const double c = model.center.size() == model.dim ? model.center[1] : 0.0;
  return Section::coordinate(1, c, +1);
}

namespace {

bool crosses(double s_prev, double s_next, int direction) {
  const bool up = s_prev < 0.0 && s_next >= 0.0;
  const bool down = s_prev > 0.0 && s_next <= 0.0;
  if (direction > 0) return up;
  if (direction < 0) return down;
  return up || down;
}

Crossing refine_crossing(const Rhs& rhs, const DenseSegment& seg,
                         const Section& section, double s_prev,
                         double s_next) {
  auto level_at = [&](double t) { return section(seg(t)); };
  double a = seg.t0, b = seg.t1();
  double t_star;
  if (s_next == 0.0) {
    t_star = b;
  } else {
    double fa = s_prev, fb = s_next;
    if (a > b) {
      std::swap(a, b);
      std::swap(fa, fb);
    }
    boost::uintmax_t max_iter = 200;
    auto tol = [](double lo, double hi) {
      return std::abs(hi - lo) <=
             4.0 * std::numeric_limits<double>::epsilon() *
                 std::max(1.0, std::abs(lo));
    };
    auto r = boost::math::tools::toms748_solve(level_at, a, b, fa, fb, tol,
                                               max_iter);
    const double fr1 = std::abs(level_at(r.first));
    const double fr2 = std::abs(level_at(r.second));
    t_star = fr1 <= fr2 ? r.first : r.second;
  }
  Crossing c{t_star, seg(t_star)};
  if (std::abs(section(c.x)) > crossing_level_tolerance)
    throw CrossingError("crossing refinement missed the section level");
  Vec fx(c.x.size());
  rhs(c.t, c.x, fx);
  const Vec g = section.grad(c.x);
  if (std::abs(g.dot(fx)) <= 1e-10 * g.norm() * std::max(fx.norm(), 1e-300))
    throw CrossingError("tangential (non-transversal) section crossing at t = " +
                        format_double(c.t));
  return c;
}

// Scans accepted steps for sign changes of the section level. Stops at the
// first crossing if `first_only`.
std::vector<Crossing> scan_crossings(const Rhs& rhs, const Vec& x0, double t0,
                                     double t_end, const Section& section,
                                     const OdeOptions& options,
                                     bool first_only) {
  std::vector<Crossing> found;
  DormandPrince stepper(rhs, t0, x0, t_end, options);
  double s_prev = section(x0);
  // A start point on the section does not count as a crossing at t0.
  if (std::abs(s_prev) <= 1e-12 * (1.0 + x0.norm())) s_prev = 0.0;
  while (!stepper.done()) {
    stepper.step();
    const double s_next = section(stepper.x());
    if (crosses(s_prev, s_next, section.direction)) {
      found.push_back(
          refine_crossing(rhs, stepper.segment(), section, s_prev, s_next));
      if (first_only) return found;
    }
    s_prev = s_next;
  }
  return found;
}

}  // namespace

Crossing find_crossing(const Rhs& rhs, const Vec& x0, double t0,
                       const Section& section, double t_max,
                       const OdeOptions& options) {
  if (!(t_max > 0.0)) throw InvalidArgument("t_max must be positive");
  auto found = scan_crossings(rhs, x0, t0, t0 + t_max, section, options, true);
  if (found.empty())
    throw CrossingError("no section crossing within t_max = " +
                        format_double(t_max));
  return found.front();
}

Crossing find_crossing(const OscillatorModel& model, const Vec& x0,
                       const Section& section, double t_max, Tolerance tol) {
  require_basin(model, x0);
  return find_crossing(autonomous_rhs(model), x0, 0.0, section, t_max,
                       model_options(model, tol));
}

std::vector<Crossing> find_crossings(const Rhs& rhs, const Vec& x0, double t0,
                                     double t_end, const Section& section,
                                     const OdeOptions& options) {
  return scan_crossings(rhs, x0, t0, t_end, section, options, false);
}

void write_csv(const Trajectory& trajectory, std::ostream& os) {
  const auto n = trajectory.states.empty() ? 0 : trajectory.states[0].size();
  std::vector<std::string> cols{"t"};
  for (Eigen::Index i = 0; i < n; ++i) cols.push_back("x" + std::to_string(i + 1));
  Table table(std::move(cols));
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    std::vector<double> row{trajectory.times[k]};
    for (Eigen::Index i = 0; i < n; ++i) row.push_back(trajectory.states[k][i]);
    table.add_row(std::move(row));
  }
  table.write_csv(os);
}

}  // namespace phasered
