#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "phasered/models.hpp"
#include "phasered/types.hpp"

namespace phasered {

/// Non-autonomous right-hand side, writing into `dxdt` (pre-sized).
using Rhs = std::function<void(double t, const Vec& x, Vec& dxdt)>;

struct OdeOptions {
  Tolerance tol = geometry_tolerance;
  double initial_step = 0.0;  // 0: automatic
  double max_step = 0.0;      // 0: unbounded
  std::size_t max_steps = 20'000'000;
  /// Checked after every accepted step; false aborts with left_region.
  std::function<bool(const Vec&)> admissible;
};

/// Continuous extension of one Dormand–Prince step (4th order).
struct DenseSegment {
  double t0 = 0.0;
  double h = 0.0;
  Vec y0, r1, r2, r3, r4;

  double t1() const { return t0 + h; }
  Vec operator()(double t) const;
};

/// Embedded Runge–Kutta 5(4) pair of Dormand and Prince with PI step-size
/// control. Integrates forward or backward depending on the sign of
/// t_end - t0.
class DormandPrince {
 public:
  DormandPrince(Rhs rhs, double t0, const Vec& x0, double t_end,
                OdeOptions options = {});

  bool done() const { return t_ == t_end_; }

  /// Advances by one accepted step, clipped to t_end.
  void step();

  double t() const { return t_; }
  const Vec& x() const { return x_; }
  double t_prev() const { return segment_.t0; }
  const Vec& x_prev() const { return segment_.y0; }
  double direction() const { return dir_; }
  const DenseSegment& segment() const { return segment_; }

  std::size_t accepted_steps() const { return accepted_; }
  std::size_t rejected_steps() const { return rejected_; }
  std::size_t evaluations() const { return evaluations_; }

 private:
  void eval(double t, const Vec& x, Vec& out);
  double initial_step();

  Rhs rhs_;
  OdeOptions opt_;
  double t_;
  double t_end_;
  double dir_;
  double h_ = 0.0;
  double facold_ = 1e-4;
  bool last_rejected_ = false;
  Vec x_;
  Vec k1_, k2_, k3_, k4_, k5_, k6_, k7_, y1_, tmp_;
  DenseSegment segment_;
  std::size_t accepted_ = 0;
  std::size_t rejected_ = 0;
  std::size_t evaluations_ = 0;
};

/// Discrete solution with dense output. Times are monotone in the direction
/// of integration (increasing for forward spans).
class Trajectory {
 public:
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<DenseSegment> segments;  // segments[k] spans times[k]..times[k+1]

  std::size_t size() const { return times.size(); }
  /// Interpolated state; exact at stored times. Throws outside the span.
  Vec at(double t) const;
};

Trajectory integrate(const Rhs& rhs, const Vec& x0, double t0, double t1,
                     const OdeOptions& options = {});

/// Flow of a model over t_span; rejects initial states outside the basin and
/// aborts if the solution leaves it.
Trajectory integrate(const OscillatorModel& model, const Vec& x0,
                     std::pair<double, double> t_span,
                     Tolerance tol = geometry_tolerance);

/// Endpoint of the solution without storing the path.
Vec advance(const Rhs& rhs, const Vec& x0, double t0, double t1,
            const OdeOptions& options = {});

/// φ(t, x0) for the model's autonomous field.
Vec flow(const OscillatorModel& model, const Vec& x0, double t,
         Tolerance tol = geometry_tolerance);

/// States at the requested times (monotone, starting at or after t0 in the
/// integration direction), read from the dense output.
std::vector<Vec> sample(const Rhs& rhs, const Vec& x0, double t0,
                        std::span<const double> times,
                        const OdeOptions& options = {});

Rhs autonomous_rhs(const OscillatorModel& model);

/// Level-set section {s(x) = 0} with a crossing direction (+1, -1, 0 = either).
struct Section {
  std::function<double(const Vec&)> level;
  int direction = +1;
  std::function<Vec(const Vec&)> gradient;  // empty: central differences

  /// s(x) = x[index] - value.
  static Section coordinate(int index, double value = 0.0, int direction = +1);

  double operator()(const Vec& x) const { return level(x); }
  Vec grad(const Vec& x) const;
};

/// The section every built-in model uses by default: second coordinate equal
/// to the centre's, crossed upward.
Section default_section(const OscillatorModel& model);

struct Crossing {
  double t = 0.0;
  Vec x;
};

inline constexpr double crossing_level_tolerance = 1e-10;

/// First crossing of the section at a time in (t0, t0 + t_max].
Crossing find_crossing(const Rhs& rhs, const Vec& x0, double t0,
                       const Section& section, double t_max,
                       const OdeOptions& options = {});

Crossing find_crossing(const OscillatorModel& model, const Vec& x0,
                       const Section& section, double t_max,
                       Tolerance tol = geometry_tolerance);

/// All crossings in (t0, t_end].
std::vector<Crossing> find_crossings(const Rhs& rhs, const Vec& x0, double t0,
                                     double t_end, const Section& section,
                                     const OdeOptions& options = {});

/// CSV with columns t, x1..xn.
void write_csv(const Trajectory& trajectory, std::ostream& os);

}  // namespace phasered
