#pragma once

#include <span>
#include <vector>

namespace phasered {

/// Trigonometric interpolant of samples on the uniform grid 2πk/M of [0, 2π).
///
/// Harmonics whose amplitude falls below 1e-15 of the largest one are
/// dropped, so band-limited data (e.g. sin ψ) evaluates in O(1).
class PeriodicSeries {
 public:
  PeriodicSeries() = default;
  explicit PeriodicSeries(std::span<const double> samples);

  double operator()(double theta) const;
  double derivative(double theta) const;

  double mean() const { return a0_; }
  std::size_t harmonics() const { return a_.size(); }

 private:
  double a0_ = 0.0;
  std::vector<double> a_, b_;  // cos / sin coefficients of harmonics 1..K
};

/// Uniform grid 2πk/M, k = 0..M-1.
std::vector<double> phase_grid(std::size_t m);

}  // namespace phasered
