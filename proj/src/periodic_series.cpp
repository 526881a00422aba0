#include "phasered/periodic_series.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "phasered/errors.hpp"
#include "phasered/types.hpp"

namespace phasered {

std::vector<double> phase_grid(std::size_t m) {
  std::vector<double> g(m);
  for (std::size_t k = 0; k < m; ++k)
    g[k] = two_pi * static_cast<double>(k) / static_cast<double>(m);
  return g;
}

PeriodicSeries::PeriodicSeries(std::span<const double> samples) {
  const std::size_t m = samples.size();
  if (m == 0) throw InvalidArgument("periodic series needs samples");
  std::vector<double> cos_table(m), sin_table(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double angle = two_pi * static_cast<double>(j) / static_cast<double>(m);
    cos_table[j] = std::cos(angle);
    sin_table[j] = std::sin(angle);
  }
  double sum = 0.0;
  for (double v : samples) sum += v;
  a0_ = sum / static_cast<double>(m);

  const std::size_t kmax = m / 2;
  std::vector<double> a(kmax, 0.0), b(kmax, 0.0);
  for (std::size_t k = 1; k <= kmax; ++k) {
    double ak = 0.0, bk = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t idx = (k * j) % m;
      ak += samples[j] * cos_table[idx];
      bk += samples[j] * sin_table[idx];
    }
    // The Nyquist harmonic of an even grid carries half weight.
    const double w = (m % 2 == 0 && k == kmax) ? 1.0 : 2.0;
    a[k - 1] = w * ak / static_cast<double>(m);
    b[k - 1] = (m % 2 == 0 && k == kmax) ? 0.0 : w * bk / static_cast<double>(m);
  }
  double largest = std::abs(a0_);
  for (std::size_t k = 0; k < kmax; ++k)
    largest = std::max(largest, std::hypot(a[k], b[k]));
  std::size_t keep = kmax;
  while (keep > 0 && std::hypot(a[keep - 1], b[keep - 1]) <= 1e-15 * largest)
    --keep;
  a.resize(keep);
  b.resize(keep);
  a_ = std::move(a);
  b_ = std::move(b);
}

double PeriodicSeries::operator()(double theta) const {
  double value = a0_;
  const std::complex<double> step(std::cos(theta), std::sin(theta));
  std::complex<double> rot = step;
  for (std::size_t k = 0; k < a_.size(); ++k) {
    value += a_[k] * rot.real() + b_[k] * rot.imag();
    rot *= step;
    // Re-anchor the recurrence periodically to bound round-off growth.
    if ((k + 1) % 32 == 0) {
      const double angle = static_cast<double>(k + 2) * theta;
      rot = {std::cos(angle), std::sin(angle)};
    }
  }
  return value;
}

double PeriodicSeries::derivative(double theta) const {
  double value = 0.0;
  const std::complex<double> step(std::cos(theta), std::sin(theta));
  std::complex<double> rot = step;
  for (std::size_t k = 0; k < a_.size(); ++k) {
    const double kk = static_cast<double>(k + 1);
    value += kk * (-a_[k] * rot.imag() + b_[k] * rot.real());
    rot *= step;
    if ((k + 1) % 32 == 0) {
      const double angle = static_cast<double>(k + 2) * theta;
      rot = {std::cos(angle), std::sin(angle)};
    }
  }
  return value;
}

}  // namespace phasered
