#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <span>

namespace ssdeconv::test {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
inline double normal_pdf(double x, double var = 1.0) {
  return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

/// Composite Simpson rule with `m` (even) panels.
inline double simpson(const std::function<double(double)>& f, double lo, double hi, int m) {
  const double step = (hi - lo) / m;
  double s = f(lo) + f(hi);
  for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * step);
  return s * step / 3.0;
}

inline double at(const std::function<double(std::span<const double>)>& f, double x) {
  return f(std::span<const double>(&x, 1));
}

}  // namespace ssdeconv::test
