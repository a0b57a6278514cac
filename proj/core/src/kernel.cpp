#include "ssdeconv/kernel.hpp"

#include <cmath>
#include <numbers>

namespace ssdeconv {

double kernel_g(double x) {
  const double ax = std::abs(x);
  if (ax < 1e-4) {
    // (cos x - cos 2x)/x^2 = 3/2 - 5x^2/8 + O(x^4)
    return (1.5 - 0.625 * x * x) / std::numbers::pi;
  }
  return (std::cos(x) - std::cos(2.0 * x)) / (std::numbers::pi * x * x);
}

double kernel_fg(double t) {
  const double at = std::abs(t);
  if (at <= 1.0) return 1.0;
  if (at >= 2.0) return 0.0;
  return 2.0 - at;
}

KernelSpec KernelSpec::flat_top() {
  return KernelSpec{2.0, [](double t) { return kernel_fg(t); }, [](double x) { return kernel_g(x); }};
}

double KernelSpec::fourier_product(std::span<const double> y, double h) const {
  double p = 1.0;
  for (double v : y) {
    p *= fourier(h * v);
    if (p == 0.0) break;
  }
  return p;
}

}  // namespace ssdeconv
