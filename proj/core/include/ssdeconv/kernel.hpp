#pragma once

#include <functional>
#include <span>

namespace ssdeconv {

/// Flat-top kernel:  G(x) = (cos x - cos 2x) / (pi x^2), whose Fourier transform
/// is the trapezoid equal to 1 on [-1, 1] and vanishing outside [-2, 2].
double kernel_g(double x);
double kernel_fg(double t);

/// One-dimensional kernel profile pair (G, FG) with FG supported in [-a, a].
struct KernelSpec {
  double support = 2.0;
  std::function<double(double)> fourier;
  std::function<double(double)> spatial;

  static KernelSpec flat_top();

  /// Product kernel transform FK_h(y) = prod_i FG(h y_i).
  double fourier_product(std::span<const double> y, double h) const;
};

}  // namespace ssdeconv

namespace ssdeconv {

inline double kernel_g(const KernelSpec& spec, double x) { return spec.spatial(x); }
inline double kernel_fg(const KernelSpec& spec, double t) { return spec.fourier(t); }

}  // namespace ssdeconv
