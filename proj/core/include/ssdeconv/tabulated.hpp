#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ssdeconv/estimation.hpp"

namespace ssdeconv {

/// Type-erased real function on R^d (densities, truth curves, estimates).
using DensityFn = std::function<double(std::span<const double>)>;

/// Uniform axis-aligned lattice on [lo, lo + (count-1) step] per dimension.
struct Lattice {
  std::vector<double> lo;
  std::vector<double> step;
  std::vector<int> count;

  int dimension() const noexcept { return static_cast<int>(lo.size()); }
  std::size_t size() const;
  double coordinate(int dim, int i) const { return lo[dim] + step[dim] * i; }

  /// Same range [-half_width, half_width] and spacing on every axis; the
  /// spacing is shrunk so the end points land on the lattice.
  static Lattice cube(int d, double half_width, double max_step);
  static Lattice box(std::vector<double> lo, std::vector<double> hi, std::vector<int> count);
};

/// Tensor cubic (4-point Lagrange) interpolant of a function sampled on a
/// lattice, for d = 1 or 2. Queries outside the interpolation region go to
/// `fallback` (exact evaluation). When `clip` is set results are max(0, .).
class TabulatedFunction {
 public:
  TabulatedFunction(Lattice lattice, std::vector<double> values, DensityFn fallback, bool clip);

  double operator()(std::span<const double> x) const;
  double operator()(const Vector& x) const { return (*this)(std::span<const double>(x.data(), x.size())); }

  const Lattice& lattice() const noexcept { return lattice_; }
  const std::vector<double>& values() const noexcept { return values_; }
  int dimension() const noexcept { return lattice_.dimension(); }

  /// Tabulates Re of the unclipped estimate on [-half_width, half_width]^d;
  /// the spacing is pi / (points_per_half_period * a/h), i.e. a fixed number of
  /// points per period of the fastest Fourier mode. Clipping happens after
  /// interpolation so positive-part semantics match the exact estimate.
  /// Only d = 1, 2 are supported (throws UsageError otherwise).
  static TabulatedFunction from_estimate(const DensityEstimate& est, double half_width,
                                         int points_per_half_period = 16);

  /// Samples `fn` on `lattice`.
  static TabulatedFunction from_function(const DensityFn& fn, Lattice lattice, bool clip);

  DensityFn as_function() const;

 private:
  Lattice lattice_;
  std::vector<double> values_;  // row-major, last axis fastest
  DensityFn fallback_;
  bool clip_;
};

/// Wraps a DensityEstimate as a DensityFn, routing through a lattice
/// interpolant when d <= 2 (16 points per half period for d = 1, 6 for d = 2)
/// or exact evaluation otherwise.
DensityFn fast_density(const DensityEstimate& est, double half_width);

}  // namespace ssdeconv
