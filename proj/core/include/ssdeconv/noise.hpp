#pragma once

#include <complex>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ssdeconv/linalg.hpp"
#include "ssdeconv/rng.hpp"

namespace ssdeconv {

namespace detail {
class VarianceGammaTable;
}

/// Zero-mean noise law on R^d: density, characteristic function and sampler.
///
/// Three variants ship:
///   * GaussianIID         independent N(0, sigma_i^2) coordinates
///   * GammaDifferenceIID  coordinates G1 - G2 with G1, G2 ~ Gamma(k_i, theta_i)
///   * LinearMap           C * base for a nonsingular mixing matrix C
///
/// Instances are immutable and cheap to copy (shared internal tables).
class NoiseFamily {
 public:
  struct GaussianIID {
    std::vector<double> sigma;
  };
  struct GammaDifferenceIID {
    std::vector<double> shape;
    std::vector<double> scale;
    std::vector<std::shared_ptr<const detail::VarianceGammaTable>> tables;
  };
  struct LinearMap {
    Matrix mixing;
    Matrix inverse;
    double abs_det = 1.0;
    std::shared_ptr<const NoiseFamily> base;
  };

  static NoiseFamily gaussian_iid(std::vector<double> sigma);
  static NoiseFamily gaussian_iid(int d, double sigma);
  static NoiseFamily gamma_difference_iid(std::vector<double> shape, std::vector<double> scale);
  static NoiseFamily gamma_difference_iid(int d, double shape, double scale);
  /// Throws SingularMatrix when `mixing` is singular.
  static NoiseFamily linear_map(Matrix mixing, NoiseFamily base);
  /// N(0, cov) as a LinearMap over standard normals (Cholesky factor).
  static NoiseFamily gaussian(const Matrix& cov);

  int dimension() const noexcept { return dim_; }

  /// f(x). Throws DensityUnbounded at a singular point of the density.
  double density(std::span<const double> x) const;
  double density(const Vector& x) const { return density(std::span<const double>(x.data(), x.size())); }

  /// E exp(i t^T tau).
  std::complex<double> characteristic(std::span<const double> t) const;
  std::complex<double> characteristic(const Vector& t) const {
    return characteristic(std::span<const double>(t.data(), t.size()));
  }

  /// m x d matrix of i.i.d. draws, deterministic given `seed`.
  Matrix sample(Seed seed, Eigen::Index m) const;
  /// Fills the rows of `out` (m x d) using `engine`.
  void sample_into(Engine& engine, Matrix& out) const;

  Matrix covariance() const;
  bool is_gaussian() const;

  const auto& variant() const noexcept { return rep_; }

  /// JSON document, e.g. {"type":"gaussian","sigma":[1.0]}.
  std::string to_json() const;
  static NoiseFamily from_json(const std::string& text);

 private:
  using Rep = std::variant<GaussianIID, GammaDifferenceIID, LinearMap>;
  NoiseFamily(int dim, Rep rep) : dim_(dim), rep_(std::move(rep)) {}

  int dim_ = 0;
  Rep rep_;
};

// Free-function spellings used throughout the estimators and tests.
inline double noise_density(const NoiseFamily& f, std::span<const double> x) { return f.density(x); }
inline std::complex<double> noise_char(const NoiseFamily& f, std::span<const double> t) {
  return f.characteristic(t);
}
inline Matrix noise_sample(const NoiseFamily& f, Seed seed, Eigen::Index m) { return f.sample(seed, m); }

/// Density of G1 - G2, G1, G2 i.i.d. Gamma(shape, scale), evaluated directly via
/// the modified Bessel function K. Throws DensityUnbounded at x = 0 when
/// shape <= 1/2.
double gamma_difference_density(double x, double shape, double scale);

namespace detail {

/// Interpolation table for the 1-d gamma-difference density: 4096 nodes over
/// +-12 standard deviations, linear interpolation. Points near a singular
/// origin and outside the table fall back to the direct formula.
class VarianceGammaTable {
 public:
  VarianceGammaTable(double shape, double scale);
  double operator()(double x) const;
  double shape() const noexcept { return shape_; }
  double scale() const noexcept { return scale_; }

  static constexpr int kNodes = 4096;
  static constexpr double kHalfWidthSd = 12.0;

 private:
  double shape_;
  double scale_;
  double lo_;
  double step_;
  std::vector<double> values_;
};

}  // namespace detail

}  // namespace ssdeconv
