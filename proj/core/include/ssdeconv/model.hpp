#pragma once

#include <string>
#include <variant>

#include "ssdeconv/linalg.hpp"
#include "ssdeconv/noise.hpp"

namespace ssdeconv {

/// X_{n+1} = A X_n + eps_{n+1},  Y_n = B X_n + eta_n.
struct StateSpaceSpec {
  Matrix A;
  Matrix B;
  NoiseFamily eps;
  NoiseFamily eta;

  int dimension() const noexcept { return static_cast<int>(A.rows()); }

  /// Checks shapes, nonsingular A and B, ||A||_2 < 1 and a nonsingular state
  /// noise covariance. Throws DataError / SingularMatrix.
  void validate() const;

  /// {"d":..,"A":[[..]],"B":[[..]],"eps":{..},"eta":{..}}
  std::string to_json() const;
  static StateSpaceSpec from_json(const std::string& text);
};

/// n x d observations Y_1..Y_n, one row per time step.
class ObservationSeries {
 public:
  static constexpr Eigen::Index kMinLength = 3;

  /// Throws DataError unless n >= 3 and d >= 1 and every entry is finite.
  explicit ObservationSeries(Matrix values);

  Eigen::Index length() const noexcept { return values_.rows(); }
  int dimension() const noexcept { return static_cast<int>(values_.cols()); }
  const Matrix& values() const noexcept { return values_; }
  Vector row(Eigen::Index i) const { return values_.row(i).transpose(); }
  Vector last() const { return row(length() - 1); }

 private:
  Matrix values_;
};

/// Declared smoothness class of the measurement noise; parameters are
/// properties of the (unknown) truth and are taken as configuration.
struct OrdinarySmooth {
  double beta = 1.0;
  double b = 1.0;
  double c = 1.0;
};
struct SuperSmooth {
  double beta = 2.0;
  double gamma = 0.5;
  double b = 2.0;
  double r = 1.0;
  double c = 1.0;
};
using SmoothnessRegime = std::variant<OrdinarySmooth, SuperSmooth>;

/// Throws DataError if any parameter is not strictly positive.
void validate_regime(const SmoothnessRegime& regime);
std::string regime_name(const SmoothnessRegime& regime);

}  // namespace ssdeconv
