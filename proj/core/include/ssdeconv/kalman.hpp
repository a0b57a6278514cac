#pragma once

#include <array>
#include <string>
#include <vector>

#include "ssdeconv/model.hpp"
#include "ssdeconv/prediction.hpp"

namespace ssdeconv {

/// Initial one-step error covariance: zero (series started at X_1 = 0) or the
/// stationary state covariance.
enum class KalmanInit { ZeroStart, Stationary };

std::string to_string(KalmanInit init);

struct KalmanPrediction {
  Vector state;    // X_hat_n, predictor of X_n from Y_1..Y_{n-1}
  Matrix omega;    // E (X_n - X_hat_n)(X_n - X_hat_n)^T
};

/// Runs the one-step predictor recursion over Y_1..Y_{n-1}.
KalmanPrediction kalman_one_step(const StateSpaceSpec& spec, const ObservationSeries& y, KalmanInit init);

/// One Riccati step: Omega' = A Omega A^T + Sigma - A Omega B^T (B Omega B^T + Pi)^{-1} B Omega A^T.
Matrix riccati_step(const Matrix& omega, const Matrix& a, const Matrix& b, const Matrix& sigma,
                    const Matrix& pi);

/// Chi-square ellipsoid (z - center)^T cov^{-1} (z - center) <= threshold.
struct EllipsoidReport {
  RootKind kind = RootKind::Filter;
  Vector center;
  Matrix covariance;
  double threshold = 0.0;
  double level = 0.95;

  bool contains(const Vector& value) const;
  /// 2 sqrt(threshold * lambda_i), ascending.
  std::vector<double> axis_lengths() const;
  double mean_length() const;
  std::string to_json() const;
};

/// Gaussian-theory boxes for X_n, X_{n+1}, Y_{n+1} with all model parameters
/// known. Throws SingularMatrix when Omega_n is singular.
std::array<EllipsoidReport, 3> kalman_intervals(const StateSpaceSpec& spec, const ObservationSeries& y,
                                                double level, KalmanInit init = KalmanInit::Stationary);

}  // namespace ssdeconv
