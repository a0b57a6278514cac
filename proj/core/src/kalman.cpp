#include "ssdeconv/kalman.hpp"

#include <algorithm>
#include <cmath>

#include "json_util.hpp"
#include "ssdeconv/chi2.hpp"
#include "ssdeconv/error.hpp"

namespace ssdeconv {

using detail::json;

std::string to_string(KalmanInit init) { return init == KalmanInit::ZeroStart ? "zero" : "stationary"; }

Matrix riccati_step(const Matrix& omega, const Matrix& a, const Matrix& b, const Matrix& sigma, const Matrix& pi) {
  const Matrix s = b * omega * b.transpose() + pi;
  const Matrix gain = a * omega * b.transpose() * s.inverse();
  Matrix next = a * omega * a.transpose() + sigma - gain * b * omega * a.transpose();
  return 0.5 * (next + next.transpose());
}

KalmanPrediction kalman_one_step(const StateSpaceSpec& spec, const ObservationSeries& y, KalmanInit init) {
  const Eigen::Index d = spec.dimension();
  if (y.dimension() != d) throw DataError("series dimension does not match the model");
  const Matrix& a = spec.A;
  const Matrix& b = spec.B;
  const Matrix sigma = spec.eps.covariance();
  const Matrix pi = spec.eta.covariance();

  KalmanPrediction p{Vector::Zero(d),
                     init == KalmanInit::ZeroStart ? Matrix::Zero(d, d) : stationary_covariance(a, sigma)};
  for (Eigen::Index k = 0; k + 1 < y.length(); ++k) {
    const Matrix s = b * p.omega * b.transpose() + pi;
    const Matrix gain = a * p.omega * b.transpose() * s.inverse();
    const Vector innovation = y.row(k) - b * p.state;
    p.state = a * p.state + gain * innovation;
    Matrix next = a * p.omega * a.transpose() + sigma - gain * b * p.omega * a.transpose();
    p.omega = 0.5 * (next + next.transpose());
  }
  return p;
}

bool EllipsoidReport::contains(const Vector& value) const {
  const Vector r = value - center;
  return r.dot(covariance.ldlt().solve(r)) <= threshold;
}

std::vector<double> EllipsoidReport::axis_lengths() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(covariance);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    out.push_back(2.0 * std::sqrt(threshold * std::max(0.0, es.eigenvalues()(i))));
  return out;
}

double EllipsoidReport::mean_length() const {
  const auto axes = axis_lengths();
  double s = 0.0;
  for (double v : axes) s += v;
  return s / static_cast<double>(axes.size());
}

std::string EllipsoidReport::to_json() const {
  json j;
  j["kind"] = to_string(kind);
  j["center"] = detail::vector_to_json(center);
  j["covariance"] = detail::matrix_to_json(covariance);
  j["threshold"] = threshold;
  j["level"] = level;
  j["axis_lengths"] = axis_lengths();
  return j.dump();
}

std::array<EllipsoidReport, 3> kalman_intervals(const StateSpaceSpec& spec, const ObservationSeries& y,
                                                double level, KalmanInit init) {
  if (!(level > 0.0 && level < 1.0)) throw UsageError("level must lie in (0, 1)");
  const KalmanPrediction p = kalman_one_step(spec, y, init);
  const Eigen::Index d = spec.dimension();
  if (min_singular_value(p.omega) <= 1e-14 * std::max(1.0, spectral_norm(p.omega)))
    throw SingularMatrix("Kalman error covariance Omega_n is singular");
  const Matrix& a = spec.A;
  const Matrix& b = spec.B;
  const Matrix sigma = spec.eps.covariance();
  const Matrix pi = spec.eta.covariance();
  const double c = chi2_quantile(static_cast<int>(d), level);
  const Matrix state_cov = a * p.omega * a.transpose() + sigma;
  const Matrix obs_cov = pi + b * sigma * b.transpose() + b * a * p.omega * a.transpose() * b.transpose();
  return {EllipsoidReport{RootKind::Filter, p.state, p.omega, c, level},
          EllipsoidReport{RootKind::StatePredict, a * p.state, state_cov, c, level},
          EllipsoidReport{RootKind::ObsPredict, b * a * p.state, obs_cov, c, level}};
}

}  // namespace ssdeconv
