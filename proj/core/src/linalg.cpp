#include "ssdeconv/linalg.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "ssdeconv/error.hpp"

namespace ssdeconv {

Matrix pseudo_inverse(const Matrix& m) {
  if (m.size() == 0) return Matrix(m.cols(), m.rows());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double tol = static_cast<double>(std::max(m.rows(), m.cols())) * s(0) *
                     std::numeric_limits<double>::epsilon();
  Vector s_inv = Vector::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol) s_inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * s_inv.asDiagonal() * svd.matrixU().transpose();
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double min_singular_value(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  return s(s.size() - 1);
}

Matrix checked_inverse(const Matrix& m, const char* what, double tol) {
  if (m.rows() != m.cols()) {
    throw DataError(std::string(what) + " must be square");
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  if (s(0) == 0.0 || s(s.size() - 1) < tol * s(0)) {
    throw SingularMatrix(std::string(what) + " is singular");
  }
  return svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
}

Matrix stationary_covariance(const Matrix& a, const Matrix& q) {
  // vec(X) = (I - A (x) A)^{-1} vec(Q); d is tiny so the Kronecker form is fine.
  const Eigen::Index d = a.rows();
  Matrix kron(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) kron.block(i * d, j * d, d, d) = a(i, j) * a;
  const Matrix lhs = Matrix::Identity(d * d, d * d) - kron;
  const Eigen::Map<const Vector> vq(q.data(), d * d);
  Vector vx = lhs.fullPivLu().solve(vq);
  Matrix x = Eigen::Map<Matrix>(vx.data(), d, d);
  return 0.5 * (x + x.transpose());
}

}  // namespace ssdeconv
