#pragma once

#include <Eigen/Dense>

namespace ssdeconv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Moore-Penrose pseudo-inverse via SVD. Singular values below
/// max(rows, cols) * sigma_max * machine epsilon are treated as zero.
Matrix pseudo_inverse(const Matrix& m);

/// Largest singular value.
double spectral_norm(const Matrix& m);

/// Smallest singular value (0 for an empty matrix).
double min_singular_value(const Matrix& m);

/// Inverse of a square matrix; throws SingularMatrix when the smallest singular
/// value is below `tol * sigma_max`.
Matrix checked_inverse(const Matrix& m, const char* what, double tol = 1e-12);

/// Solves X = A X A^T + Q for X (discrete Lyapunov equation), used for the
/// stationary state covariance. Requires spectral radius of A < 1.
Matrix stationary_covariance(const Matrix& a, const Matrix& q);

}  // namespace ssdeconv
