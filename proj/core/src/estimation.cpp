#include "ssdeconv/estimation.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "ssdeconv/error.hpp"
#include "ssdeconv/series_io.hpp"

namespace ssdeconv {

namespace {

// Rows B^{-1} Y_j.
RowMatrix whitened_rows(const ObservationSeries& y, const Matrix& b_inv) {
  return y.values() * b_inv.transpose();
}

// (1/m) sum_j exp(i zeta^T rows_j).
std::complex<double> empirical_char(const RowMatrix& rows, const double* zeta, int d) {
  double re = 0.0;
  double im = 0.0;
  const Eigen::Index m = rows.rows();
  if (d == 1) {
    const double z = zeta[0];
    const double* p = rows.data();
    for (Eigen::Index j = 0; j < m; ++j) {
      const double phase = z * p[j];
      re += std::cos(phase);
      im += std::sin(phase);
    }
  } else {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double* r = rows.data() + j * d;
      double phase = 0.0;
      for (int i = 0; i < d; ++i) phase += zeta[i] * r[i];
      re += std::cos(phase);
      im += std::sin(phase);
    }
  }
  return {re / static_cast<double>(m), im / static_cast<double>(m)};
}

std::complex<double> checked_char(const NoiseFamily& eta, const Vector& t) {
  const std::complex<double> phi = eta.characteristic(t);
  if (!(std::abs(phi) >= kCharacteristicFloor)) {
    throw VanishingCharacteristic(
        "characteristic function vanishes on integration cube (|phi_eta| < 1e-12); "
        "check the noise family and bandwidth");
  }
  return phi;
}

void check_inputs(const ObservationSeries& y, const Matrix& b, const NoiseFamily& eta, const FourierNodes& nodes) {
  const int d = y.dimension();
  if (b.rows() != d || b.cols() != d) throw DataError("B must be d x d");
  if (eta.dimension() != d) throw DataError("measurement noise dimension must equal d");
  if (nodes.dimension() != d) throw DataError("Fourier node dimension must equal d");
}

}  // namespace

double default_bandwidth(Eigen::Index n, const BandwidthPolicy& policy) {
  if (n < 3) throw DataError("bandwidth requires n >= 3");
  if (const auto* e = std::get_if<ExplicitBandwidth>(&policy)) {
    if (!(e->h > 0.0)) throw DataError("bandwidth must be positive");
    return e->h;
  }
  const auto& regime = std::get<SmoothnessRegime>(policy);
  validate_regime(regime);
  const double nn = static_cast<double>(n);
  if (std::holds_alternative<OrdinarySmooth>(regime)) return std::pow(nn, -1.0 / 8.0);
  return std::pow(std::log(nn), -0.1);
}

Matrix estimate_A(const ObservationSeries& y, const Matrix& b) {
  const int d = y.dimension();
  if (b.rows() != d || b.cols() != d) throw DataError("B must be d x d");
  const Matrix b_inv = checked_inverse(b, "B");
  const Matrix z = y.values() * b_inv.transpose();
  const Eigen::Index n = z.rows();
  // rows 2..n-1 pair with 0..n-3 (lag 2) and 1..n-2 (lag 1)
  const Matrix lag2 = z.bottomRows(n - 2).transpose() * z.topRows(n - 2);
  const Matrix lag1 = z.middleRows(1, n - 2).transpose() * z.topRows(n - 2);
  return lag2 * pseudo_inverse(lag1);
}

FourierNodes build_fourier_nodes(double h, double a, Eigen::Index count, int d, Seed seed, bool antithetic) {
  if (count < 1) throw UsageError("node count must be >= 1");
  if (!(h > 0.0) || !(a > 1.0)) throw UsageError("nodes need h > 0 and a > 1");
  if (d < 1) throw UsageError("node dimension must be >= 1");
  FourierNodes nodes;
  nodes.h = h;
  nodes.a = a;
  nodes.seed = seed;
  nodes.antithetic = antithetic;
  const double r = a / h;
  nodes.zeta.resize(antithetic ? 2 * count : count, d);
  Engine engine = make_engine(seed);
  std::uniform_real_distribution<double> uniform(-r, r);
  for (Eigen::Index k = 0; k < count; ++k)
    for (int i = 0; i < d; ++i) nodes.zeta(k, i) = uniform(engine);
  if (antithetic) nodes.zeta.bottomRows(count) = -nodes.zeta.topRows(count);
  return nodes;
}

DensityEstimate::DensityEstimate(DensityTarget target, std::shared_ptr<const FourierNodes> nodes,
                                 std::vector<std::complex<double>> weights)
    : target_(target), nodes_(std::move(nodes)), weights_(std::move(weights)) {
  if (!nodes_ || static_cast<Eigen::Index>(weights_.size()) != nodes_->count())
    throw UsageError("one weight per Fourier node is required");
  amplitude_ = std::pow(nodes_->a / (nodes_->h * std::numbers::pi), nodes_->dimension());
  double mean_abs = 0.0;
  for (const auto& w : weights_) mean_abs += std::abs(w);
  bound_ = amplitude_ * mean_abs / static_cast<double>(weights_.size());
}

std::complex<double> DensityEstimate::unclipped(std::span<const double> x) const {
  const int d = nodes_->dimension();
  if (static_cast<int>(x.size()) != d) throw UsageError("density evaluation: dimension mismatch");
  const Eigen::Index r = nodes_->count();
  const double* zeta = nodes_->zeta.data();
  double re = 0.0;
  double im = 0.0;
  for (Eigen::Index k = 0; k < r; ++k) {
    double phase = 0.0;
    for (int i = 0; i < d; ++i) phase += zeta[k * d + i] * x[i];
    const double c = std::cos(phase);
    const double s = std::sin(phase);
    const auto& w = weights_[static_cast<std::size_t>(k)];
    // w * exp(-i phase)
    re += w.real() * c + w.imag() * s;
    im += w.imag() * c - w.real() * s;
  }
  const double scale = amplitude_ / static_cast<double>(r);
  return {re * scale, im * scale};
}

FitConfig DensityEstimate::config() const {
  return FitConfig{nodes_->h, nodes_->a, nodes_->count(), nodes_->seed};
}

DensityEstimate fit_state_density(const ObservationSeries& y, const Matrix& b, const NoiseFamily& eta,
                                  const KernelSpec& kernel, std::shared_ptr<const FourierNodes> nodes) {
  if (!nodes) throw UsageError("fit_state_density: missing Fourier nodes");
  check_inputs(y, b, eta, *nodes);
  const int d = y.dimension();
  const Matrix b_inv = checked_inverse(b, "B");
  const Matrix b_inv_t = b_inv.transpose();
  const RowMatrix z = whitened_rows(y, b_inv);
  std::vector<std::complex<double>> weights(static_cast<std::size_t>(nodes->count()));
  Vector zeta(d);
  for (Eigen::Index k = 0; k < nodes->count(); ++k) {
    zeta = nodes->zeta.row(k).transpose();
    const std::complex<double> phi = checked_char(eta, b_inv_t * zeta);
    const double fk = kernel.fourier_product(std::span<const double>(zeta.data(), d), nodes->h);
    weights[static_cast<std::size_t>(k)] =
        fk == 0.0 ? std::complex<double>{} : fk / phi * empirical_char(z, zeta.data(), d);
  }
  return DensityEstimate(DensityTarget::State, std::move(nodes), std::move(weights));
}

DensityEstimate fit_noise_density(const ObservationSeries& y, const Matrix& b, const Matrix& a_hat,
                                  const NoiseFamily& eta, const KernelSpec& kernel,
                                  std::shared_ptr<const FourierNodes> nodes) {
  if (!nodes) throw UsageError("fit_noise_density: missing Fourier nodes");
  check_inputs(y, b, eta, *nodes);
  const int d = y.dimension();
  if (a_hat.rows() != d || a_hat.cols() != d) throw DataError("A_hat must be d x d");
  if (!(min_singular_value(a_hat) >= kSingularAFloor))
    throw SingularMatrix("A_hat is near singular (smallest singular value < 1e-8)");
  const Matrix b_inv = checked_inverse(b, "B");
  const Matrix b_inv_t = b_inv.transpose();
  const Matrix lagged_t = -b_inv_t * a_hat.transpose();
  const RowMatrix z = whitened_rows(y, b_inv);
  const Eigen::Index n = z.rows();
  // B^{-1}Y_{j+1} - A_hat B^{-1}Y_j, j = 1..n-1
  const RowMatrix diffs = z.bottomRows(n - 1) - z.topRows(n - 1) * a_hat.transpose();
  std::vector<std::complex<double>> weights(static_cast<std::size_t>(nodes->count()));
  Vector zeta(d);
  for (Eigen::Index k = 0; k < nodes->count(); ++k) {
    zeta = nodes->zeta.row(k).transpose();
    const std::complex<double> phi1 = checked_char(eta, b_inv_t * zeta);
    const std::complex<double> phi2 = checked_char(eta, lagged_t * zeta);
    const double fk = kernel.fourier_product(std::span<const double>(zeta.data(), d), nodes->h);
    weights[static_cast<std::size_t>(k)] =
        fk == 0.0 ? std::complex<double>{} : fk / (phi1 * phi2) * empirical_char(diffs, zeta.data(), d);
  }
  return DensityEstimate(DensityTarget::StateNoise, std::move(nodes), std::move(weights));
}

std::vector<std::complex<double>> classical_deconvolution_weights(const Matrix& y, const NoiseFamily& eta,
                                                                   const KernelSpec& kernel,
                                                                   const FourierNodes& nodes) {
  const int d = static_cast<int>(y.cols());
  const RowMatrix rows = y;
  std::vector<std::complex<double>> weights(static_cast<std::size_t>(nodes.count()));
  Vector zeta(d);
  for (Eigen::Index k = 0; k < nodes.count(); ++k) {
    zeta = nodes.zeta.row(k).transpose();
    const std::complex<double> phi = checked_char(eta, zeta);
    const double fk = kernel.fourier_product(std::span<const double>(zeta.data(), d), nodes.h);
    weights[static_cast<std::size_t>(k)] = fk / phi * empirical_char(rows, zeta.data(), d);
  }
  return weights;
}

void write_density_grid(std::ostream& out, const DensityEstimate& est, const std::vector<std::vector<double>>& axes,
                        const std::string& header_comment) {
  const int d = est.dimension();
  if (static_cast<int>(axes.size()) != d) throw UsageError("density grid: one axis per dimension required");
  for (const auto& axis : axes)
    if (axis.empty()) throw UsageError("density grid: empty axis");
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  for (int i = 0; i < d; ++i) out << 'x' << (i + 1) << ',';
  out << "value\n";
  std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
  std::vector<double> x(static_cast<std::size_t>(d));
  while (true) {
    for (int i = 0; i < d; ++i) x[i] = axes[i][idx[i]];
    for (int i = 0; i < d; ++i) out << format_double(x[i]) << ',';
    out << format_double(est(x)) << '\n';
    int dim = d - 1;
    while (dim >= 0 && ++idx[dim] == axes[dim].size()) {
      idx[dim] = 0;
      --dim;
    }
    if (dim < 0) break;
  }
}

}  // namespace ssdeconv
