#pragma once

#include <algorithm>
#include <complex>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ssdeconv/kernel.hpp"
#include "ssdeconv/linalg.hpp"
#include "ssdeconv/model.hpp"
#include "ssdeconv/noise.hpp"
#include "ssdeconv/rng.hpp"

namespace ssdeconv {

struct ExplicitBandwidth {
  double h = 1.0;
};
using BandwidthPolicy = std::variant<SmoothnessRegime, ExplicitBandwidth>;

/// Ordinary smooth: n^{-1/8}; super smooth: (ln n)^{-0.1}; explicit h passes
/// through. Throws DataError for n < 3 or h <= 0.
double default_bandwidth(Eigen::Index n, const BandwidthPolicy& policy);

/// A_hat = (sum_{k=3}^n Z_k Z_{k-2}^T) (sum_{k=3}^n Z_{k-1} Z_{k-2}^T)^+ with
/// Z_k = B^{-1} Y_k. The sums are not averaged. Throws SingularMatrix for
/// singular B.
Matrix estimate_A(const ObservationSeries& y, const Matrix& b);

/// Monte Carlo frequencies for the Fourier inversion integral: rows drawn
/// uniformly on [-a/h, a/h]^d.
struct FourierNodes {
  double h = 1.0;
  double a = 2.0;
  Seed seed = 0;
  bool antithetic = false;
  RowMatrix zeta;  // count x d

  Eigen::Index count() const noexcept { return zeta.rows(); }
  int dimension() const noexcept { return static_cast<int>(zeta.cols()); }
  double radius() const noexcept { return a / h; }
};

/// `count` uniform nodes (or `count` nodes plus their negations when
/// `antithetic`). Deterministic given `seed`.
FourierNodes build_fourier_nodes(double h, double a, Eigen::Index count, int d, Seed seed,
                                 bool antithetic = false);

enum class DensityTarget { State, StateNoise };

struct FitConfig {
  double h = 0.0;
  double a = 0.0;
  Eigen::Index nodes = 0;
  Seed seed = 0;
};

/// Deconvolution density estimate with cached per-node Fourier weights.
///
/// value(x) = max(0, Re[(a/(h pi))^d * mean_k w_k exp(-i zeta_k^T x)])
class DensityEstimate {
 public:
  DensityEstimate(DensityTarget target, std::shared_ptr<const FourierNodes> nodes,
                  std::vector<std::complex<double>> weights);

  double operator()(std::span<const double> x) const { return std::max(0.0, unclipped(x).real()); }
  double operator()(const Vector& x) const { return (*this)(std::span<const double>(x.data(), x.size())); }

  /// Complex mean before taking the real part and clipping.
  std::complex<double> unclipped(std::span<const double> x) const;

  /// amplitude * mean_k |w_k|; bounds every evaluation.
  double bound() const noexcept { return bound_; }
  double amplitude() const noexcept { return amplitude_; }
  DensityTarget target() const noexcept { return target_; }
  int dimension() const noexcept { return nodes_->dimension(); }
  const FourierNodes& nodes() const noexcept { return *nodes_; }
  const std::vector<std::complex<double>>& weights() const noexcept { return weights_; }
  FitConfig config() const;

 private:
  DensityTarget target_;
  std::shared_ptr<const FourierNodes> nodes_;
  std::vector<std::complex<double>> weights_;
  double amplitude_;
  double bound_;
};

inline double eval_density(const DensityEstimate& est, std::span<const double> x) { return est(x); }

/// Floors below which the estimators refuse to proceed.
inline constexpr double kCharacteristicFloor = 1e-12;
inline constexpr double kSingularAFloor = 1e-8;

/// State density estimate f_X_hat. Throws VanishingCharacteristic when
/// |phi_eta(B^{-T} zeta_k)| < 1e-12 at some node.
DensityEstimate fit_state_density(const ObservationSeries& y, const Matrix& b, const NoiseFamily& eta,
                                  const KernelSpec& kernel, std::shared_ptr<const FourierNodes> nodes);

/// State-noise density estimate f_eps_hat from the paired differences
/// B^{-1}Y_{j+1} - A_hat B^{-1}Y_j. Throws SingularMatrix when the smallest
/// singular value of A_hat is below 1e-8.
DensityEstimate fit_noise_density(const ObservationSeries& y, const Matrix& b, const Matrix& a_hat,
                                  const NoiseFamily& eta, const KernelSpec& kernel,
                                  std::shared_ptr<const FourierNodes> nodes);

/// Classical deconvolution weights for Y = X + eta:
/// FK_h(zeta_k) / phi_eta(zeta_k) * (1/n) sum_j exp(i zeta_k^T Y_j).
std::vector<std::complex<double>> classical_deconvolution_weights(const Matrix& y, const NoiseFamily& eta,
                                                                   const KernelSpec& kernel,
                                                                   const FourierNodes& nodes);

/// Writes "x1,..,xd,value" rows over the lattice spanned by `axes` into `out`.
void write_density_grid(std::ostream& out, const DensityEstimate& est, const std::vector<std::vector<double>>& axes,
                        const std::string& header_comment);

}  // namespace ssdeconv
