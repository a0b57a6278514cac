#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ssdeconv/estimation.hpp"
#include "ssdeconv/kalman.hpp"
#include "ssdeconv/model.hpp"
#include "ssdeconv/prediction.hpp"
#include "ssdeconv/tabulated.hpp"

namespace ssdeconv {

enum class BenchmarkId { O1, S1, O2, S2 };

/// The four benchmark models: O* use gamma-difference noises (ordinary smooth),
/// S* Gaussian noises (super smooth); *1 are scalar, *2 two-dimensional.
struct BenchmarkModel {
  BenchmarkId id;
  StateSpaceSpec spec;
  BandwidthPolicy policy;

  std::string name() const;
  bool state_density_known() const;  // f_X available in closed form

  static BenchmarkModel make(BenchmarkId id);
  /// "O1", "s2", ... Throws UsageError.
  static BenchmarkModel parse(const std::string& name);
};

std::string to_string(BenchmarkId id);

struct SimulatedSeries {
  ObservationSeries y;
  Matrix states;           // n x d, X_1..X_n
  Vector next_state;       // X_{n+1}
  Vector next_observation; // Y_{n+1}
};

/// Iterates the recursion from X = 0 for `burn_in` discarded steps, then
/// records n observations and one held-out future pair.
SimulatedSeries generate_series(const StateSpaceSpec& spec, Eigen::Index n, Seed seed, int burn_in = 1000);

/// sqrt(int_{[-1/h,1/h]^d} |f - g|^2) by uniform Monte Carlo on the cube.
double t2_norm_diff(const DensityFn& f, const DensityFn& g, double h, int d, Eigen::Index samples, Seed seed);

/// z(x) = E f_eps(x + A B^{-1} eta)  or  g(x) = E f_eps(B^{-1}x + A B^{-1}w - B^{-1}z),
/// w, z i.i.d. eta, by Monte Carlo over a fixed draw set.
class ConvolvedDensity {
 public:
  enum class Kind { StatePredictive, ObsPredictive };

  ConvolvedDensity(Kind kind, DensityFn f_eps, const Matrix& a, const Matrix& b, const NoiseFamily& eta,
                   Eigen::Index draws, Seed seed);
  double operator()(std::span<const double> x) const;

 private:
  Kind kind_;
  DensityFn f_eps_;
  Matrix b_inv_;
  RowMatrix shifts_;
};

double conv_state_pred_density(const DensityFn& f_eps, const Matrix& a, const Matrix& b, const NoiseFamily& eta,
                               std::span<const double> x, Eigen::Index draws, Seed seed);
double conv_obs_pred_density(const DensityFn& f_eps, const Matrix& a, const Matrix& b, const NoiseFamily& eta,
                             std::span<const double> x, Eigen::Index draws, Seed seed);

struct ExperimentConfig {
  BenchmarkId model = BenchmarkId::S1;
  Eigen::Index n = 500;
  int replicates = 100;
  Seed master_seed = 1;
  Eigen::Index nodes = 10000;        // Fourier nodes per fit
  Eigen::Index mc_draws = 100000;    // R per CDF evaluation
  double tolerance = 1e-3;
  int max_doublings = 60;
  double level = 0.95;
  Eigen::Index t2_samples = 50000;
  Eigen::Index conv_draws = 20000;   // draws for z_hat / g_hat
  Eigen::Index truth_draws = 1000000;
  Seed truth_seed = 271828;          // fixed stream for Monte Carlo truth curves
  int burn_in = 1000;
  std::optional<double> bandwidth;   // overrides the model's policy
  KalmanInit kalman_init = KalmanInit::Stationary;
  int threads = 0;                   // 0: hardware concurrency, capped by SSDECONV_THREADS
  std::string cache_dir;             // truth-curve cache; empty disables
  double grid_lo = -4.0;
  double grid_hi = 4.0;
  int grid_points = 161;

  void validate() const;
  double bandwidth_for(const BenchmarkModel& model) const;
  std::string to_json() const;
  /// FNV-1a of to_json(), hex.
  std::string hash() const;
};

struct QuantityStats {
  std::string quantity;
  double mean = 0.0;
  double q90 = 0.0;
  std::vector<double> values;  // per replicate, replicate order
};

struct MethodStats {
  std::string method;
  std::array<double, 3> coverage{};     // F, PX, PY
  std::array<double, 3> mean_length{};  // F, PX, PY
  std::array<std::vector<char>, 3> hits;
  std::array<std::vector<double>, 3> lengths;
};

struct MetricReport {
  ExperimentConfig config;
  std::string table;  // "table1" or "table2"
  double bandwidth = 0.0;
  std::vector<QuantityStats> errors;
  std::vector<MethodStats> methods;

  const QuantityStats* quantity(const std::string& name) const;
  const MethodStats* method(const std::string& name) const;

  std::string to_csv() const;
  std::string to_json() const;
};

/// Estimation errors per replicate: ||A_hat - A||_2 and T2 errors of f_X_hat
/// (when f_X is known), f_eps_hat, z_hat and g_hat.
MetricReport run_table1(const ExperimentConfig& config);

/// Coverage and mean length of the Algorithm-1 boxes and the Kalman ellipsoids.
MetricReport run_table2(const ExperimentConfig& config);

enum class BandTarget { StateNoise, StatePredictive, ObsPredictive };
std::string to_string(BandTarget target);

struct BandTable {
  ExperimentConfig config;
  BandTarget target = BandTarget::StateNoise;
  std::vector<double> grid, truth, mean, q05, q50, q95;

  std::string to_csv() const;
};

/// Pointwise mean and 5/50/95% quantiles of an estimate across replicates, d = 1 only.
BandTable figure1_bands(const ExperimentConfig& config, BandTarget target, std::vector<double> grid);

/// Reference curves for a model: the true f_eps, z, g (closed form for
/// Gaussian models, cached Monte Carlo otherwise) and f_X when known.
DensityFn truth_density(const BenchmarkModel& model, BandTarget target, const ExperimentConfig& config);
std::optional<DensityFn> truth_state_density(const BenchmarkModel& model);

/// Linear-interpolated type-7 quantile of unsorted values.
double sample_quantile(std::vector<double> values, double p);

/// Runs fn(0..count-1) on up to `threads` workers (0: auto, capped by SSDECONV_THREADS).
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);
int effective_threads(int requested);

}  // namespace ssdeconv
