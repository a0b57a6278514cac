#pragma once

#include <array>
#include <functional>
#include <string>

#include "ssdeconv/linalg.hpp"
#include "ssdeconv/model.hpp"
#include "ssdeconv/noise.hpp"
#include "ssdeconv/rng.hpp"
#include "ssdeconv/tabulated.hpp"

namespace ssdeconv {

/// Predictive roots: X_n - B^{-1}Y_n, X_{n+1} - A B^{-1}Y_n, Y_{n+1} - B A B^{-1}Y_n.
enum class RootKind { Filter, StatePredict, ObsPredict };

std::string to_string(RootKind kind);
RootKind parse_root_kind(const std::string& s);

/// Monte Carlo budget for one CDF evaluation and the quantile search around it.
struct MCBudget {
  Eigen::Index draws = 100000;
  double tolerance = 1e-3;
  int max_doublings = 60;
  Seed seed = 0;

  void validate() const;
};

struct SearchResult {
  double x = 0.0;
  int evaluations = 0;
  int doublings = 0;
  double bracket_width = 0.0;
};

/// Doubling from [0, 1] until M(hi) >= level (at most budget.max_doublings
/// times), then bisection until hi - lo <= budget.tolerance. Returns the
/// bracket midpoint. Throws LevelUnreachable when M stays below `level`.
SearchResult search_quantile(const std::function<double(double)>& cdf, double level, const MCBudget& budget);

/// Sup-norm prediction box ||Z - center||_inf <= radius.
struct IntervalReport {
  RootKind kind = RootKind::Filter;
  Vector center;
  double radius = 0.0;
  double level = 0.95;
  int evaluations = 0;
  double bracket_width = 0.0;

  bool contains(const Vector& value) const;
  double length() const noexcept { return 2.0 * radius; }
  /// {"kind":..,"center":[..],"radius":..,"level":..,"evaluations":..}
  std::string to_json() const;
  static IntervalReport from_json(const std::string& text);
};

/// Draws shared by every CDF evaluation in one prediction run (common random
/// numbers): two independent eta samples and, per eta draw, a jittered grid of
/// k^d uniform points on [-1, 1]^d (k = 8 for d = 1, 3 otherwise). The kappa
/// of the integration box are x * u; cube rows j*k^d .. (j+1)*k^d - 1 belong to
/// eta draw j.
struct PredictionDraws {
  RowMatrix eta1;
  RowMatrix eta2;
  RowMatrix cube;

  static PredictionDraws generate(const NoiseFamily& eta, const MCBudget& budget);
};

/// Operation H: fraction of draws with ||B^{-1} eta_j||_inf <= x.
/// Exactly nondecreasing in x.
class FilterRootCdf {
 public:
  FilterRootCdf(const Matrix& b, const PredictionDraws& draws);
  double operator()(double x) const;

 private:
  std::vector<double> sorted_norms_;
};

/// Operation N: (2x)^d * mean_{j,c} f_eps(x u_jc + A B^{-1} eta_j).
class StateRootCdf {
 public:
  StateRootCdf(DensityFn f_eps, const Matrix& a, const Matrix& b, const PredictionDraws& draws);
  /// Unclipped estimate (may exceed 1 for an approximate density).
  double raw(double x) const;
  double operator()(double x) const { return std::min(raw(x), 1.0); }

 private:
  DensityFn f_eps_;
  RowMatrix shifts_;
  RowMatrix cube_;
};

/// Operation G: (2x)^d / |det B| * mean_{j,c} f_eps(B^{-1}x u_jc + A B^{-1}eta1_j - B^{-1}eta2_j).
class ObsRootCdf {
 public:
  ObsRootCdf(DensityFn f_eps, const Matrix& a, const Matrix& b, const PredictionDraws& draws);
  double raw(double x) const;
  double operator()(double x) const { return std::min(raw(x), 1.0); }

 private:
  DensityFn f_eps_;
  double inv_abs_det_;
  RowMatrix shifts_;
  RowMatrix cube_;  // rows already mapped through B^{-1}
};

// One-shot spellings; each regenerates the draws from budget.seed, so
// repeated calls with one budget share the same random numbers.
double op_H(double x, const Matrix& b, const NoiseFamily& eta, const MCBudget& budget);
double op_N(double x, const DensityFn& f_eps, const Matrix& a, const Matrix& b, const NoiseFamily& eta,
            const MCBudget& budget);
double op_G(double x, const DensityFn& f_eps, const Matrix& a, const Matrix& b, const NoiseFamily& eta,
            const MCBudget& budget);

/// Filter, state and observation prediction boxes for the last time point of
/// `y`, centered at B^{-1}Y_n, A B^{-1}Y_n and B A B^{-1}Y_n.
std::array<IntervalReport, 3> predict_intervals(const ObservationSeries& y, const Matrix& b,
                                                const NoiseFamily& eta, const DensityFn& f_eps,
                                                const Matrix& a_hat, double level, const MCBudget& budget);

/// P(||root||_inf <= x) by direct simulation of the root under the true model.
double root_cdf_oracle(RootKind kind, double x, const StateSpaceSpec& spec, Eigen::Index draws, Seed seed);

/// Simulated sup-norms of the root, sorted ascending (reusable oracle draws).
std::vector<double> simulate_root_norms(RootKind kind, const StateSpaceSpec& spec, Eigen::Index draws, Seed seed);

}  // namespace ssdeconv
