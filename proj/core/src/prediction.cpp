#include "ssdeconv/prediction.hpp"

#include <algorithm>
#include <cmath>

#include "json_util.hpp"
#include "ssdeconv/error.hpp"

namespace ssdeconv {

namespace {

using detail::json;

double sup_norm(const double* v, int d) {
  double m = 0.0;
  for (int i = 0; i < d; ++i) m = std::max(m, std::abs(v[i]));
  return m;
}

// Jittered grid on [-1, 1]^d for each eta draw: k^d cells of width 2/k per
// axis, one uniform point per cell. Every point is marginally uniform on the
// cube; resolving the box per draw keeps the variance of the CDF estimates
// near the variance of their eta part.
int cells_per_axis(int d) { return d == 1 ? 8 : 3; }

RowMatrix jittered_cube(Seed seed, Eigen::Index draws, int d) {
  const int k = cells_per_axis(d);
  Eigen::Index cells = 1;
  for (int i = 0; i < d; ++i) cells *= k;
  Engine engine = make_engine(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  RowMatrix out(draws * cells, d);
  for (Eigen::Index j = 0; j < draws; ++j) {
    for (Eigen::Index c = 0; c < cells; ++c) {
      Eigen::Index rest = c;
      for (int i = 0; i < d; ++i) {
        const auto cell = static_cast<double>(rest % k);
        rest /= k;
        out(j * cells + c, i) = -1.0 + 2.0 * (cell + uniform(engine)) / k;
      }
    }
  }
  return out;
}

// (2x)^d * scale * mean over draws j and their cube points c of f(x * cube_jc + shift_j)
double box_average(const DensityFn& f, const RowMatrix& cube, const RowMatrix& shifts, double x, double scale) {
  if (!(x > 0.0)) return 0.0;
  const int d = static_cast<int>(cube.cols());
  const Eigen::Index draws = shifts.rows();
  const Eigen::Index cells = cube.rows() / draws;
  std::vector<double> point(static_cast<std::size_t>(d));
  double sum = 0.0;
  for (Eigen::Index j = 0; j < draws; ++j) {
    for (Eigen::Index c = 0; c < cells; ++c) {
      const Eigen::Index row = j * cells + c;
      for (int i = 0; i < d; ++i) point[i] = x * cube(row, i) + shifts(j, i);
      sum += f(point);
    }
  }
  return std::pow(2.0 * x, d) * scale * sum / static_cast<double>(cube.rows());
}

}  // namespace

std::string to_string(RootKind kind) {
  switch (kind) {
    case RootKind::Filter: return "filter";
    case RootKind::StatePredict: return "state";
    case RootKind::ObsPredict: return "observation";
  }
  return "unknown";
}

RootKind parse_root_kind(const std::string& s) {
  if (s == "filter") return RootKind::Filter;
  if (s == "state") return RootKind::StatePredict;
  if (s == "observation") return RootKind::ObsPredict;
  throw DataError("unknown interval kind '" + s + "'");
}

void MCBudget::validate() const {
  if (draws < 1) throw UsageError("Monte Carlo draws must be >= 1");
  if (!(tolerance > 0.0)) throw UsageError("bracket tolerance must be > 0");
  if (max_doublings < 0 || max_doublings > 60) throw UsageError("max_doublings must be in [0, 60]");
}

SearchResult search_quantile(const std::function<double(double)>& cdf, double level, const MCBudget& budget) {
  budget.validate();
  if (!(level > 0.0 && level < 1.0)) throw UsageError("level must lie in (0, 1)");
  SearchResult result;
  auto eval = [&](double x) {
    ++result.evaluations;
    return std::min(cdf(x), 1.0);
  };
  double lo = 0.0;
  double hi = 1.0;
  while (eval(hi) < level) {
    if (result.doublings == budget.max_doublings) {
      throw LevelUnreachable("level unreachable: CDF estimate stays below " + std::to_string(level) + " after " +
                             std::to_string(budget.max_doublings) + " doublings");
    }
    lo = hi;
    hi *= 2.0;
    ++result.doublings;
  }
  while (hi - lo > budget.tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (eval(mid) < level) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  result.x = 0.5 * (lo + hi);
  result.bracket_width = hi - lo;
  return result;
}

bool IntervalReport::contains(const Vector& value) const {
  if (value.size() != center.size()) throw UsageError("interval containment: dimension mismatch");
  return (value - center).lpNorm<Eigen::Infinity>() <= radius;
}

std::string IntervalReport::to_json() const {
  json j;
  j["kind"] = to_string(kind);
  j["center"] = detail::vector_to_json(center);
  j["radius"] = radius;
  j["level"] = level;
  j["evaluations"] = evaluations;
  j["bracket_width"] = bracket_width;
  return j.dump();
}

IntervalReport IntervalReport::from_json(const std::string& text) {
  const json j = detail::parse_json(text, "interval report");
  IntervalReport r;
  r.kind = parse_root_kind(j.at("kind").get<std::string>());
  const auto& c = j.at("center");
  r.center.resize(static_cast<Eigen::Index>(c.size()));
  for (std::size_t i = 0; i < c.size(); ++i) r.center(static_cast<Eigen::Index>(i)) = c[i].get<double>();
  r.radius = j.at("radius").get<double>();
  r.level = j.at("level").get<double>();
  r.evaluations = j.at("evaluations").get<int>();
  r.bracket_width = j.value("bracket_width", 0.0);
  return r;
}

PredictionDraws PredictionDraws::generate(const NoiseFamily& eta, const MCBudget& budget) {
  budget.validate();
  PredictionDraws draws;
  draws.eta1 = eta.sample(derive_seed(budget.seed, "eta1"), budget.draws);
  draws.eta2 = eta.sample(derive_seed(budget.seed, "eta2"), budget.draws);
  draws.cube = jittered_cube(derive_seed(budget.seed, "cube"), budget.draws, eta.dimension());
  return draws;
}

FilterRootCdf::FilterRootCdf(const Matrix& b, const PredictionDraws& draws) {
  const Matrix b_inv = checked_inverse(b, "B");
  const RowMatrix mapped = draws.eta1 * b_inv.transpose();
  const int d = static_cast<int>(mapped.cols());
  sorted_norms_.resize(static_cast<std::size_t>(mapped.rows()));
  for (Eigen::Index j = 0; j < mapped.rows(); ++j) sorted_norms_[j] = sup_norm(mapped.data() + j * d, d);
  std::sort(sorted_norms_.begin(), sorted_norms_.end());
}

double FilterRootCdf::operator()(double x) const {
  const auto it = std::upper_bound(sorted_norms_.begin(), sorted_norms_.end(), x);
  return static_cast<double>(it - sorted_norms_.begin()) / static_cast<double>(sorted_norms_.size());
}

StateRootCdf::StateRootCdf(DensityFn f_eps, const Matrix& a, const Matrix& b, const PredictionDraws& draws)
    : f_eps_(std::move(f_eps)) {
  const Matrix b_inv = checked_inverse(b, "B");
  shifts_ = draws.eta1 * (a * b_inv).transpose();
  cube_ = draws.cube;
}

double StateRootCdf::raw(double x) const { return box_average(f_eps_, cube_, shifts_, x, 1.0); }

ObsRootCdf::ObsRootCdf(DensityFn f_eps, const Matrix& a, const Matrix& b, const PredictionDraws& draws)
    : f_eps_(std::move(f_eps)) {
  const Matrix b_inv = checked_inverse(b, "B");
  inv_abs_det_ = 1.0 / std::abs(b.determinant());
  shifts_ = draws.eta1 * (a * b_inv).transpose() - draws.eta2 * b_inv.transpose();
  cube_ = draws.cube * b_inv.transpose();
}

double ObsRootCdf::raw(double x) const { return box_average(f_eps_, cube_, shifts_, x, inv_abs_det_); }

double op_H(double x, const Matrix& b, const NoiseFamily& eta, const MCBudget& budget) {
  return FilterRootCdf(b, PredictionDraws::generate(eta, budget))(x);
}

double op_N(double x, const DensityFn& f_eps, const Matrix& a, const Matrix& b, const NoiseFamily& eta,
            const MCBudget& budget) {
  return StateRootCdf(f_eps, a, b, PredictionDraws::generate(eta, budget)).raw(x);
}

double op_G(double x, const DensityFn& f_eps, const Matrix& a, const Matrix& b, const NoiseFamily& eta,
            const MCBudget& budget) {
  return ObsRootCdf(f_eps, a, b, PredictionDraws::generate(eta, budget)).raw(x);
}

std::array<IntervalReport, 3> predict_intervals(const ObservationSeries& y, const Matrix& b,
                                                const NoiseFamily& eta, const DensityFn& f_eps,
                                                const Matrix& a_hat, double level, const MCBudget& budget) {
  const int d = y.dimension();
  if (b.rows() != d || b.cols() != d || a_hat.rows() != d || a_hat.cols() != d)
    throw DataError("A_hat and B must be d x d");
  if (eta.dimension() != d) throw DataError("measurement noise dimension must equal d");
  if (!(level > 0.0 && level < 1.0)) throw UsageError("level must lie in (0, 1)");
  const Matrix b_inv = checked_inverse(b, "B");
  const Vector z_n = b_inv * y.last();

  const PredictionDraws draws = PredictionDraws::generate(eta, budget);
  const FilterRootCdf h_op(b, draws);
  const StateRootCdf n_op(f_eps, a_hat, b, draws);
  const ObsRootCdf g_op(f_eps, a_hat, b, draws);

  auto make = [&](RootKind kind, Vector center, const std::function<double(double)>& cdf) {
    const SearchResult s = search_quantile(cdf, level, budget);
    return IntervalReport{kind, std::move(center), s.x, level, s.evaluations, s.bracket_width};
  };
  return {make(RootKind::Filter, z_n, [&](double x) { return h_op(x); }),
          make(RootKind::StatePredict, a_hat * z_n, [&](double x) { return n_op(x); }),
          make(RootKind::ObsPredict, b * a_hat * z_n, [&](double x) { return g_op(x); })};
}

std::vector<double> simulate_root_norms(RootKind kind, const StateSpaceSpec& spec, Eigen::Index draws, Seed seed) {
  if (draws < 1) throw UsageError("oracle draws must be >= 1");
  const int d = spec.dimension();
  const Matrix b_inv = checked_inverse(spec.B, "B");
  const Matrix eta = spec.eta.sample(derive_seed(seed, "eta"), draws);
  RowMatrix roots;
  switch (kind) {
    case RootKind::Filter:
      roots = eta * b_inv.transpose();
      break;
    case RootKind::StatePredict: {
      const Matrix eps = spec.eps.sample(derive_seed(seed, "eps"), draws);
      roots = eps - eta * (spec.A * b_inv).transpose();
      break;
    }
    case RootKind::ObsPredict: {
      const Matrix eps = spec.eps.sample(derive_seed(seed, "eps"), draws);
      const Matrix eta_next = spec.eta.sample(derive_seed(seed, "eta_next"), draws);
      roots = eta_next + eps * spec.B.transpose() - eta * (spec.B * spec.A * b_inv).transpose();
      break;
    }
  }
  std::vector<double> norms(static_cast<std::size_t>(draws));
  for (Eigen::Index j = 0; j < draws; ++j) norms[j] = sup_norm(roots.data() + j * d, d);
  std::sort(norms.begin(), norms.end());
  return norms;
}

double root_cdf_oracle(RootKind kind, double x, const StateSpaceSpec& spec, Eigen::Index draws, Seed seed) {
  const auto norms = simulate_root_norms(kind, spec, draws, seed);
  const auto it = std::upper_bound(norms.begin(), norms.end(), x);
  return static_cast<double>(it - norms.begin()) / static_cast<double>(norms.size());
}

}  // namespace ssdeconv
