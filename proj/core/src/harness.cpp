#include "ssdeconv/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "ssdeconv/error.hpp"
#include "ssdeconv/series_io.hpp"

namespace ssdeconv {

namespace {

constexpr double kKernelSupport = 2.0;

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

[[noreturn]] void rethrow_with_replicate(int replicate, const Error& e) {
  const std::string msg = "replicate " + std::to_string(replicate) + ": " + e.what();
  switch (e.kind()) {
    case ErrorKind::Usage: throw UsageError(msg);
    case ErrorKind::Data: throw DataError(msg);
    case ErrorKind::Numeric: throw NumericError(msg);
  }
  throw NumericError(msg);
}

// Interpolation density per half period of the fastest Fourier mode.
int tabulation_density(int d) { return d == 1 ? 16 : 6; }

// Covers x u + A B^{-1} eta for the x range the quantile search visits.
double tabulation_half_width(const ObservationSeries& y, const Matrix& b) {
  const Matrix z = y.values() * checked_inverse(b, "B").transpose();
  double sd = 0.0;
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const double mean = z.col(j).mean();
    sd = std::max(sd, std::sqrt((z.col(j).array() - mean).square().mean()));
  }
  return std::max(6.0, 6.0 * sd + 2.0);
}

struct FittedNoise {
  Matrix a_hat;
  double h = 0.0;
  std::shared_ptr<const FourierNodes> nodes;
  DensityFn f_eps;  // lattice-accelerated f_eps_hat
};

FittedNoise fit_noise(const BenchmarkModel& model, const ExperimentConfig& config, const SimulatedSeries& sim,
                      Seed rep_seed) {
  const auto& spec = model.spec;
  FittedNoise out;
  out.a_hat = estimate_A(sim.y, spec.B);
  out.h = config.bandwidth_for(model);
  out.nodes = std::make_shared<const FourierNodes>(build_fourier_nodes(
      out.h, kKernelSupport, config.nodes, spec.dimension(), derive_seed(rep_seed, "nodes")));
  const auto est = fit_noise_density(sim.y, spec.B, out.a_hat, spec.eta, KernelSpec::flat_top(), out.nodes);
  out.f_eps = TabulatedFunction::from_estimate(est, tabulation_half_width(sim.y, spec.B),
                                               tabulation_density(spec.dimension()))
                  .as_function();
  return out;
}

// Convolved estimate sampled on a lattice slightly larger than the T2 cube.
DensityFn convolved_on_cube(ConvolvedDensity::Kind kind, const DensityFn& f_eps, const Matrix& a,
                            const BenchmarkModel& model, const ExperimentConfig& config, double h, Seed seed) {
  const int d = model.spec.dimension();
  const ConvolvedDensity conv(kind, f_eps, a, model.spec.B, model.spec.eta, config.conv_draws, seed);
  DensityFn fn = [conv](std::span<const double> x) { return conv(x); };
  const int per_axis = d == 1 ? 128 : 40;
  const double step = 2.0 / h / per_axis;
  return TabulatedFunction::from_function(fn, Lattice::cube(d, 1.0 / h + 3.0 * step, step), true).as_function();
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

QuantityStats summarize(std::string name, std::vector<double> values) {
  QuantityStats q;
  q.quantity = std::move(name);
  q.mean = mean_of(values);
  q.q90 = sample_quantile(values, 0.9);
  q.values = std::move(values);
  return q;
}

// In-process cache of Monte Carlo truth curves, keyed by model/target/draws/seed.
std::mutex g_truth_mutex;
std::map<std::string, std::shared_ptr<const TabulatedFunction>> g_truth_cache;

std::shared_ptr<const TabulatedFunction> load_truth_file(const std::filesystem::path& path, Lattice lattice,
                                                         const DensityFn& fallback) {
  std::ifstream in(path);
  if (!in) return nullptr;
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line == "value") continue;
    values.push_back(std::strtod(line.c_str(), nullptr));
  }
  if (values.size() != lattice.size()) return nullptr;
  return std::make_shared<const TabulatedFunction>(std::move(lattice), std::move(values), fallback, true);
}

DensityFn monte_carlo_truth(const BenchmarkModel& model, BandTarget target, const ExperimentConfig& config) {
  const auto& spec = model.spec;
  const int d = spec.dimension();
  const auto kind = target == BandTarget::StatePredictive ? ConvolvedDensity::Kind::StatePredictive
                                                          : ConvolvedDensity::Kind::ObsPredictive;
  const Seed seed = derive_seed(config.truth_seed, to_string(model.id) + "/" + to_string(target));
  std::ostringstream key;
  key << "truth_" << to_string(model.id) << '_' << to_string(target) << '_' << config.truth_draws << '_' << seed;

  std::lock_guard<std::mutex> lock(g_truth_mutex);
  if (auto it = g_truth_cache.find(key.str()); it != g_truth_cache.end()) {
    auto tab = it->second;
    return [tab](std::span<const double> x) { return (*tab)(x); };
  }
  const NoiseFamily eps = spec.eps;
  auto conv = std::make_shared<const ConvolvedDensity>(
      kind, [eps](std::span<const double> x) { return eps.density(x); }, spec.A, spec.B, spec.eta,
      config.truth_draws, seed);
  DensityFn exact = [conv](std::span<const double> x) { return (*conv)(x); };
  Lattice lattice = d == 1 ? Lattice::cube(1, 8.0, 0.02) : Lattice::cube(2, 5.0, 0.25);

  std::shared_ptr<const TabulatedFunction> tab;
  std::filesystem::path file;
  if (!config.cache_dir.empty()) {
    file = std::filesystem::path(config.cache_dir) / (key.str() + ".csv");
    tab = load_truth_file(file, lattice, exact);
  }
  if (!tab) {
    tab = std::make_shared<const TabulatedFunction>(TabulatedFunction::from_function(exact, lattice, true));
    if (!file.empty()) {
      std::ostringstream out;
      out << "# model=" << to_string(model.id) << " target=" << to_string(target)
          << " draws=" << config.truth_draws << " seed=" << seed << '\n'
          << "value\n";
      for (double v : tab->values()) out << format_double(v) << '\n';
      write_file_atomic(file, out.str());
    }
  }
  g_truth_cache.emplace(key.str(), tab);
  return [tab](std::span<const double> x) { return (*tab)(x); };
}

DensityFn gaussian_density_fn(const Matrix& cov, const Matrix& pre) {
  const NoiseFamily law = NoiseFamily::gaussian(cov);
  return [law, pre](std::span<const double> x) {
    const Vector v = pre * Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
    return law.density(v);
  };
}

}  // namespace

// ---------------------------------------------------------------- models

std::string to_string(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::O1: return "O1";
    case BenchmarkId::S1: return "S1";
    case BenchmarkId::O2: return "O2";
    case BenchmarkId::S2: return "S2";
  }
  return "?";
}

std::string BenchmarkModel::name() const { return to_string(id); }

bool BenchmarkModel::state_density_known() const { return spec.eps.is_gaussian(); }

BenchmarkModel BenchmarkModel::make(BenchmarkId id) {
  const double gamma_scale = 1.0 / std::sqrt(3.0);
  const Matrix a1 = mat({{0.8}});
  const Matrix b1 = mat({{1.0}});
  const Matrix a2 = mat({{0.56, -0.25}, {0.25, 0.45}});
  const Matrix b2 = mat({{1.00, -0.50}, {0.50, 1.00}});
  const Matrix eps_mix = mat({{0.979, 0.204}, {0.204, 0.979}});
  const Matrix eta_mix = mat({{0.900, 0.000}, {0.000, 0.900}});
  const auto build = [id](StateSpaceSpec spec, SmoothnessRegime regime) {
    spec.validate();
    return BenchmarkModel{id, std::move(spec), BandwidthPolicy{regime}};
  };
  switch (id) {
    case BenchmarkId::O1:
      return build({a1, b1, NoiseFamily::gamma_difference_iid(1, 1.5, gamma_scale),
                    NoiseFamily::gamma_difference_iid(1, 0.5, 1.0)},
                   OrdinarySmooth{});
    case BenchmarkId::S1:
      return build({a1, b1, NoiseFamily::gaussian_iid(1, 1.0), NoiseFamily::gaussian_iid(1, 1.0)}, SuperSmooth{});
    case BenchmarkId::O2:
      return build({a2, b2, NoiseFamily::linear_map(eps_mix, NoiseFamily::gamma_difference_iid(2, 1.5, gamma_scale)),
                    NoiseFamily::linear_map(eta_mix, NoiseFamily::gamma_difference_iid(2, 0.5, 1.0))},
                   OrdinarySmooth{});
    case BenchmarkId::S2:
      break;
  }
  return build({a2, b2, NoiseFamily::linear_map(eps_mix, NoiseFamily::gaussian_iid(2, 1.0)),
                NoiseFamily::linear_map(eta_mix, NoiseFamily::gaussian_iid(2, 1.0))},
               SuperSmooth{});
}

BenchmarkModel BenchmarkModel::parse(const std::string& name) {
  std::string up = name;
  for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "O1") return make(BenchmarkId::O1);
  if (up == "S1") return make(BenchmarkId::S1);
  if (up == "O2") return make(BenchmarkId::O2);
  if (up == "S2") return make(BenchmarkId::S2);
  throw UsageError("unknown benchmark model '" + name + "' (expected O1, S1, O2 or S2)");
}

// ---------------------------------------------------------------- series

SimulatedSeries generate_series(const StateSpaceSpec& spec, Eigen::Index n, Seed seed, int burn_in) {
  if (n < ObservationSeries::kMinLength) throw DataError("generate_series requires n >= 3");
  if (burn_in < 0) throw UsageError("burn_in must be >= 0");
  const Eigen::Index d = spec.dimension();
  const Eigen::Index steps = burn_in + n + 1;
  const Matrix eps = spec.eps.sample(derive_seed(seed, "eps"), steps);
  const Matrix eta = spec.eta.sample(derive_seed(seed, "eta"), n + 1);

  // burn_in == 0 starts the record at X_1 = 0.
  Vector x = Vector::Zero(d);
  Eigen::Index e = 0;
  for (int k = 0; k < burn_in; ++k) x = spec.A * x + eps.row(e++).transpose();
  Matrix states(n, d);
  Matrix obs(n, d);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k > 0 || burn_in > 0) x = spec.A * x + eps.row(e++).transpose();
    states.row(k) = x.transpose();
    obs.row(k) = (spec.B * x + eta.row(k).transpose()).transpose();
  }
  const Vector next_state = spec.A * x + eps.row(e).transpose();
  const Vector next_obs = spec.B * next_state + eta.row(n).transpose();
  return SimulatedSeries{ObservationSeries(std::move(obs)), std::move(states), next_state, next_obs};
}

// ---------------------------------------------------------------- metrics

double t2_norm_diff(const DensityFn& f, const DensityFn& g, double h, int d, Eigen::Index samples, Seed seed) {
  if (!(h > 0.0)) throw UsageError("T2 norm requires h > 0");
  if (samples < 1 || d < 1) throw UsageError("T2 norm requires samples >= 1 and d >= 1");
  Engine engine = make_engine(seed);
  std::uniform_real_distribution<double> uniform(-1.0 / h, 1.0 / h);
  std::vector<double> x(static_cast<std::size_t>(d));
  double sum = 0.0;
  for (Eigen::Index s = 0; s < samples; ++s) {
    for (auto& v : x) v = uniform(engine);
    const double diff = f(x) - g(x);
    sum += diff * diff;
  }
  const double volume = std::pow(2.0 / h, d);
  return std::sqrt(volume * sum / static_cast<double>(samples));
}

ConvolvedDensity::ConvolvedDensity(Kind kind, DensityFn f_eps, const Matrix& a, const Matrix& b,
                                   const NoiseFamily& eta, Eigen::Index draws, Seed seed)
    : kind_(kind), f_eps_(std::move(f_eps)) {
  if (draws < 1) throw UsageError("convolution draws must be >= 1");
  b_inv_ = checked_inverse(b, "B");
  const Matrix ab = a * b_inv_;
  const Matrix w = eta.sample(derive_seed(seed, "w"), draws);
  if (kind == Kind::StatePredictive) {
    shifts_ = w * ab.transpose();
  } else {
    const Matrix z = eta.sample(derive_seed(seed, "z"), draws);
    shifts_ = w * ab.transpose() - z * b_inv_.transpose();
  }
}

double ConvolvedDensity::operator()(std::span<const double> x) const {
  const int d = static_cast<int>(shifts_.cols());
  if (static_cast<int>(x.size()) != d) throw UsageError("convolved density: dimension mismatch");
  std::vector<double> base(x.begin(), x.end());
  if (kind_ == Kind::ObsPredictive) {
    for (int i = 0; i < d; ++i) {
      double s = 0.0;
      for (int j = 0; j < d; ++j) s += b_inv_(i, j) * x[j];
      base[i] = s;
    }
  }
  std::vector<double> p(static_cast<std::size_t>(d));
  double sum = 0.0;
  for (Eigen::Index r = 0; r < shifts_.rows(); ++r) {
    for (int i = 0; i < d; ++i) p[i] = base[i] + shifts_(r, i);
    sum += f_eps_(p);
  }
  return sum / static_cast<double>(shifts_.rows());
}

double conv_state_pred_density(const DensityFn& f_eps, const Matrix& a, const Matrix& b, const NoiseFamily& eta,
                               std::span<const double> x, Eigen::Index draws, Seed seed) {
  return ConvolvedDensity(ConvolvedDensity::Kind::StatePredictive, f_eps, a, b, eta, draws, seed)(x);
}

double conv_obs_pred_density(const DensityFn& f_eps, const Matrix& a, const Matrix& b, const NoiseFamily& eta,
                             std::span<const double> x, Eigen::Index draws, Seed seed) {
  return ConvolvedDensity(ConvolvedDensity::Kind::ObsPredictive, f_eps, a, b, eta, draws, seed)(x);
}

double sample_quantile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double t = pos - static_cast<double>(i);
  if (i + 1 >= values.size()) return values.back();
  return values[i] + t * (values[i + 1] - values[i]);
}

// ---------------------------------------------------------------- truth

std::optional<DensityFn> truth_state_density(const BenchmarkModel& model) {
  if (!model.state_density_known()) return std::nullopt;
  const auto& spec = model.spec;
  const Matrix cov = stationary_covariance(spec.A, spec.eps.covariance());
  return gaussian_density_fn(cov, Matrix::Identity(spec.dimension(), spec.dimension()));
}

DensityFn truth_density(const BenchmarkModel& model, BandTarget target, const ExperimentConfig& config) {
  const auto& spec = model.spec;
  if (target == BandTarget::StateNoise) {
    const NoiseFamily eps = spec.eps;
    return [eps](std::span<const double> x) { return eps.density(x); };
  }
  if (!(spec.eps.is_gaussian() && spec.eta.is_gaussian())) return monte_carlo_truth(model, target, config);

  const Eigen::Index d = spec.dimension();
  const Matrix b_inv = checked_inverse(spec.B, "B");
  const Matrix ab = spec.A * b_inv;
  const Matrix sigma = spec.eps.covariance();
  const Matrix pi = spec.eta.covariance();
  if (target == BandTarget::StatePredictive) {
    return gaussian_density_fn(sigma + ab * pi * ab.transpose(), Matrix::Identity(d, d));
  }
  // g(x) = f_V(B^{-1}x), V = eps - A B^{-1} w + B^{-1} z
  return gaussian_density_fn(sigma + ab * pi * ab.transpose() + b_inv * pi * b_inv.transpose(), b_inv);
}

// ---------------------------------------------------------------- config

void ExperimentConfig::validate() const {
  if (n < 3) throw UsageError("n must be >= 3");
  if (replicates < 1) throw UsageError("replicate count must be >= 1");
  if (nodes < 1 || mc_draws < 1 || t2_samples < 1 || conv_draws < 1 || truth_draws < 1)
    throw UsageError("sample counts must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw UsageError("level must lie in (0, 1)");
  if (!(tolerance > 0.0)) throw UsageError("tolerance must be > 0");
  if (max_doublings < 0 || max_doublings > 60) throw UsageError("max_doublings must be in [0, 60]");
  if (burn_in < 0) throw UsageError("burn_in must be >= 0");
  if (bandwidth && !(*bandwidth > 0.0)) throw UsageError("bandwidth must be > 0");
  if (grid_points < 2 || !(grid_hi > grid_lo)) throw UsageError("figure grid needs >= 2 points and hi > lo");
}

double ExperimentConfig::bandwidth_for(const BenchmarkModel& model) const {
  if (bandwidth) return default_bandwidth(n, ExplicitBandwidth{*bandwidth});
  return default_bandwidth(n, model.policy);
}

std::string ExperimentConfig::hash() const {
  const std::string s = to_json();
  std::uint64_t h = stream_tag(s);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------- threads

int effective_threads(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SSDECONV_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return std::max(1, n);
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(effective_threads(threads)), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  // lowest index first, independent of scheduling
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------- runners

MetricReport run_table1(const ExperimentConfig& config) {
  config.validate();
  const BenchmarkModel model = BenchmarkModel::make(config.model);
  const auto& spec = model.spec;
  const int d = spec.dimension();
  const double h = config.bandwidth_for(model);
  const auto truth_x = truth_state_density(model);
  const DensityFn truth_eps = truth_density(model, BandTarget::StateNoise, config);
  const DensityFn truth_z = truth_density(model, BandTarget::StatePredictive, config);
  const DensityFn truth_g = truth_density(model, BandTarget::ObsPredictive, config);

  const auto reps = static_cast<std::size_t>(config.replicates);
  std::vector<double> err_a(reps), err_x(reps), err_eps(reps), err_z(reps), err_g(reps);

  parallel_for(reps, config.threads, [&](std::size_t r) {
    try {
      const Seed rep = derive_seed(config.master_seed, r);
      const SimulatedSeries sim = generate_series(spec, config.n, derive_seed(rep, "series"), config.burn_in);
      const FittedNoise fit = fit_noise(model, config, sim, rep);
      const Seed t2_seed = derive_seed(rep, "t2");
      err_a[r] = spectral_norm(fit.a_hat - spec.A);
      err_eps[r] = t2_norm_diff(fit.f_eps, truth_eps, h, d, config.t2_samples, t2_seed);
      if (truth_x) {
        const auto fx = fit_state_density(sim.y, spec.B, spec.eta, KernelSpec::flat_top(), fit.nodes);
        const DensityFn fx_fast = TabulatedFunction::from_estimate(fx, tabulation_half_width(sim.y, spec.B),
                                                                   tabulation_density(d))
                                      .as_function();
        err_x[r] = t2_norm_diff(fx_fast, *truth_x, h, d, config.t2_samples, t2_seed);
      }
      const Seed conv_seed = derive_seed(rep, "conv");
      const DensityFn z_hat =
          convolved_on_cube(ConvolvedDensity::Kind::StatePredictive, fit.f_eps, fit.a_hat, model, config, h, conv_seed);
      const DensityFn g_hat =
          convolved_on_cube(ConvolvedDensity::Kind::ObsPredictive, fit.f_eps, fit.a_hat, model, config, h, conv_seed);
      err_z[r] = t2_norm_diff(z_hat, truth_z, h, d, config.t2_samples, t2_seed);
      err_g[r] = t2_norm_diff(g_hat, truth_g, h, d, config.t2_samples, t2_seed);
    } catch (const Error& e) {
      rethrow_with_replicate(static_cast<int>(r), e);
    }
  });

  MetricReport report;
  report.config = config;
  report.table = "table1";
  report.bandwidth = h;
  report.errors.push_back(summarize("A", std::move(err_a)));
  if (truth_x) report.errors.push_back(summarize("f_X", std::move(err_x)));
  report.errors.push_back(summarize("f_eps", std::move(err_eps)));
  report.errors.push_back(summarize("z", std::move(err_z)));
  report.errors.push_back(summarize("g", std::move(err_g)));
  return report;
}

MetricReport run_table2(const ExperimentConfig& config) {
  config.validate();
  const BenchmarkModel model = BenchmarkModel::make(config.model);
  const auto& spec = model.spec;
  const auto reps = static_cast<std::size_t>(config.replicates);

  MethodStats alg;
  alg.method = "algorithm1";
  MethodStats kal;
  kal.method = "kalman";
  for (int k = 0; k < 3; ++k) {
    alg.hits[k].assign(reps, 0);
    alg.lengths[k].assign(reps, 0.0);
    kal.hits[k].assign(reps, 0);
    kal.lengths[k].assign(reps, 0.0);
  }

  parallel_for(reps, config.threads, [&](std::size_t r) {
    try {
      const Seed rep = derive_seed(config.master_seed, r);
      const SimulatedSeries sim = generate_series(spec, config.n, derive_seed(rep, "series"), config.burn_in);
      const FittedNoise fit = fit_noise(model, config, sim, rep);
      const MCBudget budget{config.mc_draws, config.tolerance, config.max_doublings, derive_seed(rep, "mc")};
      const auto boxes = predict_intervals(sim.y, spec.B, spec.eta, fit.f_eps, fit.a_hat, config.level, budget);
      const auto ellipsoids = kalman_intervals(spec, sim.y, config.level, config.kalman_init);
      const std::array<Vector, 3> truth{sim.states.row(config.n - 1).transpose(), sim.next_state,
                                        sim.next_observation};
      for (int k = 0; k < 3; ++k) {
        alg.hits[k][r] = boxes[k].contains(truth[k]) ? 1 : 0;
        alg.lengths[k][r] = boxes[k].length();
        kal.hits[k][r] = ellipsoids[k].contains(truth[k]) ? 1 : 0;
        kal.lengths[k][r] = ellipsoids[k].mean_length();
      }
    } catch (const Error& e) {
      rethrow_with_replicate(static_cast<int>(r), e);
    }
  });

  for (auto* m : {&alg, &kal}) {
    for (int k = 0; k < 3; ++k) {
      double hits = 0.0;
      for (char c : m->hits[k]) hits += c;
      m->coverage[k] = hits / static_cast<double>(reps);
      m->mean_length[k] = mean_of(m->lengths[k]);
    }
  }
  MetricReport report;
  report.config = config;
  report.table = "table2";
  report.bandwidth = config.bandwidth_for(model);
  report.methods = {std::move(alg), std::move(kal)};
  return report;
}

std::string to_string(BandTarget target) {
  switch (target) {
    case BandTarget::StateNoise: return "f_eps";
    case BandTarget::StatePredictive: return "z";
    case BandTarget::ObsPredictive: return "g";
  }
  return "?";
}

BandTable figure1_bands(const ExperimentConfig& config, BandTarget target, std::vector<double> grid) {
  config.validate();
  const BenchmarkModel model = BenchmarkModel::make(config.model);
  if (model.spec.dimension() != 1) throw UsageError("figure bands are defined for one-dimensional models only");
  if (grid.empty()) throw UsageError("figure grid is empty");
  std::sort(grid.begin(), grid.end());
  const auto reps = static_cast<std::size_t>(config.replicates);
  const std::size_t m = grid.size();
  std::vector<std::vector<double>> curves(reps, std::vector<double>(m));

  parallel_for(reps, config.threads, [&](std::size_t r) {
    try {
      const Seed rep = derive_seed(config.master_seed, r);
      const SimulatedSeries sim = generate_series(model.spec, config.n, derive_seed(rep, "series"), config.burn_in);
      const FittedNoise fit = fit_noise(model, config, sim, rep);
      DensityFn fn = fit.f_eps;
      if (target != BandTarget::StateNoise) {
        const auto kind = target == BandTarget::StatePredictive ? ConvolvedDensity::Kind::StatePredictive
                                                                : ConvolvedDensity::Kind::ObsPredictive;
        auto conv = std::make_shared<const ConvolvedDensity>(kind, fit.f_eps, fit.a_hat, model.spec.B,
                                                             model.spec.eta, config.conv_draws,
                                                             derive_seed(rep, "conv"));
        fn = [conv](std::span<const double> x) { return (*conv)(x); };
      }
      for (std::size_t i = 0; i < m; ++i) curves[r][i] = fn(std::span<const double>(&grid[i], 1));
    } catch (const Error& e) {
      rethrow_with_replicate(static_cast<int>(r), e);
    }
  });

  const DensityFn truth = truth_density(model, target, config);
  BandTable table;
  table.config = config;
  table.target = target;
  table.grid = grid;
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> column(reps);
    for (std::size_t r = 0; r < reps; ++r) column[r] = curves[r][i];
    table.truth.push_back(truth(std::span<const double>(&grid[i], 1)));
    table.mean.push_back(mean_of(column));
    table.q05.push_back(sample_quantile(column, 0.05));
    table.q50.push_back(sample_quantile(column, 0.50));
    table.q95.push_back(sample_quantile(column, 0.95));
  }
  return table;
}

}  // namespace ssdeconv
