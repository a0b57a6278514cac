#include "ssdeconv/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "ssdeconv/error.hpp"
#include "ssdeconv/estimation.hpp"
#include "ssdeconv/harness.hpp"
#include "ssdeconv/prediction.hpp"
#include "ssdeconv/series_io.hpp"

namespace ssdeconv {

namespace {

using json = nlohmann::json;

struct Options {
  std::string model;
  std::string spec_path;
  std::string input;
  std::string out;
  std::string states_out;
  std::string grid_out;
  std::string json_out;
  std::string target = "eps";
  std::string regime;
  std::string kalman_init = "stationary";
  std::string which;
  std::string cache_dir;
  std::optional<double> h;
  long long n = 500;
  long long nodes = 10000;
  long long mc = 100000;
  long long t2_samples = 50000;
  long long conv_draws = 20000;
  long long truth_draws = 1000000;
  double eps_tol = 1e-3;
  double level = 0.95;
  double grid_lo = -4.0;
  double grid_hi = 4.0;
  int grid_points = 161;
  int max_doublings = 60;
  int replicates = 100;
  int burn_in = 1000;
  int threads = 0;
  std::uint64_t seed = 1;
  bool full = false;
};

// Measurement side of a model: all that estimation and interval construction need.
struct ObservationModel {
  std::string source;
  Matrix b;
  NoiseFamily eta;
  std::optional<StateSpaceSpec> full;
  std::optional<BandwidthPolicy> policy;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& path, const std::string& contents, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << contents;
  } else {
    write_file_atomic(path, contents);
  }
}

Matrix parse_matrix(const json& j, const char* field) {
  if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw DataError(std::string("field '") + field + "' must be an array of rows");
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != static_cast<std::size_t>(m.cols()))
      throw DataError(std::string("field '") + field + "' has ragged rows");
    for (std::size_t k = 0; k < j[i].size(); ++k) {
      if (!j[i][k].is_number()) throw DataError(std::string("field '") + field + "' has a non-numeric entry");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
    }
  }
  return m;
}

StateSpaceSpec load_full_spec(const Options& o) {
  if (!o.model.empty()) return BenchmarkModel::parse(o.model).spec;
  if (o.spec_path.empty()) throw UsageError("one of --model or --spec is required");
  return StateSpaceSpec::from_json(read_text(o.spec_path));
}

ObservationModel load_observation_model(const Options& o) {
  if (!o.model.empty()) {
    const BenchmarkModel m = BenchmarkModel::parse(o.model);
    return {m.name(), m.spec.B, m.spec.eta, m.spec, m.policy};
  }
  if (o.spec_path.empty()) throw UsageError("one of --model or --spec is required");
  const std::string text = read_text(o.spec_path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("malformed spec JSON: ") + e.what());
  }
  if (!j.is_object()) throw DataError("spec JSON must be an object");
  if (!j.contains("eta")) throw DataError("spec is missing the measurement-noise law 'eta'");
  if (!j.contains("B")) throw DataError("spec is missing the measurement matrix 'B'");
  if (j.contains("A") && j.contains("eps") && j.contains("d")) {
    StateSpaceSpec spec = StateSpaceSpec::from_json(text);
    return {o.spec_path, spec.B, spec.eta, spec, std::nullopt};
  }
  Matrix b = parse_matrix(j["B"], "B");
  NoiseFamily eta = NoiseFamily::from_json(j["eta"].dump());
  if (b.rows() != b.cols() || b.rows() != eta.dimension())
    throw DataError("'B' must be square and match the dimension of 'eta'");
  checked_inverse(b, "B");
  return {o.spec_path, std::move(b), std::move(eta), std::nullopt, std::nullopt};
}

BandwidthPolicy resolve_policy(const Options& o, const ObservationModel& m) {
  if (o.h) return ExplicitBandwidth{*o.h};
  if (o.regime == "ordinary") return SmoothnessRegime{OrdinarySmooth{}};
  if (o.regime == "super") return SmoothnessRegime{SuperSmooth{}};
  if (m.policy) return *m.policy;
  return m.eta.is_gaussian() ? BandwidthPolicy{SmoothnessRegime{SuperSmooth{}}}
                             : BandwidthPolicy{SmoothnessRegime{OrdinarySmooth{}}};
}

std::string policy_name(const BandwidthPolicy& p) {
  if (const auto* r = std::get_if<SmoothnessRegime>(&p)) return regime_name(*r);
  return "explicit";
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw UsageError("--level must lie in (0, 1)");
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const Options& o, std::ostream& out) {
  const StateSpaceSpec spec = load_full_spec(o);
  if (o.n < 3) throw UsageError("--n must be >= 3");
  const SimulatedSeries sim = generate_series(spec, o.n, o.seed, o.burn_in);
  json cfg{{"command", "simulate"},
           {"source", o.model.empty() ? o.spec_path : o.model},
           {"n", o.n},
           {"seed", o.seed},
           {"burn_in", o.burn_in},
           {"spec", json::parse(spec.to_json())}};
  emit(o.out, format_matrix_csv(sim.y.values(), "y", "config=" + cfg.dump()), out);
  if (!o.states_out.empty()) {
    const Eigen::Index d = spec.dimension();
    Matrix states(o.n + 1, d);
    states.topRows(o.n) = sim.states;
    states.row(o.n) = sim.next_state.transpose();
    json held{{"next_observation", std::vector<double>(sim.next_observation.data(),
                                                       sim.next_observation.data() + d)}};
    write_file_atomic(o.states_out,
                      format_matrix_csv(states, "x", "config=" + cfg.dump() + "\nheld_out=" + held.dump()));
  }
  return 0;
}

// ---------------------------------------------------------------- estimate

int cmd_estimate(const Options& o, std::ostream& out) {
  const ObservationModel m = load_observation_model(o);
  const ObservationSeries y = read_series(o.input);
  if (y.dimension() != m.b.rows()) throw DataError("series dimension does not match the model");
  const BandwidthPolicy policy = resolve_policy(o, m);
  const double h = default_bandwidth(y.length(), policy);
  const Matrix a_hat = estimate_A(y, m.b);

  json cfg{{"command", "estimate"}, {"input", o.input}, {"source", m.source}, {"n", y.length()},
           {"d", y.dimension()},   {"h", h},           {"bandwidth", policy_name(policy)},
           {"nodes", o.nodes},     {"seed", o.seed},   {"target", o.target}};
  json result{{"config", cfg}, {"A_hat", matrix_json(a_hat)}};
  if (!o.grid_out.empty()) {
    if (o.grid_points < 2 || !(o.grid_hi > o.grid_lo)) throw UsageError("grid needs >= 2 points and hi > lo");
    auto nodes = std::make_shared<const FourierNodes>(
        build_fourier_nodes(h, 2.0, o.nodes, y.dimension(), derive_seed(o.seed, "nodes")));
    const DensityEstimate est = o.target == "state"
                                    ? fit_state_density(y, m.b, m.eta, KernelSpec::flat_top(), nodes)
                                    : fit_noise_density(y, m.b, a_hat, m.eta, KernelSpec::flat_top(), nodes);
    std::vector<double> axis(static_cast<std::size_t>(o.grid_points));
    for (int i = 0; i < o.grid_points; ++i)
      axis[i] = o.grid_lo + (o.grid_hi - o.grid_lo) * i / (o.grid_points - 1);
    std::ostringstream grid;
    write_density_grid(grid, est, std::vector<std::vector<double>>(y.dimension(), axis), "config=" + cfg.dump());
    write_file_atomic(o.grid_out, grid.str());
    result["grid_out"] = o.grid_out;
  }
  emit(o.out, result.dump(2) + "\n", out);
  return 0;
}

// ---------------------------------------------------------------- intervals

int cmd_intervals(const Options& o, std::ostream& out) {
  check_level(o.level);
  const ObservationModel m = load_observation_model(o);
  const ObservationSeries y = read_series(o.input);
  if (y.dimension() != m.b.rows()) throw DataError("series dimension does not match the model");
  const BandwidthPolicy policy = resolve_policy(o, m);
  const double h = default_bandwidth(y.length(), policy);
  const Matrix a_hat = estimate_A(y, m.b);
  auto nodes = std::make_shared<const FourierNodes>(
      build_fourier_nodes(h, 2.0, o.nodes, y.dimension(), derive_seed(o.seed, "nodes")));
  const DensityEstimate f_eps = fit_noise_density(y, m.b, a_hat, m.eta, KernelSpec::flat_top(), nodes);
  const Matrix z = y.values() * checked_inverse(m.b, "B").transpose();
  double sd = 0.0;
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const double mean = z.col(j).mean();
    sd = std::max(sd, std::sqrt((z.col(j).array() - mean).square().mean()));
  }
  const DensityFn fast = fast_density(f_eps, std::max(6.0, 6.0 * sd + 2.0));
  const MCBudget budget{o.mc, o.eps_tol, o.max_doublings, derive_seed(o.seed, "mc")};
  const auto reports = predict_intervals(y, m.b, m.eta, fast, a_hat, o.level, budget);

  json cfg{{"command", "intervals"}, {"input", o.input},   {"source", m.source},        {"n", y.length()},
           {"d", y.dimension()},     {"h", h},             {"bandwidth", policy_name(policy)},
           {"nodes", o.nodes},       {"mc", o.mc},         {"eps_tol", o.eps_tol},
           {"max_doublings", o.max_doublings},             {"level", o.level},          {"seed", o.seed}};
  json list = json::array();
  for (const auto& r : reports) list.push_back(json::parse(r.to_json()));
  json result{{"config", cfg}, {"A_hat", matrix_json(a_hat)}, {"intervals", list}};
  emit(o.out, result.dump(2) + "\n", out);
  return 0;
}

// ---------------------------------------------------------------- experiment

ExperimentConfig experiment_config(const Options& o, const BenchmarkModel& model, Eigen::Index n) {
  ExperimentConfig c;
  c.model = model.id;
  c.n = n;
  c.replicates = o.replicates;
  c.master_seed = o.seed;
  c.nodes = o.nodes;
  c.mc_draws = o.mc;
  c.tolerance = o.eps_tol;
  c.max_doublings = o.max_doublings;
  c.level = o.level;
  c.t2_samples = o.t2_samples;
  c.conv_draws = o.conv_draws;
  c.truth_draws = o.truth_draws;
  c.burn_in = o.burn_in;
  c.threads = o.threads;
  c.cache_dir = o.cache_dir;
  c.grid_lo = o.grid_lo;
  c.grid_hi = o.grid_hi;
  c.grid_points = o.grid_points;
  if (o.h) {
    c.bandwidth = o.h;
  } else if (o.regime == "ordinary") {
    c.bandwidth = default_bandwidth(n, SmoothnessRegime{OrdinarySmooth{}});
  } else if (o.regime == "super") {
    c.bandwidth = default_bandwidth(n, SmoothnessRegime{SuperSmooth{}});
  }
  if (o.kalman_init == "zero") c.kalman_init = KalmanInit::ZeroStart;
  c.validate();
  return c;
}

// Merges several single-table CSV documents: all comment lines, one column header, all rows.
std::string merge_csv(const std::vector<std::string>& docs) {
  std::string comments, columns, rows;
  for (const auto& doc : docs) {
    std::istringstream in(doc);
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
      if (!line.empty() && line[0] == '#') {
        comments += line + '\n';
      } else if (!header_seen) {
        header_seen = true;
        if (columns.empty()) columns = line + '\n';
      } else {
        rows += line + '\n';
      }
    }
  }
  return comments + columns + rows;
}

int cmd_experiment(Options o, bool n_given, bool replicates_given, std::ostream& out) {
  check_level(o.level);
  if (o.model.empty()) throw UsageError("experiment requires --model");
  const BenchmarkModel model = BenchmarkModel::parse(o.model);
  const bool two_d = model.spec.dimension() == 2;

  std::vector<Eigen::Index> sizes{o.n};
  if (o.full) {
    if (!replicates_given) o.replicates = 500;
    if (!n_given) {
      if (o.which == "table1") sizes = two_d ? std::vector<Eigen::Index>{5000} : std::vector<Eigen::Index>{500, 2000};
      if (o.which == "table2") sizes = {500, 2000};
    }
  } else if (!n_given && two_d && o.which == "table1") {
    sizes = {5000};
  }

  if (o.which == "figure1") {
    BandTarget target = BandTarget::StateNoise;
    if (o.target == "z") target = BandTarget::StatePredictive;
    else if (o.target == "g") target = BandTarget::ObsPredictive;
    else if (o.target != "eps") throw UsageError("--target must be eps, z or g for figure1");
    const ExperimentConfig c = experiment_config(o, model, sizes.front());
    std::vector<double> grid(static_cast<std::size_t>(c.grid_points));
    for (int i = 0; i < c.grid_points; ++i) grid[i] = c.grid_lo + (c.grid_hi - c.grid_lo) * i / (c.grid_points - 1);
    emit(o.out, figure1_bands(c, target, grid).to_csv(), out);
    return 0;
  }

  std::vector<std::string> csv;
  json reports = json::array();
  for (Eigen::Index n : sizes) {
    const ExperimentConfig c = experiment_config(o, model, n);
    const MetricReport r = o.which == "table1" ? run_table1(c) : run_table2(c);
    csv.push_back(r.to_csv());
    reports.push_back(json::parse(r.to_json()));
  }
  emit(o.out, merge_csv(csv), out);
  if (!o.json_out.empty()) write_file_atomic(o.json_out, reports.dump(2) + "\n");
  return 0;
}

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Usage: return "usage";
    case ErrorKind::Data: return "data";
    case ErrorKind::Numeric: return "numeric";
  }
  return "numeric";
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Usage: return 2;
    case ErrorKind::Data: return 3;
    case ErrorKind::Numeric: return 4;
  }
  return 4;
}

void report_error(std::ostream& err, const char* kind, std::string message) {
  for (auto& c : message)
    if (c == '\n' || c == '\r') c = ' ';
  err << "ssdeconv: error kind=" << kind << ": " << message << '\n';
}

void add_model_source(CLI::App* sub, Options& o) {
  auto* model = sub->add_option("--model", o.model, "Builtin benchmark model: O1, S1, O2, S2");
  auto* spec = sub->add_option("--spec", o.spec_path, "State space model JSON file");
  model->excludes(spec);
}

void add_bandwidth(CLI::App* sub, Options& o) {
  auto* h = sub->add_option("--h", o.h, "Explicit bandwidth")->check(CLI::PositiveNumber);
  auto* regime =
      sub->add_option("--regime", o.regime, "Bandwidth rule")->check(CLI::IsMember({"ordinary", "super"}));
  h->excludes(regime);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Deconvolution estimation and prediction intervals for linear state space models", "ssdeconv"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  app.set_version_flag("--version", "ssdeconv 0.1.0");

  auto* sim = app.add_subcommand("simulate", "Simulate an observation series");
  add_model_source(sim, o);
  sim->add_option("--n", o.n, "Series length")->check(CLI::Range(3LL, 1LL << 40));
  sim->add_option("--seed", o.seed, "Random seed");
  sim->add_option("--burn-in", o.burn_in, "Discarded initial steps (0 starts at X_1 = 0)")->check(CLI::NonNegativeNumber);
  sim->add_option("--out", o.out, "Series CSV path (default stdout)");
  sim->add_option("--states", o.states_out, "Optional CSV of X_1..X_{n+1}");

  auto* est = app.add_subcommand("estimate", "Estimate A and a density grid from a series");
  add_model_source(est, o);
  add_bandwidth(est, o);
  est->add_option("--input", o.input, "Series CSV")->required();
  est->add_option("--nodes", o.nodes, "Fourier nodes")->check(CLI::PositiveNumber);
  est->add_option("--seed", o.seed, "Random seed");
  est->add_option("--out", o.out, "A_hat JSON path (default stdout)");
  est->add_option("--grid-out", o.grid_out, "Density grid CSV path");
  est->add_option("--target", o.target, "Density to tabulate")->check(CLI::IsMember({"eps", "state"}));
  est->add_option("--grid-lo", o.grid_lo, "Grid lower end");
  est->add_option("--grid-hi", o.grid_hi, "Grid upper end");
  est->add_option("--grid-points", o.grid_points, "Grid points per axis");

  auto* itv = app.add_subcommand("intervals", "Prediction intervals for X_n, X_{n+1}, Y_{n+1}");
  add_model_source(itv, o);
  add_bandwidth(itv, o);
  itv->add_option("--input", o.input, "Series CSV")->required();
  itv->add_option("--nodes", o.nodes, "Fourier nodes")->check(CLI::PositiveNumber);
  itv->add_option("--mc", o.mc, "Monte Carlo draws per CDF evaluation")->check(CLI::PositiveNumber);
  itv->add_option("--eps-tol", o.eps_tol, "Bisection tolerance")->check(CLI::PositiveNumber);
  itv->add_option("--max-doublings", o.max_doublings, "Bracket doublings")->check(CLI::Range(0, 60));
  itv->add_option("--level", o.level, "Nominal coverage in (0, 1)");
  itv->add_option("--seed", o.seed, "Random seed");
  itv->add_option("--out", o.out, "Interval JSON path (default stdout)");

  auto* exp = app.add_subcommand("experiment", "Reproduce the benchmark experiments");
  exp->add_option("which", o.which, "table1, table2 or figure1")
      ->required()
      ->check(CLI::IsMember({"table1", "table2", "figure1"}));
  exp->add_option("--model", o.model, "Benchmark model: O1, S1, O2, S2")->required();
  add_bandwidth(exp, o);
  auto* n_opt = exp->add_option("--n", o.n, "Series length")->check(CLI::Range(3LL, 1LL << 40));
  auto* rep_opt = exp->add_option("--replicates", o.replicates, "Replicates")->check(CLI::PositiveNumber);
  exp->add_option("--seed", o.seed, "Master seed");
  exp->add_option("--nodes", o.nodes, "Fourier nodes")->check(CLI::PositiveNumber);
  exp->add_option("--mc", o.mc, "Monte Carlo draws per CDF evaluation")->check(CLI::PositiveNumber);
  exp->add_option("--eps-tol", o.eps_tol, "Bisection tolerance")->check(CLI::PositiveNumber);
  exp->add_option("--max-doublings", o.max_doublings, "Bracket doublings")->check(CLI::Range(0, 60));
  exp->add_option("--level", o.level, "Nominal coverage in (0, 1)");
  exp->add_option("--t2-samples", o.t2_samples, "Monte Carlo samples for T2 errors")->check(CLI::PositiveNumber);
  exp->add_option("--conv-draws", o.conv_draws, "Draws for z_hat and g_hat")->check(CLI::PositiveNumber);
  exp->add_option("--truth-draws", o.truth_draws, "Draws for Monte Carlo truth curves")->check(CLI::PositiveNumber);
  exp->add_option("--burn-in", o.burn_in, "Discarded initial steps")->check(CLI::NonNegativeNumber);
  exp->add_option("--threads", o.threads, "Worker threads (0: auto)")->check(CLI::NonNegativeNumber);
  exp->add_option("--cache-dir", o.cache_dir, "Directory for cached truth curves");
  exp->add_option("--kalman-init", o.kalman_init, "Kalman start")->check(CLI::IsMember({"zero", "stationary"}));
  exp->add_option("--target", o.target, "figure1 curve: eps, z or g")->check(CLI::IsMember({"eps", "z", "g"}));
  exp->add_option("--grid-lo", o.grid_lo, "figure1 grid lower end");
  exp->add_option("--grid-hi", o.grid_hi, "figure1 grid upper end");
  exp->add_option("--grid-points", o.grid_points, "figure1 grid points");
  exp->add_option("--out", o.out, "CSV path (default stdout)");
  exp->add_option("--json", o.json_out, "Optional JSON report path");
  exp->add_flag("--full", o.full, "Full configuration: 500 replicates and every table size");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << "ssdeconv 0.1.0\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what());
    return 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(o, out);
    if (est->parsed()) return cmd_estimate(o, out);
    if (itv->parsed()) return cmd_intervals(o, out);
    return cmd_experiment(o, n_opt->count() > 0, rep_opt->count() > 0, out);
  } catch (const Error& e) {
    report_error(err, kind_name(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    report_error(err, "numeric", e.what());
    return 4;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv, argv + argc);
  return run_cli(args, out, err);
}

}  // namespace ssdeconv
