// Acceptance suite: `acceptance N` evaluates criterion N (1..6), prints one
// PASS/FAIL line and exits nonzero on FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "ssdeconv/chi2.hpp"
#include "ssdeconv/cli.hpp"
#include "ssdeconv/error.hpp"
#include "ssdeconv/estimation.hpp"
#include "ssdeconv/harness.hpp"
#include "ssdeconv/kernel.hpp"
#include "ssdeconv/prediction.hpp"
#include "support.hpp"

using namespace ssdeconv;
using ssdeconv::test::normal_cdf;

namespace {

struct Checks {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& label) {
    if (!cond) ok = false;
    detail << ' ' << label << (cond ? "" : "[fail]");
  }
  void in_range(const std::string& name, double v, double lo, double hi) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s=%.4f in [%.4f, %.4f]", name.c_str(), v, lo, hi);
    expect(v >= lo && v <= hi, buf);
  }
  void near(const std::string& name, double v, double target, double tol) {
    in_range(name, v, target - tol, target + tol);
  }
};

std::vector<double> split_doubles(const std::string& row) {
  std::vector<double> out;
  std::istringstream in(row);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() && *end == '\0') out.push_back(v);
  }
  return out;
}

// Numeric fields of the CSV row whose method column equals `method`.
std::vector<double> table2_row(const std::string& csv, const std::string& method) {
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line))
    if (line.find("," + method + ",") != std::string::npos) return split_doubles(line);
  throw DataError("table2 CSV has no row for " + method);
}

std::string run_tool(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  std::vector<std::string> argv{"ssdeconv"};
  argv.insert(argv.end(), args.begin(), args.end());
  if (run_cli(argv, out, err) != 0) throw NumericError("ssdeconv failed: " + err.str());
  return out.str();
}

// Mean ||A_hat - A||_2 with the replicate seeding of run_table1.
double mean_a_error(BenchmarkId id, Eigen::Index n, int replicates, Seed master) {
  const auto model = BenchmarkModel::make(id);
  const ExperimentConfig defaults;
  double sum = 0.0;
  for (int r = 0; r < replicates; ++r) {
    const Seed rep = derive_seed(master, static_cast<std::uint64_t>(r));
    const auto sim = generate_series(model.spec, n, derive_seed(rep, "series"), defaults.burn_in);
    sum += spectral_norm(estimate_A(sim.y, model.spec.B) - model.spec.A);
  }
  return sum / replicates;
}

ExperimentConfig base_config(BenchmarkId id, Eigen::Index n) {
  ExperimentConfig c;
  c.model = id;
  c.n = n;
  c.replicates = 100;
  c.master_seed = 1;
  return c;
}

// ---------------------------------------------------------------- criteria

Checks criterion_1() {
  Checks c;
  c.in_range("O1 n=500 A", mean_a_error(BenchmarkId::O1, 500, 100, 1), 0.030, 0.050);
  c.in_range("O1 n=2000 A", mean_a_error(BenchmarkId::O1, 2000, 100, 1), 0.015, 0.027);
  return c;
}

Checks criterion_2() {
  Checks c;
  const auto r = run_table1(base_config(BenchmarkId::S1, 500));
  c.in_range("f_X", r.quantity("f_X")->mean, 0.04, 0.08);
  c.in_range("f_eps", r.quantity("f_eps")->mean, 0.12, 0.21);
  c.in_range("z", r.quantity("z")->mean, 0.03, 0.06);
  c.in_range("g", r.quantity("g")->mean, 0.012, 0.032);
  return c;
}

Checks criterion_3() {
  Checks c;
  const std::vector<std::string> common{"--n", "500", "--replicates", "100", "--seed", "1", "--mc", "100000"};
  auto args = [&](const char* model) {
    std::vector<std::string> a{"experiment", "table2", "--model", model};
    a.insert(a.end(), common.begin(), common.end());
    return a;
  };
  // Row layout: n, replicates, cov_F, cov_PX, cov_PY, len_F, len_PX, len_PY.
  const auto s1 = table2_row(run_tool(args("S1")), "algorithm1");
  const double cov[3] = {0.960, 0.926, 0.910};
  const double len[3] = {3.846, 4.776, 5.738};
  const char* names[3] = {"F", "PX", "PY"};
  for (int k = 0; k < 3; ++k) {
    c.near(std::string("S1 cov_") + names[k], s1[2 + k], cov[k], 0.06);
    c.in_range(std::string("S1 len_") + names[k], s1[5 + k], 0.9 * len[k], 1.1 * len[k]);
  }
  const auto o1 = table2_row(run_tool(args("O1")), "algorithm1");
  const double cov_o[3] = {0.944, 0.922, 0.904};
  for (int k = 0; k < 3; ++k) c.near(std::string("O1 cov_") + names[k], o1[2 + k], cov_o[k], 0.06);
  return c;
}

Checks criterion_4() {
  Checks c;
  auto cfg = base_config(BenchmarkId::S1, 500);
  const auto r = run_table2(cfg);
  const auto* k = r.method("kalman");
  c.near("F length", k->mean_length[0], 4.588, 0.03 * 4.588);
  c.near("PY coverage", k->coverage[2], 0.906, 0.06);
  return c;
}

Checks criterion_5() {
  Checks c;
  const Eigen::Index r = 100000;

  // (a) op_H against the closed-form CDF of |N(0, 1)|.
  {
    const auto spec = BenchmarkModel::make(BenchmarkId::S1).spec;
    MCBudget b;
    b.draws = r;
    b.seed = 101;
    const FilterRootCdf h(spec.B, PredictionDraws::generate(spec.eta, b));
    bool ok = true;
    for (int i = 1; i <= 20; ++i) {
      const double x = 0.15 * i;
      const double p = 2.0 * normal_cdf(x) - 1.0;
      ok = ok && std::abs(h(x) - p) <= 3.0 * std::sqrt(p * (1.0 - p) / double(r));
    }
    c.expect(ok, "(a) op_H");
  }

  // (b) oracle agreement on S1 and O1.
  {
    bool ok = true;
    const double tol = 3.0 * std::sqrt(0.25 / double(r));
    for (auto id : {BenchmarkId::S1, BenchmarkId::O1}) {
      const auto spec = BenchmarkModel::make(id).spec;
      const DensityFn f = [e = spec.eps](std::span<const double> x) { return e.density(x); };
      MCBudget b;
      b.draws = r;
      b.seed = 202;
      const auto draws = PredictionDraws::generate(spec.eta, b);
      const StateRootCdf n(f, spec.A, spec.B, draws);
      const ObsRootCdf g(f, spec.A, spec.B, draws);
      const auto sn = simulate_root_norms(RootKind::StatePredict, spec, 4000000, 303);
      const auto sg = simulate_root_norms(RootKind::ObsPredict, spec, 4000000, 404);
      auto frac = [](const std::vector<double>& v, double x) {
        return double(std::upper_bound(v.begin(), v.end(), x) - v.begin()) / double(v.size());
      };
      for (int i = 1; i <= 10; ++i) {
        const double x = 0.4 * i;
        ok = ok && std::abs(n.raw(x) - frac(sn, x)) <= tol && std::abs(g.raw(x) - frac(sg, x)) <= tol;
      }
    }
    c.expect(ok, "(b) op_N/op_G oracle");
  }

  // (c) A = 0, B = I: the estimate equals deterministic quadrature within 6 amplitude / sqrt(R).
  {
    const NoiseFamily eta = NoiseFamily::gaussian_iid(1, 0.3);
    const Matrix y = NoiseFamily::gaussian_iid(1, 1.0).sample(1, 400) + eta.sample(2, 400);
    const double h = 1.0;
    const Eigen::Index nodes_r = 20000;
    auto nodes = std::make_shared<const FourierNodes>(build_fourier_nodes(h, 2.0, nodes_r, 1, 9));
    const auto est = fit_state_density(ObservationSeries(y), Matrix::Identity(1, 1), eta, KernelSpec::flat_top(), nodes);
    using cd = std::complex<double>;
    const double bound = 6.0 * est.amplitude() / std::sqrt(double(nodes_r));
    bool ok = true;
    for (int i = 0; i < 20; ++i) {
      const double x = -3.0 + 6.0 * i / 19.0;
      const auto integrand = [&](double t) {
        cd ecf = 0;
        for (Eigen::Index j = 0; j < y.rows(); ++j) ecf += std::exp(cd(0, t * y(j, 0)));
        ecf /= double(y.rows());
        return (kernel_fg(h * t) / std::exp(-0.5 * 0.09 * t * t) * ecf * std::exp(cd(0, -t * x))).real();
      };
      const double quad = ssdeconv::test::simpson(integrand, -2.0 / h, 2.0 / h, 2000) / (2.0 * std::numbers::pi);
      ok = ok && std::abs(est.unclipped(std::span<const double>(&x, 1)).real() - quad) < bound;
    }
    c.expect(ok, "(c) degenerate deconvolution");
  }

  // (d) noiseless autoregression.
  {
    Matrix a(2, 2);
    a << 0.5, -0.3, 0.2, 0.4;
    Matrix x(40, 2);
    x.row(0) << 1.0, 2.0;
    for (int k = 1; k < 40; ++k) x.row(k) = (a * x.row(k - 1).transpose()).transpose();
    Matrix ar(40, 1);
    ar(0, 0) = 3.0;
    for (int k = 1; k < 40; ++k) ar(k, 0) = 0.8 * ar(k - 1, 0);
    const double e1 = std::abs(estimate_A(ObservationSeries(ar), Matrix::Identity(1, 1))(0, 0) - 0.8);
    const double e2 = (estimate_A(ObservationSeries(x), Matrix::Identity(2, 2)) - a).norm();
    c.expect(e1 < 1e-10 && e2 < 1e-10, "(d) noiseless A_hat");
  }

  // (e) kernel identities.
  c.expect(std::abs(kernel_fg(0.0) - 1.0) < 1e-9 && std::abs(kernel_fg(1.5) - 0.5) < 1e-9 &&
               std::abs(kernel_g(0.0) - 3.0 / (2.0 * std::numbers::pi)) < 1e-9,
           "(e) kernel identities");

  // (f) quantile search on analytic CDFs, Lipschitz constant L.
  {
    MCBudget b;
    b.tolerance = 1e-3;
    struct Case {
      std::function<double(double)> cdf;
      double level, root, lipschitz;
    };
    const Case cases[] = {
        {[](double x) { return std::min(x, 1.0); }, 0.95, 0.95, 1.0},
        {[](double x) { return 2.0 * normal_cdf(x) - 1.0; }, 0.95, 1.959963984540054, 2.0 / std::sqrt(2.0 * std::numbers::pi)},
        {[](double x) { return 1.0 - std::exp(-x / 3.0); }, 0.9, 3.0 * std::log(10.0), 1.0 / 3.0},
    };
    bool ok = true;
    for (const auto& k : cases) {
      const auto res = search_quantile(k.cdf, k.level, b);
      ok = ok && std::abs(res.x - k.root) <= b.tolerance &&
           std::abs(k.cdf(res.x) - k.level) <= k.lipschitz * b.tolerance;
    }
    c.expect(ok, "(f) quantile search");
  }

  // (g) chi-square quantile.
  c.expect(std::abs(chi2_quantile(2, 0.95) + 2.0 * std::log(0.05)) < 1e-8, "(g) chi2 quantile");
  return c;
}

Checks criterion_6() {
  Checks c;
  for (auto id : {BenchmarkId::O1, BenchmarkId::S1}) {
    const auto small = run_table1(base_config(id, 500));
    const auto large = run_table1(base_config(id, 2000));
    for (const char* q : {"A", "f_eps", "z", "g"}) {
      const double a = small.quantity(q)->mean;
      const double b = large.quantity(q)->mean;
      char buf[128];
      std::snprintf(buf, sizeof buf, "%s %s %.4f>%.4f", to_string(id).c_str(), q, a, b);
      c.expect(b < a, buf);
    }
  }
  return c;
}

const char* const kTitles[] = {
    "",
    "A_hat accuracy (O1)",
    "density errors (S1)",
    "Algorithm 1 coverage and length (S1, O1)",
    "Kalman baseline (S1)",
    "property suite",
    "convergence trends (O1, S1)",
};

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: acceptance <criterion 1-6>\n";
    return 2;
  }
  const int which = std::atoi(argv[1]);
  const std::function<Checks()> runners[] = {criterion_1, criterion_2, criterion_3,
                                             criterion_4, criterion_5, criterion_6};
  if (which < 1 || which > 6) {
    std::cerr << "acceptance: criterion must be 1..6\n";
    return 2;
  }
  const auto start = std::chrono::steady_clock::now();
  Checks result;
  try {
    result = runners[which - 1]();
  } catch (const std::exception& e) {
    result.ok = false;
    result.detail << " error: " << e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%s criterion %d: %s |%s | %.1fs\n", result.ok ? "PASS" : "FAIL", which, kTitles[which],
              result.detail.str().c_str(), secs);
  return result.ok ? 0 : 1;
}
