#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "ssdeconv/error.hpp"
#include "ssdeconv/harness.hpp"
#include "support.hpp"

using namespace ssdeconv;
using ssdeconv::test::at;
using ssdeconv::test::normal_pdf;

namespace {

ExperimentConfig small_config(BenchmarkId id) {
  ExperimentConfig c;
  c.model = id;
  c.n = 300;
  c.replicates = 4;
  c.nodes = 2000;
  c.mc_draws = 5000;
  c.t2_samples = 4000;
  c.conv_draws = 2000;
  c.truth_draws = 4000;
  c.burn_in = 200;
  c.threads = 1;
  return c;
}

double sample_variance(const Eigen::VectorXd& v) {
  const double m = v.mean();
  return (v.array() - m).square().mean();
}

}  // namespace

TEST_CASE("benchmark model constants") {
  const auto o1 = BenchmarkModel::make(BenchmarkId::O1);
  CHECK(o1.spec.A(0, 0) == 0.8);
  CHECK(std::abs(o1.spec.eps.covariance()(0, 0) - 1.0) < 1e-12);
  CHECK(std::abs(o1.spec.eta.covariance()(0, 0) - 1.0) < 1e-12);
  CHECK_FALSE(o1.state_density_known());
  CHECK(std::holds_alternative<SmoothnessRegime>(o1.policy));
  const auto s2 = BenchmarkModel::make(BenchmarkId::S2);
  CHECK(s2.spec.dimension() == 2);
  CHECK(s2.spec.A(0, 1) == -0.25);
  CHECK(s2.spec.B(1, 0) == 0.5);
  CHECK(s2.state_density_known());
  CHECK(s2.spec.A.eigenvalues().array().abs().maxCoeff() < 1.0);
  const auto o2 = BenchmarkModel::make(BenchmarkId::O2);
  CHECK((o2.spec.eps.covariance() - s2.spec.eps.covariance()).norm() < 1e-12);
  CHECK(BenchmarkModel::parse("s2").id == BenchmarkId::S2);
  CHECK(BenchmarkModel::parse("O1").name() == "O1");
  CHECK_THROWS_AS(BenchmarkModel::parse("X9"), UsageError);
}

TEST_CASE("simulated series shapes and moments") {
  const auto spec = BenchmarkModel::make(BenchmarkId::S1).spec;
  const auto sim = generate_series(spec, 100000, 17);
  CHECK(sim.y.length() == 100000);
  CHECK(sim.states.rows() == 100000);
  CHECK(sim.next_state.size() == 1);
  CHECK(sim.next_observation.size() == 1);
  const Eigen::VectorXd x = sim.states.col(0);
  const Eigen::VectorXd y = sim.y.values().col(0);
  const double m = x.mean();
  const double lag = ((x.head(x.size() - 1).array() - m) * (x.tail(x.size() - 1).array() - m)).mean();
  CHECK(std::abs(lag / sample_variance(x) - 0.8) < 0.01);
  CHECK(std::abs(sample_variance(y) / (1.0 / 0.36 + 1.0) - 1.0) < 0.02);

  const auto s2 = generate_series(BenchmarkModel::make(BenchmarkId::O2).spec, 50, 3);
  CHECK(s2.y.dimension() == 2);
  CHECK(s2.states.cols() == 2);
  // Y_n = B X_n + eta_n, so the residual sits on the noise scale.
  CHECK((s2.y.values() - s2.states * BenchmarkModel::make(BenchmarkId::O2).spec.B.transpose()).norm() > 0.0);
}

TEST_CASE("zero burn-in starts at the origin and seeds are deterministic") {
  const auto spec = BenchmarkModel::make(BenchmarkId::S2).spec;
  const auto sim = generate_series(spec, 10, 5, 0);
  CHECK(sim.states.row(0).norm() == 0.0);
  const auto again = generate_series(spec, 10, 5, 0);
  CHECK((again.y.values() - sim.y.values()).norm() == 0.0);
  const auto other = generate_series(spec, 10, 6, 0);
  CHECK((other.y.values() - sim.y.values()).norm() > 0.0);
  CHECK_THROWS_AS(generate_series(spec, 2, 1), DataError);
  CHECK_THROWS_AS(generate_series(spec, 10, 1, -1), UsageError);
}

TEST_CASE("T2 norm") {
  const DensityFn f = [](std::span<const double> x) { return normal_pdf(x[0]); };
  const DensityFn g = [](std::span<const double> x) { return normal_pdf(x[0] - 0.5); };
  const DensityFn c = [](std::span<const double>) { return 0.1; };
  const DensityFn zero = [](std::span<const double>) { return 0.0; };
  CHECK(t2_norm_diff(f, f, 0.5, 1, 1000, 1) == 0.0);
  CHECK(std::abs(t2_norm_diff(c, zero, 0.5, 1, 1000, 1) - 0.2) < 1e-12);
  CHECK(std::abs(t2_norm_diff(c, zero, 0.5, 2, 1000, 1) - 0.4) < 1e-12);
  const double exact = std::sqrt(ssdeconv::test::simpson(
      [](double x) { return std::pow(normal_pdf(x) - normal_pdf(x - 0.5), 2); }, -2.0, 2.0, 2000));
  CHECK(std::abs(t2_norm_diff(f, g, 0.5, 1, 400000, 3) / exact - 1.0) < 0.01);
  CHECK_THROWS_AS(t2_norm_diff(f, g, 0.0, 1, 10, 1), UsageError);
}

TEST_CASE("convolved densities match the Gaussian closed forms") {
  const auto model = BenchmarkModel::make(BenchmarkId::S1);
  const auto& spec = model.spec;
  const DensityFn eps = [e = spec.eps](std::span<const double> x) { return e.density(x); };
  const ConvolvedDensity z(ConvolvedDensity::Kind::StatePredictive, eps, spec.A, spec.B, spec.eta, 200000, 4);
  const ConvolvedDensity g(ConvolvedDensity::Kind::ObsPredictive, eps, spec.A, spec.B, spec.eta, 200000, 4);
  const ExperimentConfig cfg;
  const DensityFn tz = truth_density(model, BandTarget::StatePredictive, cfg);
  const DensityFn tg = truth_density(model, BandTarget::ObsPredictive, cfg);
  for (double x : {-3.0, -1.0, 0.0, 0.7, 2.5}) {
    CHECK(std::abs(at(tz, x) - normal_pdf(x, 1.64)) < 1e-12);
    CHECK(std::abs(at(tg, x) - normal_pdf(x, 2.64)) < 1e-12);
    CHECK(std::abs(z(std::span<const double>(&x, 1)) - normal_pdf(x, 1.64)) < 3e-3);
    CHECK(std::abs(g(std::span<const double>(&x, 1)) - normal_pdf(x, 2.64)) < 3e-3);
    CHECK(conv_state_pred_density(eps, spec.A, spec.B, spec.eta, std::span<const double>(&x, 1), 200000, 4) ==
          z(std::span<const double>(&x, 1)));
  }
  const auto fx = truth_state_density(model);
  REQUIRE(fx.has_value());
  CHECK(std::abs(at(*fx, 0.3) - normal_pdf(0.3, 1.0 / 0.36)) < 1e-12);
  CHECK_FALSE(truth_state_density(BenchmarkModel::make(BenchmarkId::O1)).has_value());
}

TEST_CASE("two-dimensional Gaussian truth matches Monte Carlo convolution") {
  const auto model = BenchmarkModel::make(BenchmarkId::S2);
  const auto& spec = model.spec;
  const DensityFn eps = [e = spec.eps](std::span<const double> x) { return e.density(x); };
  const ConvolvedDensity g(ConvolvedDensity::Kind::ObsPredictive, eps, spec.A, spec.B, spec.eta, 200000, 9);
  const DensityFn tg = truth_density(model, BandTarget::ObsPredictive, ExperimentConfig{});
  for (const auto& p : {std::array<double, 2>{0.0, 0.0}, std::array<double, 2>{1.0, -0.5}}) {
    CHECK(std::abs(g(p) - tg(p)) < 2e-3);
  }
}

TEST_CASE("sample quantile, config validation and hash") {
  CHECK(sample_quantile({3.0, 1.0, 2.0, 4.0}, 0.5) == 2.5);
  CHECK(sample_quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.9) == doctest::Approx(4.6));
  CHECK(sample_quantile({7.0}, 0.9) == 7.0);
  ExperimentConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.hash().size() == 16);
  ExperimentConfig d = c;
  d.master_seed = 2;
  CHECK(d.hash() != c.hash());
  d = c;
  d.level = 1.0;
  CHECK_THROWS_AS(d.validate(), UsageError);
  d = c;
  d.replicates = 0;
  CHECK_THROWS_AS(d.validate(), UsageError);
  d = c;
  d.bandwidth = -1.0;
  CHECK_THROWS_AS(d.validate(), UsageError);
  d = c;
  d.bandwidth = 0.3;
  CHECK(d.bandwidth_for(BenchmarkModel::make(BenchmarkId::S1)) == 0.3);
  CHECK(c.bandwidth_for(BenchmarkModel::make(BenchmarkId::O1)) == doctest::Approx(std::pow(500.0, -0.125)));
}

TEST_CASE("parallel_for runs every index and rethrows the lowest failure") {
  std::vector<int> seen(50, 0);
  parallel_for(50, 4, [&](std::size_t i) { seen[i] += 1; });
  for (int v : seen) CHECK(v == 1);
  try {
    parallel_for(20, 4, [](std::size_t i) {
      if (i == 7 || i == 13) throw DataError("fail " + std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()) == "fail 7");
  }
  CHECK(effective_threads(3) >= 1);
}

TEST_CASE("table 1 is deterministic and thread-count independent") {
  auto c = small_config(BenchmarkId::S1);
  const auto a = run_table1(c);
  c.threads = 2;
  const auto b = run_table1(c);
  REQUIRE(a.errors.size() == 5);
  for (std::size_t k = 0; k < a.errors.size(); ++k) {
    CHECK(a.errors[k].quantity == b.errors[k].quantity);
    CHECK(a.errors[k].values == b.errors[k].values);
  }
  const std::string csv = a.to_csv();
  CHECK(csv.rfind("# config_hash=" + a.config.hash(), 0) == 0);
  CHECK(csv.find("\nmodel,n,replicates,h,A_mean,A_q90,fX_mean,fX_q90,feps_mean,feps_q90,z_mean,z_q90,g_mean,g_q90\n") !=
        std::string::npos);
  CHECK(a.quantity("f_X") != nullptr);
  CHECK(a.quantity("nope") == nullptr);
  for (const auto& q : a.errors) {
    CHECK(q.values.size() == 4);
    CHECK(q.mean > 0.0);
  }
  CHECK(a.to_json().find("\"values\"") != std::string::npos);
}

TEST_CASE("predictive density errors do not exceed the noise density error") {
  auto c = small_config(BenchmarkId::S1);
  c.n = 500;
  c.replicates = 8;
  c.nodes = 10000;
  c.t2_samples = 20000;
  c.conv_draws = 5000;
  c.threads = 0;
  const auto r = run_table1(c);
  CHECK(r.quantity("z")->mean <= r.quantity("f_eps")->mean);
  CHECK(r.quantity("g")->mean <= r.quantity("f_eps")->mean);
}

TEST_CASE("table 2 ranges and columns") {
  auto c = small_config(BenchmarkId::O1);
  c.threads = 0;
  const auto r = run_table2(c);
  REQUIRE(r.methods.size() == 2);
  const auto* alg = r.method("algorithm1");
  const auto* kal = r.method("kalman");
  REQUIRE(alg);
  REQUIRE(kal);
  for (int k = 0; k < 3; ++k) {
    CHECK(alg->coverage[k] >= 0.0);
    CHECK(alg->coverage[k] <= 1.0);
    CHECK(alg->mean_length[k] > 0.0);
    CHECK(kal->mean_length[k] > 0.0);
    CHECK(alg->hits[k].size() == 4);
  }
  // Lengths grow from the filter to the observation root.
  CHECK(alg->mean_length[0] < alg->mean_length[2]);
  CHECK(r.to_csv().find("\nmodel,n,replicates,method,cov_F,cov_PX,cov_PY,len_F,len_PX,len_PY\n") != std::string::npos);
}

TEST_CASE("replicate errors carry the replicate index") {
  auto c = small_config(BenchmarkId::S1);
  c.bandwidth = 0.05;
  try {
    run_table1(c);
    FAIL("expected an exception");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).rfind("replicate 0: ", 0) == 0);
  }
}

TEST_CASE("figure bands") {
  auto c = small_config(BenchmarkId::S1);
  c.replicates = 6;
  const auto t = figure1_bands(c, BandTarget::StateNoise, {1.0, -1.0, 0.0, 2.0});
  REQUIRE(t.grid.size() == 4);
  CHECK(t.grid.front() == -1.0);
  for (std::size_t i = 0; i < t.grid.size(); ++i) {
    CHECK(t.q05[i] <= t.q50[i]);
    CHECK(t.q50[i] <= t.q95[i]);
    CHECK(std::abs(t.truth[i] - normal_pdf(t.grid[i])) < 1e-12);
  }
  const std::string csv = t.to_csv();
  CHECK(csv.find("# target=f_eps\n") != std::string::npos);
  CHECK(csv.find("grid,truth,mean,q05,q95,q50\n") != std::string::npos);
  const auto z = figure1_bands(c, BandTarget::StatePredictive, {0.0});
  CHECK(std::abs(z.truth[0] - normal_pdf(0.0, 1.64)) < 1e-12);
  CHECK_THROWS_AS(figure1_bands(small_config(BenchmarkId::S2), BandTarget::StateNoise, {0.0}), UsageError);
}

TEST_CASE("Monte Carlo truth curves are cached on disk") {
  const auto dir = std::filesystem::temp_directory_path() / "ssdeconv_truth_cache_test";
  std::filesystem::remove_all(dir);
  ExperimentConfig c;
  c.truth_draws = 500;
  c.cache_dir = dir.string();
  const auto model = BenchmarkModel::make(BenchmarkId::O1);
  const DensityFn z = truth_density(model, BandTarget::StatePredictive, c);
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) files.push_back(e.path());
  REQUIRE(files.size() == 1);
  std::ifstream in(files[0]);
  std::string line;
  std::vector<double> values;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#' && line != "value") values.push_back(std::stod(line));
  REQUIRE(values.size() == 801);
  // Lattice [-8, 8] with step 0.02: index 400 is the origin.
  CHECK(std::abs(at(z, 0.0) - values[400]) < 1e-12);
  CHECK(std::abs(at(z, 1.0) - values[450]) < 1e-12);
  std::filesystem::remove_all(dir);
}

TEST_CASE("coverage sanity on all four models") {
  for (auto id : {BenchmarkId::S1, BenchmarkId::O1, BenchmarkId::S2, BenchmarkId::O2}) {
    auto c = small_config(id);
    c.n = 500;
    c.replicates = 40;
    c.nodes = 5000;
    c.mc_draws = 20000;
    c.threads = 0;
    const auto r = run_table2(c);
    for (const auto& m : r.methods) {
      for (int k = 0; k < 3; ++k) {
        const double p = m.coverage[k];
        const double sigma = std::sqrt(p * (1.0 - p) / c.replicates);
        INFO(to_string(id), " ", m.method, " kind ", k, " coverage ", p);
        CHECK(p + 3.0 * sigma >= 0.80);
      }
    }
  }
}
