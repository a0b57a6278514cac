#include <benchmark/benchmark.h>

#include <memory>

#include "ssdeconv/estimation.hpp"
#include "ssdeconv/harness.hpp"
#include "ssdeconv/prediction.hpp"
#include "ssdeconv/tabulated.hpp"

using namespace ssdeconv;

namespace {

struct Fixture {
  BenchmarkModel model = BenchmarkModel::make(BenchmarkId::O1);
  SimulatedSeries sim = generate_series(model.spec, 500, 1);
  Matrix a_hat = estimate_A(sim.y, model.spec.B);
  std::shared_ptr<const FourierNodes> nodes =
      std::make_shared<const FourierNodes>(build_fourier_nodes(std::pow(500.0, -0.125), 2.0, 10000, 1, 2));
  DensityEstimate est = fit_noise_density(sim.y, model.spec.B, a_hat, model.spec.eta, KernelSpec::flat_top(), nodes);
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_EstimateA(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(estimate_A(f.sim.y, f.model.spec.B));
}
BENCHMARK(BM_EstimateA);

void BM_FitNoiseDensity(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(
        fit_noise_density(f.sim.y, f.model.spec.B, f.a_hat, f.model.spec.eta, KernelSpec::flat_top(), f.nodes));
}
BENCHMARK(BM_FitNoiseDensity)->Unit(benchmark::kMillisecond);

void BM_EvalDensity(benchmark::State& state) {
  const auto& f = fixture();
  double x = 0.3;
  for (auto _ : state) benchmark::DoNotOptimize(f.est(std::span<const double>(&x, 1)));
}
BENCHMARK(BM_EvalDensity)->Unit(benchmark::kMicrosecond);

void BM_Tabulate(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(fast_density(f.est, 8.0));
}
BENCHMARK(BM_Tabulate)->Unit(benchmark::kMillisecond);

void BM_TabulatedEval(benchmark::State& state) {
  const auto fn = fast_density(fixture().est, 8.0);
  double x = 0.3;
  for (auto _ : state) benchmark::DoNotOptimize(fn(std::span<const double>(&x, 1)));
}
BENCHMARK(BM_TabulatedEval);

void BM_OpN(benchmark::State& state) {
  const auto& f = fixture();
  const auto fn = fast_density(f.est, 8.0);
  MCBudget b;
  b.draws = state.range(0);
  b.seed = 3;
  const StateRootCdf n(fn, f.a_hat, f.model.spec.B, PredictionDraws::generate(f.model.spec.eta, b));
  for (auto _ : state) benchmark::DoNotOptimize(n.raw(2.0));
}
BENCHMARK(BM_OpN)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
