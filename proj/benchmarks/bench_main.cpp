#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "tipcast/bifurcation.hpp"
#include "tipcast/ews.hpp"
#include "tipcast/integrate.hpp"
#include "tipcast/models.hpp"
#include "tipcast/preprocess.hpp"

using namespace tipcast;

namespace {

std::vector<double> ar1(double phi, std::size_t n) {
  Rng rng = make_rng(1, {});
  std::normal_distribution<double> nd;
  std::vector<double> x(n);
  double v = 0.0;
  for (auto& e : x) e = v = phi * v + nd(rng);
  return x;
}

void BM_EulerMay(benchmark::State& state) {
  const NamedModel may(ModelId::may_fold);
  const StateVector x0 = model_equilibrium(may, make_state({0.9}), 0.0);
  const DynamicalSystem sys(may);
  for (auto _ : state) {
    RunOptions o;
    o.steps = 10000;
    o.record_stride = 10000;
    benchmark::DoNotOptimize(euler_run(sys, x0, RampSpec::fixed(0.1), 0.01, o));
  }
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_EulerMay);

void BM_EulerPolynomial(benchmark::State& state) {
  PolynomialSystem2D poly;
  poly.a = {0.0, -1.0, 0.5, 0, 0, 0, -1.0, 0, 0, 0};
  poly.b = {0.0, 0.3, -1.0, 0, 0, 0, 0, 0, 0, -1.0};
  const DynamicalSystem sys(poly);
  for (auto _ : state) {
    RunOptions o;
    o.steps = 10000;
    o.record_stride = 10000;
    benchmark::DoNotOptimize(euler_run(sys, make_state({0.1, 0.1}), RampSpec::fixed(0.0), 0.01, o));
  }
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_EulerPolynomial);

void BM_EulerMayNoisy(benchmark::State& state) {
  const NamedModel may(ModelId::may_fold);
  const StateVector x0 = model_equilibrium(may, make_state({0.9}), 0.0);
  const DynamicalSystem sys(may);
  for (auto _ : state) {
    Rng rng = make_rng(1, {});
    RunOptions o;
    o.steps = 10000;
    o.record_stride = 10;
    benchmark::DoNotOptimize(
        euler_maruyama_run(sys, x0, RampSpec::fixed(0.1), NoiseSpec{NoiseKind::white, 0.01, 0.0}, 0.01, rng, o));
  }
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_EulerMayNoisy);

void BM_Lowess(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = ar1(0.5, n);
  std::vector<double> pos(n);
  for (std::size_t i = 0; i < n; ++i) pos[i] = static_cast<double>(i);
  for (auto _ : state) benchmark::DoNotOptimize(lowess_detrend(x, pos, 0.2));
}
BENCHMARK(BM_Lowess)->Arg(250)->Arg(500);

void BM_Dev(benchmark::State& state) {
  const auto x = ar1(0.9, 250);
  const SmapConfig cfg{3, 1, static_cast<double>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(dev(x, cfg));
}
BENCHMARK(BM_Dev)->Arg(0)->Arg(2);

void BM_Bb(benchmark::State& state) {
  const auto x = ar1(0.9, 250);
  for (auto _ : state) benchmark::DoNotOptimize(bb_estimate(x));
}
BENCHMARK(BM_Bb);

void BM_ContinuationMay(benchmark::State& state) {
  const NamedModel may(ModelId::may_fold);
  const StateVector x0 = model_equilibrium(may, make_state({0.9}), 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(continue_branch(may, x0, 0.0, 0.4));
}
BENCHMARK(BM_ContinuationMay);

}  // namespace

BENCHMARK_MAIN();
