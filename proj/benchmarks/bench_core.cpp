#include <benchmark/benchmark.h>

#include <vector>

#include "cosymlab/catalog.hpp"
#include "cosymlab/forms.hpp"
#include "cosymlab/section.hpp"
#include "cosymlab/tischler.hpp"

using namespace cosymlab;

static void BM_Flow(benchmark::State& state) {
  const auto e = catalog_system("oscillator2");
  SampleRng rng(1);
  const Point p = ambient_samples(e, rng, 1).front();
  const double t = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(flow(e.system, p, t).end);
}
BENCHMARK(BM_Flow)->Arg(1)->Arg(10)->Arg(100);

static void BM_FirstReturn(benchmark::State& state) {
  const auto e = catalog_system(state.range(0) == 0 ? "product_T3" : "oscillator2");
  SampleRng rng(2);
  const Point p = section_samples(e, rng, 1).front();
  for (auto _ : state) benchmark::DoNotOptimize(first_return(e.system, *e.section, p).return_time);
}
BENCHMARK(BM_FirstReturn)->Arg(0)->Arg(1);

static void BM_ReturnMapJacobian(benchmark::State& state) {
  const auto e = catalog_system("oscillator2");
  SampleRng rng(3);
  const Point p = section_samples(e, rng, 1).front();
  for (auto _ : state) benchmark::DoNotOptimize(return_map_jacobian(e.system, *e.section, p));
}
BENCHMARK(BM_ReturnMapJacobian);

static void BM_WedgeEvaluate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  KForm omega = KForm::basis(n, {0, 1});
  for (int i = 2; i + 1 < n; i += 2) omega = omega + KForm::basis(n, {i, i + 1});
  const KForm top = power(omega, n / 2);
  const Point p(Vector(Vector::Zero(n)));
  std::vector<TangentVector> frame;
  for (int i = 0; i < n; ++i) frame.push_back({p, Vector::Unit(n, i)});
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(wedge(omega, omega), {frame.data(), 4}) + evaluate(top, frame));
}
BENCHMARK(BM_WedgeEvaluate)->Arg(4)->Arg(6)->Arg(8);

static void BM_Rationalize(benchmark::State& state) {
  PeriodVector pv;
  pv.values = {1.0, kSqrt2, 0.5772156649015329};
  const double eps = state.range(0) == 2 ? 1e-2 : 1e-4;
  for (auto _ : state) benchmark::DoNotOptimize(rationalize(pv, eps, 100'000).d);
}
BENCHMARK(BM_Rationalize)->Arg(2)->Arg(4);
BENCHMARK_MAIN();
