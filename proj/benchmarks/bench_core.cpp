#include <benchmark/benchmark.h>

#include <numbers>

#include "neuronlab/objective.hpp"
#include "neuronlab/optimize.hpp"
#include "neuronlab/theory.hpp"

using namespace neuronlab;

static Problem gaussian_relu(int d) {
  return Problem(InputDistribution::standard_gaussian(d), make_relu(), Vector::Unit(d, 0));
}

static void BM_GradientMc(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const Problem p = gaussian_relu(d);
  const Vector w = Vector::Constant(d, 0.3);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(population_gradient_mc(p, w, 10000, ++seed));
  }
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_GradientMc)->Arg(2)->Arg(5)->Arg(20);

static void BM_GradientClosedForm(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const Vector v = Vector::Unit(d, 0);
  const Vector w = Vector::Constant(d, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(gradient_closed_form_gaussian_relu(w, v));
}
BENCHMARK(BM_GradientClosedForm)->Arg(5)->Arg(20);

static void BM_SgdSteps(benchmark::State& state) {
  const Problem p = gaussian_relu(5);
  OptimizerConfig c;
  c.method = Method::kSgd;
  c.step_size = 0.01;
  c.iterations = state.range(0);
  c.record_stride = state.range(0);
  const Vector w0 = Vector::Constant(5, 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(run_sgd(p, w0, c, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SgdSteps)->Arg(10000);

static void BM_GradientFlow(benchmark::State& state) {
  const Problem p = gaussian_relu(3);
  OptimizerConfig c;
  c.method = Method::kGradientFlow;
  c.t_max = 20;
  const Vector w0 = -0.5 * Vector::Unit(3, 0) + 0.4 * Vector::Unit(3, 1);
  for (auto _ : state) benchmark::DoNotOptimize(run_gradient_flow(p, w0, c));
}
BENCHMARK(BM_GradientFlow);

static void BM_PieSlice(benchmark::State& state) {
  const Eigen::Vector2d u(0.6, 0.8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pie_slice_integral(1.0, std::numbers::pi / 2, u));
  }
}
BENCHMARK(BM_PieSlice);
BENCHMARK_MAIN();
