#include "dntk/distill.hpp"
#include "dntk/kernel.hpp"
#include "dntk/krr.hpp"
#include "dntk/sketch.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace dntk;

namespace {

Matrix gaussian(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

GradientFeatures features(Index n, Index d, Index c) {
  GradientFeatures f;
  f.dim_kind = DimKind::Sketched;
  for (Index k = 0; k < c; ++k) f.per_class.push_back(gaussian(n, d, 10 + static_cast<std::uint64_t>(k)));
  f.labels = gaussian(n, c, 1);
  f.model_logits = f.labels;
  return f;
}

void BM_KernelStack(benchmark::State& state) {
  const GradientFeatures f = features(state.range(0), 256, 10);
  for (auto _ : state) benchmark::DoNotOptimize(kernel::build_stack(f, ScaleKind::InvK));
}
BENCHMARK(BM_KernelStack)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_SketchSample(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(sketch::sample_orthonormal(state.range(0), 256, 3));
}
BENCHMARK(BM_SketchSample)->Arg(2000)->Arg(9000)->Unit(benchmark::kMillisecond);

void BM_SketchApply(benchmark::State& state) {
  const auto op = sketch::sample_orthonormal(9000, 256, 3);
  const Matrix rows = gaussian(state.range(0), 9000, 4);
  for (auto _ : state) benchmark::DoNotOptimize(op.apply_rows(rows));
}
BENCHMARK(BM_SketchApply)->Arg(64)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_Distill(benchmark::State& state) {
  const GradientFeatures f = features(state.range(0), 256, 10);
  distill::DistillOptions o;
  o.clusters = 10;
  for (auto _ : state) benchmark::DoNotOptimize(distill::distill(f, o));
}
BENCHMARK(BM_Distill)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_KrrFit(benchmark::State& state) {
  const GradientFeatures f = features(state.range(0), 256, 10);
  for (auto _ : state) benchmark::DoNotOptimize(krr::fit(f));
}
BENCHMARK(BM_KrrFit)->Arg(50)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_KrrPredict(benchmark::State& state) {
  const auto model = krr::fit(features(50, 256, 10));
  const GradientFeatures test = features(state.range(0), 256, 10);
  for (auto _ : state) benchmark::DoNotOptimize(krr::predict(model, test));
}
BENCHMARK(BM_KrrPredict)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
