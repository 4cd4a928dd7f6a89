#include <benchmark/benchmark.h>

#include "specprec/kernel.hpp"
#include "specprec/precond.hpp"
#include "specprec/random.hpp"
#include "specprec/solvers.hpp"
#include "specprec/verify.hpp"

using namespace specprec;

namespace {

PointSet points(Index n) {
  SyntheticDistribution d = TrialConfig::default_distribution();
  d.seed = 1;
  return d.sample(n);
}

const KernelSpec kKernel = KernelSpec::gaussian(0.5);

void BM_Gram(benchmark::State& state) {
  const PointSet x = points(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gram(kKernel, x));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Gram)->RangeMultiplier(2)->Range(250, 2000)->Unit(benchmark::kMillisecond)->Complexity();

void BM_BuildNystrom(benchmark::State& state) {
  const Index s = state.range(0);
  const PointSet x = points(4000);
  const NystromSample sample = nystrom_sample(x.rows(), s, SamplingPolicy::uniform, 3);
  for (auto _ : state) benchmark::DoNotOptimize(build_nystrom(kKernel, x, sample, 10));
  state.SetComplexityN(s);
}
BENCHMARK(BM_BuildNystrom)->RangeMultiplier(2)->Range(400, 3200)->Unit(benchmark::kMillisecond)->Complexity();

void BM_BuildExact(benchmark::State& state) {
  const GramMatrix g = gram(kKernel, points(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_exact(g, 10));
}
BENCHMARK(BM_BuildExact)->Arg(500)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

// One preconditioner application with the |base| x n cross Gram.
void BM_ApplyNystrom(benchmark::State& state) {
  const Index n = 2000, s = state.range(0);
  const PointSet x = points(n);
  const SpectralPreconditioner p = build_nystrom(kKernel, x, nystrom_sample(n, s, SamplingPolicy::uniform, 4), 10);
  const Matrix cross = base_cross_gram(p, kKernel, x);
  Rng rng(5);
  const Vector v = gaussian_vector(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(p.apply(v, cross));
}
BENCHMARK(BM_ApplyNystrom)->Arg(200)->Arg(800)->Arg(2000);

void BM_ApplyExact(benchmark::State& state) {
  const GramMatrix g = gram(kKernel, points(state.range(0)));
  const SpectralPreconditioner p = build_exact(g, 10);
  Rng rng(6);
  const Vector v = gaussian_vector(g.size(), rng);
  for (auto _ : state) benchmark::DoNotOptimize(p.apply(v));
}
BENCHMARK(BM_ApplyExact)->Arg(1000)->Arg(2000);

void BM_Gradient(benchmark::State& state) {
  const Index n = state.range(0);
  const GramMatrix g = gram(kKernel, points(n));
  Rng rng(7);
  const Vector a = gaussian_vector(n, rng), y = gaussian_vector(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(gradient(g.values(), a, y));
}
BENCHMARK(BM_Gradient)->Arg(1000)->Arg(2000);

}  // namespace

BENCHMARK_MAIN();
