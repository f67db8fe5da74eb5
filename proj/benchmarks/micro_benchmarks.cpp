#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "hkl/engine.hpp"
#include "hkl/harness/synthetic.hpp"

using namespace hkl;

namespace {

Matrix gaussian(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix x(n, p);
  for (auto& v : x.reshaped()) v = g(rng);
  return x;
}

void BM_NodeGram(benchmark::State& state) {
  const auto n = state.range(0);
  const KernelAtlas atlas(gaussian(n, 8, 1), KernelFamily(KernelKind::hermite, {}, 8));
  const Label v{1, 2, 0, 0, 3, 0, 0, 1};
  for (auto _ : state) benchmark::DoNotOptimize(atlas.node_gram(v));
}
BENCHMARK(BM_NodeGram)->Arg(100)->Arg(400);

void BM_SufficientQuadform(benchmark::State& state) {
  const auto n = state.range(0);
  auto atlas = std::make_shared<const KernelAtlas>(gaussian(n, 16, 2), KernelFamily(KernelKind::hermite, {}, 16));
  const GridKernelSource src(atlas, WeightScheme{});
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Vector alpha(n);
  for (auto& a : alpha) a = g(rng);
  Label t(16, 0);
  t[3] = 1;
  t[7] = 1;
  src.sufficient_quadform(t, alpha);  // fill the caches
  for (auto _ : state) benchmark::DoNotOptimize(src.sufficient_quadform(t, alpha));
}
BENCHMARK(BM_SufficientQuadform)->Arg(100)->Arg(400);

void BM_MinimizeB(benchmark::State& state) {
  const Eigen::Index n = 100;
  const auto m = static_cast<std::size_t>(state.range(0));
  std::vector<std::vector<std::size_t>> parents(m);
  for (std::size_t i = 1; i < m; ++i) parents[i] = {(i - 1) / 2};
  Vector d(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) d[static_cast<Eigen::Index>(i)] = std::pow(2.0, std::log2(i + 1.0));
  const ReducedDag dag = ReducedDag::from_parents(parents, d);
  std::vector<Matrix> grams;
  std::vector<const Matrix*> ptrs;
  for (std::size_t i = 0; i < m; ++i) {
    const Matrix f = gaussian(n, 3, 10 + i);
    grams.push_back(center(f * f.transpose()));
  }
  for (const Matrix& k : grams) ptrs.push_back(&k);
  const Vector y = gaussian(n, 1, 99).col(0);
  WeightSolverOptions opt;
  opt.tol = 1e-4;
  for (auto _ : state) benchmark::DoNotOptimize(minimize_B(dag, ptrs, y, 0.01, Loss(), opt));
}
BENCHMARK(BM_MinimizeB)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Fit(benchmark::State& state) {
  harness::SyntheticSpec spec;
  spec.p = static_cast<int>(state.range(0));
  spec.n = 200;
  const harness::SyntheticData data = harness::gen_synthetic(spec);
  FitConfig c;
  c.lambda = 1e-2;
  for (auto _ : state) benchmark::DoNotOptimize(fit(data.x, data.y, c));
}
BENCHMARK(BM_Fit)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace
