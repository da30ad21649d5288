#include <benchmark/benchmark.h>

#include "bmf/forge.hpp"
#include "bmf/linalg.hpp"
#include "bmf/objective.hpp"
#include "bmf/trace_bounds.hpp"

namespace {

using namespace bmf;

void BM_FullSvd(benchmark::State& st) {
  const auto k = static_cast<Eigen::Index>(st.range(0));
  const Mat X = random_orthogonal(k, 1) * Mat::Identity(k, k) + Mat::Constant(k, k, 0.1);
  for (auto _ : st) benchmark::DoNotOptimize(full_svd(X));
}
BENCHMARK(BM_FullSvd)->Arg(4)->Arg(16)->Arg(64);

void BM_PermutationPairing(benchmark::State& st) {
  const auto m = static_cast<Eigen::Index>(st.range(0));
  const Vec a = Vec::LinSpaced(m, 1.0, 2.0), b = Vec::LinSpaced(m, 3.0, 0.5);
  const Vec c = Vec::LinSpaced(m, 0.0, 1.0), d = Vec::LinSpaced(m, 2.0, 1.0);
  for (auto _ : st) benchmark::DoNotOptimize(max_permutation_pairing(a, b, c, d));
}
BENCHMARK(BM_PermutationPairing)->Arg(4)->Arg(16)->Arg(64);

void BM_HessMatrixFr(benchmark::State& st) {
  const int m = static_cast<int>(st.range(0));
  const RegimeParams p{m, m, 1, 1, 4.0, 1.0, 1.0};
  const auto inst = forge(p);
  for (auto _ : st) benchmark::DoNotOptimize(hess_matrix_Fr(inst.h, p.lambda, inst.pair));
}
BENCHMARK(BM_HessMatrixFr)->Arg(3)->Arg(6);

void BM_ForgeAndVerify(benchmark::State& st) {
  const int m = static_cast<int>(st.range(0));
  const RegimeParams p{m, m, 1, 1, 4.0, 1.0, 1.0};
  for (auto _ : st) {
    const auto inst = forge(p);
    benchmark::DoNotOptimize(verify_counterexample(inst));
  }
}
BENCHMARK(BM_ForgeAndVerify)->Arg(3)->Arg(6);

}  // namespace

BENCHMARK_MAIN();
