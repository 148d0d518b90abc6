#include "biortheq/ensemble.hpp"
#include "biortheq/equilibrium.hpp"
#include "biortheq/fekete.hpp"
#include "biortheq/kernel.hpp"

#include <benchmark/benchmark.h>

#include <vector>

using namespace biortheq;

namespace {

GridPtr interval_grid(double a, double b, std::size_t n) {
  return std::make_shared<const GridSet>(build_grid(DomainSet::intervals({{a, b}}), n));
}

void BM_AssembleKernel(benchmark::State& state) {
  const auto g = interval_grid(0.5, 2.5, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(assemble_kernel_matrix(g, WeightSpec::monomial(1, 1), MapSpec::power(2)));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AssembleKernel)->RangeMultiplier(2)->Range(128, 1024)->Complexity(benchmark::oNSquared);

void BM_KernelMultiply(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto km = assemble_kernel_matrix(interval_grid(-1, 1, n), WeightSpec::zero(), MapSpec::identity());
  std::vector<double> w(n, 1.0 / static_cast<double>(n)), out(n);
  for (auto _ : state) {
    km.multiply(w, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * n * n * sizeof(double)));
}
BENCHMARK(BM_KernelMultiply)->RangeMultiplier(2)->Range(128, 2048);

void BM_MinimizeEnergy(benchmark::State& state) {
  const auto km = assemble_kernel_matrix(interval_grid(-1, 1, static_cast<std::size_t>(state.range(0))),
                                         WeightSpec::zero(), MapSpec::identity());
  for (auto _ : state) benchmark::DoNotOptimize(minimize_energy(km).V_w);
}
BENCHMARK(BM_MinimizeEnergy)->Arg(100)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_FeketeConfiguration(benchmark::State& state) {
  const auto g = build_grid(DomainSet::intervals({{-1, 1}}), 400);
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(fekete_configuration(g, k, WeightSpec::zero(), MapSpec::identity()));
}
BENCHMARK(BM_FeketeConfiguration)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_MetropolisStep(benchmark::State& state) {
  const auto nu = BaseMeasure::lebesgue(interval_grid(-1, 1, 400));
  MetropolisChain chain(nu, static_cast<int>(state.range(0)), WeightSpec::zero(), MapSpec::identity(), 1);
  for (auto _ : state) chain.step();
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MetropolisStep)->Arg(5)->Arg(20)->Arg(40);

}  // namespace

BENCHMARK_MAIN();
