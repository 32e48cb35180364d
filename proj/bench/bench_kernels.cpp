// Serial versus OpenMP timings for the parallel kernels.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "stiction/labeling.hpp"
#include "stiction/models.hpp"
#include "stiction/nn/network.hpp"
#include "stiction/svm.hpp"

using namespace stiction;

namespace {

ExecutionPolicy policy_of(const benchmark::State& state) {
  return state.range(0) ? ExecutionPolicy::parallel : ExecutionPolicy::serial;
}

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (auto& x : v) x = nd(gen);
  return v;
}

void BM_BatchGradient(benchmark::State& state) {
  const auto kind = state.range(1) ? ModelKind::lstm : ModelKind::cnn;
  const auto net = build(ArchitectureSpec::defaults(kind), 24, 1);
  const std::size_t batch_size = 32, width = 48;
  std::vector<std::vector<double>> storage;
  nn::Batch batch;
  for (std::size_t i = 0; i < batch_size; ++i) storage.push_back(normals(width, i + 1));
  for (std::size_t i = 0; i < batch_size; ++i) {
    batch.inputs.emplace_back(storage[i]);
    batch.labels.push_back(static_cast<int>(i % 2));
  }
  std::vector<double> grad(net.param_count());
  for (auto _ : state) benchmark::DoNotOptimize(nn::batch_gradient(net, batch, 1.0, grad, policy_of(state)));
  state.SetLabel(kind == ModelKind::lstm ? "lstm" : "cnn");
}
BENCHMARK(BM_BatchGradient)->ArgsProduct({{0, 1}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_SlopeRatioWindows(benchmark::State& state) {
  const std::size_t minutes = 30 * 1440;
  const auto series = UniformSeries::dense(make_minute(2024, 1, 1), normals(minutes, 2), normals(minutes, 3));
  const SlopeRatioConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(slope_ratio_windows(series, cfg, policy_of(state)));
}
BENCHMARK(BM_SlopeRatioWindows)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_RbfKernelRow(benchmark::State& state) {
  const std::size_t rows = 4000, dim = 32;
  const auto x = normals(rows * dim, 4);
  std::vector<double> out(rows);
  std::size_t i = 0;
  for (auto _ : state) {
    rbf_kernel_row(x, dim, i, 0.05, out, policy_of(state));
    benchmark::DoNotOptimize(out.data());
    i = (i + 1) % rows;
  }
}
BENCHMARK(BM_RbfKernelRow)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
