// Parallel kernels against their serial references.
// Run with OMP_NUM_THREADS to pick the thread count.
#include <benchmark/benchmark.h>

#include "rcdt/data.hpp"
#include "rcdt/radon.hpp"
#include "rcdt/rcdt.hpp"
#include "rcdt/subspace.hpp"

namespace {

using namespace rcdt;

const LabeledDataset& samples() {
  static const LabeledDataset data = [] {
    DeformationSpec spec;
    spec.max_translation = 4.0;
    spec.scale_min = 0.9;
    spec.scale_max = 1.1;
    spec.count = 32;
    spec.seed = 1;
    return generate_synthetic(default_templates(), spec);
  }();
  return data;
}

const TransformConfig kConfig{60, 0, 0};

void BM_RadonParallel(benchmark::State& state) {
  const Image& im = samples().images[0];
  const AngleGrid grid = AngleGrid::uniform(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(radon_forward(im, grid));
}
BENCHMARK(BM_RadonParallel)->Arg(60)->Arg(180);

void BM_RadonSerial(benchmark::State& state) {
  const Image& im = samples().images[0];
  const AngleGrid grid = AngleGrid::uniform(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(radon_forward_serial(im, grid));
}
BENCHMARK(BM_RadonSerial)->Arg(60)->Arg(180);

void BM_RcdtBatch(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(rcdt_forward_batch(samples().images, kConfig));
  state.SetItemsProcessed(state.iterations() * samples().size());
}
BENCHMARK(BM_RcdtBatch)->Unit(benchmark::kMillisecond);

void BM_RcdtBatchSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(rcdt_forward_batch_serial(samples().images, kConfig));
  state.SetItemsProcessed(state.iterations() * samples().size());
}
BENCHMARK(BM_RcdtBatchSerial)->Unit(benchmark::kMillisecond);

struct Fitted {
  std::vector<RcdtVector> vectors;
  std::vector<SubspaceBasis> bases;
};

const Fitted& fitted() {
  static const Fitted f = [] {
    Fitted out;
    out.vectors = rcdt_forward_batch(samples().images, kConfig);
    for (std::size_t k = 0; k < 4; ++k) {
      const auto first = out.vectors.begin() + static_cast<std::ptrdiff_t>(k * 32);
      out.bases.push_back(fit_subspace(std::vector<RcdtVector>(first, first + 24)));
    }
    return out;
  }();
  return f;
}

void BM_DistanceMatrix(benchmark::State& state) {
  const Fitted& f = fitted();
  for (auto _ : state) benchmark::DoNotOptimize(distance_matrix(f.vectors, f.bases));
}
BENCHMARK(BM_DistanceMatrix);

void BM_DistanceMatrixSerial(benchmark::State& state) {
  const Fitted& f = fitted();
  for (auto _ : state) benchmark::DoNotOptimize(distance_matrix_serial(f.vectors, f.bases));
}
BENCHMARK(BM_DistanceMatrixSerial);

}  // namespace

BENCHMARK_MAIN();
