// Copyright 2026 The mattrib Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serial reference vs OpenMP kernels.

#include <numeric>
#include <vector>

#include "benchmark/benchmark.h"
#include "mattrib/datagen.h"
#include "mattrib/graphgen.h"
#include "mattrib/kernels.h"
#include "mattrib/strategy.h"

namespace mattrib {
namespace {

struct Fixture {
  Hypergraph graph;
  RegressionDataset data;
  std::vector<EdgeId> all;
  Model model;
};

const Fixture& Shared() {
  static const Fixture* f = [] {
    auto* fx = new Fixture;
    GraphGenSpec spec;
    spec.num_edges = 50000;
    spec.seed = 3;
    fx->graph = *GenerateRegular(spec);
    RegressionSpec rs;
    rs.seed = 4;
    fx->data = *GenerateRegression(fx->graph, rs);
    fx->all.resize(fx->data.num_examples());
    std::iota(fx->all.begin(), fx->all.end(), 0);
    fx->model = Model(fx->data.dim);
    for (size_t j = 0; j < fx->data.dim; ++j) fx->model.weights[j] = 0.01 * j;
    return fx;
  }();
  return *f;
}

void BM_GradientSerial(benchmark::State& state) {
  const Fixture& f = Shared();
  std::span<const EdgeId> batch(f.all.data(), state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ClippedGradientSumSerial(f.model, f.data, batch, 1.0));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GradientSerial)->Arg(1024)->Arg(16384);

void BM_GradientParallel(benchmark::State& state) {
  const Fixture& f = Shared();
  std::span<const EdgeId> batch(f.all.data(), state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        ClippedGradientSumParallel(f.model, f.data, batch, 1.0));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GradientParallel)->Arg(1024)->Arg(16384);

void BM_EvaluateSerial(benchmark::State& state) {
  const Fixture& f = Shared();
  for (auto _ : state) {
    benchmark::DoNotOptimize(EvaluateSerial(f.model, f.data, f.all));
  }
}
BENCHMARK(BM_EvaluateSerial);

void BM_EvaluateParallel(benchmark::State& state) {
  const Fixture& f = Shared();
  for (auto _ : state) {
    benchmark::DoNotOptimize(EvaluateParallel(f.model, f.data, f.all));
  }
}
BENCHMARK(BM_EvaluateParallel);

StrategyMatrix BenchStrategy(size_t steps) {
  const double first[] = {1.0, 0.5, 0.3, 0.2};
  return StrategyMatrix::NormalizedToeplitz(steps, first);
}

void BM_FactorizationErrorSerial(benchmark::State& state) {
  const StrategyMatrix c = BenchStrategy(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(FactorizationErrorSerial(c));
}
BENCHMARK(BM_FactorizationErrorSerial)->Arg(256)->Arg(1024);

void BM_FactorizationErrorParallel(benchmark::State& state) {
  const StrategyMatrix c = BenchStrategy(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(FactorizationErrorParallel(c));
}
BENCHMARK(BM_FactorizationErrorParallel)->Arg(256)->Arg(1024);

void BM_GenerateRegularSerial(benchmark::State& state) {
  GraphGenSpec spec;
  spec.num_edges = state.range(0);
  const size_t m = *DerivedUserCount(spec);
  for (auto _ : state) benchmark::DoNotOptimize(GenerateRegularSerial(spec, m));
}
BENCHMARK(BM_GenerateRegularSerial)->Arg(100000);

void BM_GenerateRegularParallel(benchmark::State& state) {
  GraphGenSpec spec;
  spec.num_edges = state.range(0);
  const size_t m = *DerivedUserCount(spec);
  for (auto _ : state) benchmark::DoNotOptimize(GenerateRegularParallel(spec, m));
}
BENCHMARK(BM_GenerateRegularParallel)->Arg(100000);

}  // namespace
}  // namespace mattrib

BENCHMARK_MAIN();
