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

#ifndef MATTRIB_KERNELS_H_
#define MATTRIB_KERNELS_H_

// Data-parallel inner loops. Every kernel has a serial reference and an
// OpenMP version; the pair produces bit-identical results for any thread
// count, because work is split into fixed blocks that are combined in a
// fixed order.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mattrib/datagen.h"
#include "mattrib/graphgen.h"
#include "mattrib/hypergraph.h"
#include "mattrib/model.h"
#include "mattrib/strategy.h"

namespace mattrib {

// Examples per leaf block of the fixed-shape reductions.
inline constexpr size_t kReductionBlock = 64;

// Logistic cross-entropy gradient (weights then intercept) of one example,
// written to `out` (size dim + 1). Returns its Euclidean norm.
double ExampleGradient(const Model& model, const RegressionDataset& ds,
                       EdgeId i, std::span<double> out);

struct GradientSum {
  std::vector<double> sum;     // sum of clipped gradients, size dim + 1
  double unclipped_norm_sum = 0.0;
};

// Sum over `batch` (repeats allowed) of clip(grad, clip_norm). The sum is a
// pairwise tree over kReductionBlock-example leaves.
GradientSum ClippedGradientSumSerial(const Model& model,
                                     const RegressionDataset& ds,
                                     std::span<const EdgeId> batch,
                                     double clip_norm);
GradientSum ClippedGradientSumParallel(const Model& model,
                                       const RegressionDataset& ds,
                                       std::span<const EdgeId> batch,
                                       double clip_norm);

struct EvalSums {
  double loss_sum = 0.0;
  size_t correct = 0;
  size_t count = 0;
};

// Cross-entropy sum and number of correct predictions (predict 1 iff
// probability >= 0.5) over `examples`.
EvalSums EvaluateSerial(const Model& model, const RegressionDataset& ds,
                        std::span<const EdgeId> examples);
EvalSums EvaluateParallel(const Model& model, const RegressionDataset& ds,
                          std::span<const EdgeId> examples);

// ||A C^{-1}||_F^2 for the prefix-sum workload A, column by column.
double FactorizationErrorSerial(const StrategyMatrix& c);
double FactorizationErrorParallel(const StrategyMatrix& c);

// All edges of the regular model for a validated spec with m users.
Hypergraph GenerateRegularSerial(const GraphGenSpec& spec, size_t num_users);
Hypergraph GenerateRegularParallel(const GraphGenSpec& spec, size_t num_users);

// Features and labels of every example; effective[a] is the effective
// parameter vector for arity a.
void FillRegressionExamplesSerial(
    RegressionDataset& ds, uint64_t seed, double stddev,
    const std::vector<std::vector<double>>& effective);
void FillRegressionExamplesParallel(
    RegressionDataset& ds, uint64_t seed, double stddev,
    const std::vector<std::vector<double>>& effective);

}  // namespace mattrib

#endif  // MATTRIB_KERNELS_H_
