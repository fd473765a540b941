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

#ifndef MATTRIB_DPTRAIN_H_
#define MATTRIB_DPTRAIN_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "mattrib/datagen.h"
#include "mattrib/hypergraph.h"
#include "mattrib/model.h"
#include "mattrib/strategy.h"

namespace mattrib {

enum class Optimizer { kSgd, kAdam };

struct TrainConfig {
  size_t steps = 100;
  size_t batch_size = 64;  // target B; gradients are always divided by it
  double clip_norm = 1.0;
  double noise_multiplier = 0.0;
  double learning_rate = 0.1;
  Optimizer optimizer = Optimizer::kSgd;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  uint64_t seed = 0;
  // Emit a metrics row every `log_every` steps (0: final step only). Rows are
  // evaluated on `monitor` when set, else on the step's batch.
  size_t log_every = 0;
  std::span<const EdgeId> monitor;
  bool parallel = true;
  // Called with (step, noise added to the averaged gradient) when noise is on.
  std::function<void(size_t, std::span<const double>)> noise_observer;
};

struct StepMetrics {
  size_t step = 0;  // 1-based
  double loss = 0.0;
  double accuracy = 0.0;
  double sigma = 0.0;
  double grad_norm_mean = 0.0;  // mean unclipped per-example norm
};

struct TrainResult {
  Model model;
  std::vector<StepMetrics> trajectory;
};

// clip(v, C) = v * min(1, C / |v|) of the cross-entropy gradient of example i.
std::vector<double> ClippedGradient(const Model& model,
                                    const RegressionDataset& ds, EdgeId i,
                                    double clip_norm);

// Poisson batch for `step`: each entry of `pool` (copies counted separately)
// is kept independently with probability p, in pool order.
std::vector<EdgeId> PoissonBatch(std::span<const EdgeId> pool, double p,
                                 uint64_t seed, size_t step);

// DP-SGD over the multiset `selection` with p = B / |S|.
absl::StatusOr<TrainResult> DpSgdTrain(const RegressionDataset& ds,
                                       const Selection& selection,
                                       const TrainConfig& cfg);

// DP-SGD with independent noise over caller-supplied batches (one per step).
absl::StatusOr<TrainResult> DpSgdTrainFixedBatches(
    const RegressionDataset& ds,
    const std::vector<std::vector<EdgeId>>& batches, const TrainConfig& cfg);

// DP-MF over the schedule's batches in order with noise correlated by `c`.
// Requires c.band() <= schedule.min_sep (band 1 when min_sep is unknown) and
// c.steps() >= the number of batches; cfg.steps is ignored.
absl::StatusOr<TrainResult> DpMfTrain(const RegressionDataset& ds,
                                      const Schedule& schedule,
                                      const TrainConfig& cfg,
                                      const StrategyMatrix& c);

// Full-batch gradient descent on `examples` for cfg.steps steps; no clipping
// or noise, same kernels and update rule as the private trainers.
absl::StatusOr<TrainResult> NonPrivateTrain(const RegressionDataset& ds,
                                            std::span<const EdgeId> examples,
                                            const TrainConfig& cfg);

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

// Mean cross-entropy and accuracy (predict 1 iff probability >= 0.5).
absl::StatusOr<Evaluation> Evaluate(const Model& model,
                                    const RegressionDataset& ds,
                                    std::span<const EdgeId> examples);

// CSV `step,loss,accuracy,sigma,grad_norm_mean`.
std::string MetricsCsv(const std::vector<StepMetrics>& trajectory);

}  // namespace mattrib

#endif  // MATTRIB_DPTRAIN_H_
