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

#include "mattrib/dptrain.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "mattrib/kernels.h"
#include "mattrib/random.h"

namespace mattrib {

static_assert(std::endian::native == std::endian::little,
              "checkpoints are written with host byte order");

namespace {

constexpr char kModelMagic[4] = {'M', 'A', 'D', 'M'};

// Source of the batch for each step.
using BatchSource = std::function<std::vector<EdgeId>(size_t step)>;

class Updater {
 public:
  Updater(const TrainConfig& cfg, size_t params)
      : cfg_(cfg), m_(params, 0.0), v_(params, 0.0) {}

  void Apply(Model& model, const std::vector<double>& g) {
    ++t_;
    const size_t d = model.dim();
    if (cfg_.optimizer == Optimizer::kSgd) {
      for (size_t j = 0; j < d; ++j) model.weights[j] -= cfg_.learning_rate * g[j];
      model.intercept -= cfg_.learning_rate * g[d];
      return;
    }
    const double b1 = cfg_.adam_beta1;
    const double b2 = cfg_.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (size_t j = 0; j <= d; ++j) {
      m_[j] = b1 * m_[j] + (1 - b1) * g[j];
      v_[j] = b2 * v_[j] + (1 - b2) * g[j] * g[j];
      const double step =
          cfg_.learning_rate * (m_[j] / c1) / (std::sqrt(v_[j] / c2) + cfg_.adam_eps);
      if (j < d) {
        model.weights[j] -= step;
      } else {
        model.intercept -= step;
      }
    }
  }

 private:
  const TrainConfig& cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  size_t t_ = 0;
};

absl::Status ValidateConfig(const RegressionDataset& ds, const TrainConfig& cfg) {
  if (ds.dim == 0) return absl::InvalidArgumentError("dataset is empty");
  if (cfg.batch_size < 1) return absl::InvalidArgumentError("batch size must be >= 1");
  if (!(cfg.clip_norm > 0)) return absl::InvalidArgumentError("clip norm must be > 0");
  if (!(cfg.noise_multiplier >= 0) || std::isinf(cfg.noise_multiplier)) {
    return absl::InvalidArgumentError("noise multiplier must be finite and >= 0");
  }
  if (!(cfg.learning_rate > 0)) {
    return absl::InvalidArgumentError("learning rate must be > 0");
  }
  return absl::OkStatus();
}

// Shared loop: batch, clipped sum / B, optional correlated noise, update.
absl::StatusOr<TrainResult> TrainLoop(const RegressionDataset& ds,
                                      size_t steps, const BatchSource& batches,
                                      const TrainConfig& cfg,
                                      const StrategyMatrix* c) {
  if (auto s = ValidateConfig(ds, cfg); !s.ok()) return s;
  TrainResult out;
  out.model = Model(ds.dim);
  const size_t params = out.model.num_params();
  const bool noisy = cfg.noise_multiplier > 0;
  std::optional<NoiseStream> noise;
  if (noisy) {
    if (std::isinf(cfg.clip_norm)) {
      return absl::InvalidArgumentError("noise requires a finite clip norm");
    }
    noise.emplace(*c, params,
                  cfg.clip_norm * cfg.noise_multiplier / cfg.batch_size,
                  cfg.seed);
  }
  Updater updater(cfg, params);
  const double inv_b = 1.0 / static_cast<double>(cfg.batch_size);
  for (size_t step = 0; step < steps; ++step) {
    const std::vector<EdgeId> batch = batches(step);
    GradientSum gs =
        cfg.parallel
            ? ClippedGradientSumParallel(out.model, ds, batch, cfg.clip_norm)
            : ClippedGradientSumSerial(out.model, ds, batch, cfg.clip_norm);
    std::vector<double>& g = gs.sum;
    for (double& x : g) x *= inv_b;
    if (noisy) {
      absl::StatusOr<std::vector<double>> z = noise->Next();
      if (!z.ok()) return z.status();
      for (size_t j = 0; j < params; ++j) g[j] += (*z)[j];
      if (cfg.noise_observer) cfg.noise_observer(step, *z);
    }
    updater.Apply(out.model, g);

    const bool last = step + 1 == steps;
    if (last || (cfg.log_every > 0 && (step + 1) % cfg.log_every == 0)) {
      std::span<const EdgeId> eval =
          cfg.monitor.empty() ? std::span<const EdgeId>(batch) : cfg.monitor;
      const EvalSums e = cfg.parallel ? EvaluateParallel(out.model, ds, eval)
                                      : EvaluateSerial(out.model, ds, eval);
      StepMetrics m;
      m.step = step + 1;
      m.loss = e.count ? e.loss_sum / e.count : 0.0;
      m.accuracy = e.count ? static_cast<double>(e.correct) / e.count : 0.0;
      m.sigma = cfg.noise_multiplier;
      m.grad_norm_mean = batch.empty() ? 0.0 : gs.unclipped_norm_sum / batch.size();
      out.trajectory.push_back(m);
    }
  }
  return out;
}

}  // namespace

std::vector<double> ClippedGradient(const Model& model,
                                    const RegressionDataset& ds, EdgeId i,
                                    double clip_norm) {
  std::vector<double> g(model.num_params());
  const double norm = ExampleGradient(model, ds, i, g);
  if (norm > clip_norm) {
    const double factor = clip_norm / norm;
    for (double& x : g) x *= factor;
  }
  return g;
}

std::vector<EdgeId> PoissonBatch(std::span<const EdgeId> pool, double p,
                                 uint64_t seed, size_t step) {
  if (p >= 1.0) return {pool.begin(), pool.end()};
  std::vector<EdgeId> batch;
  if (!(p > 0.0)) return batch;
  KeyedRng rng(seed, Stream::kPoissonBatch, step);
  const double log_q = std::log1p(-p);
  // Geometric gaps between kept positions.
  for (double pos = -1.0;;) {
    const double gap = std::floor(std::log1p(-rng.Uniform()) / log_q);
    pos += gap + 1.0;
    if (pos >= static_cast<double>(pool.size())) break;
    batch.push_back(pool[static_cast<size_t>(pos)]);
  }
  return batch;
}

absl::StatusOr<TrainResult> DpSgdTrain(const RegressionDataset& ds,
                                       const Selection& selection,
                                       const TrainConfig& cfg) {
  if (selection.empty()) return absl::InvalidArgumentError("empty selection");
  for (const auto& [e, c] : selection.counts()) {
    if (e >= ds.num_examples()) {
      return absl::InvalidArgumentError(
          absl::StrCat("selected example ", e, " not in dataset"));
    }
  }
  const std::vector<EdgeId> pool = selection.Expand();
  const double p = std::min(
      1.0, static_cast<double>(cfg.batch_size) / static_cast<double>(pool.size()));
  const StrategyMatrix identity = StrategyMatrix::Identity(cfg.steps);
  return TrainLoop(
      ds, cfg.steps,
      [&](size_t step) { return PoissonBatch(pool, p, cfg.seed, step); }, cfg,
      &identity);
}

absl::StatusOr<TrainResult> DpSgdTrainFixedBatches(
    const RegressionDataset& ds,
    const std::vector<std::vector<EdgeId>>& batches, const TrainConfig& cfg) {
  const StrategyMatrix identity = StrategyMatrix::Identity(batches.size());
  return TrainLoop(
      ds, batches.size(), [&](size_t step) { return batches[step]; }, cfg,
      &identity);
}

absl::StatusOr<TrainResult> DpMfTrain(const RegressionDataset& ds,
                                      const Schedule& schedule,
                                      const TrainConfig& cfg,
                                      const StrategyMatrix& c) {
  const size_t allowed_band = schedule.min_sep == 0 ? 1 : schedule.min_sep;
  if (c.band() > allowed_band) {
    return absl::InvalidArgumentError(absl::StrCat(
        "strategy band ", c.band(), " exceeds schedule min-sep ", allowed_band));
  }
  if (c.steps() < schedule.num_batches()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "strategy covers ", c.steps(), " steps, schedule has ",
        schedule.num_batches()));
  }
  for (const auto& batch : schedule.batches) {
    for (EdgeId e : batch) {
      if (e >= ds.num_examples()) {
        return absl::InvalidArgumentError(
            absl::StrCat("scheduled example ", e, " not in dataset"));
      }
    }
  }
  return TrainLoop(
      ds, schedule.num_batches(),
      [&](size_t step) { return schedule.batches[step]; }, cfg, &c);
}

absl::StatusOr<TrainResult> NonPrivateTrain(const RegressionDataset& ds,
                                            std::span<const EdgeId> examples,
                                            const TrainConfig& cfg) {
  if (examples.empty()) return absl::InvalidArgumentError("no examples");
  TrainConfig plain = cfg;
  plain.clip_norm = std::numeric_limits<double>::infinity();
  plain.noise_multiplier = 0.0;
  plain.batch_size = examples.size();
  const std::vector<EdgeId> all(examples.begin(), examples.end());
  return TrainLoop(
      ds, cfg.steps, [&](size_t) { return all; }, plain, nullptr);
}

absl::StatusOr<Evaluation> Evaluate(const Model& model,
                                    const RegressionDataset& ds,
                                    std::span<const EdgeId> examples) {
  if (examples.empty()) return absl::InvalidArgumentError("empty split");
  if (model.dim() != ds.dim) {
    return absl::InvalidArgumentError(absl::StrCat(
        "model dim ", model.dim(), " != dataset dim ", ds.dim));
  }
  const EvalSums s = EvaluateParallel(model, ds, examples);
  return Evaluation{s.loss_sum / s.count,
                    static_cast<double>(s.correct) / s.count};
}

std::string MetricsCsv(const std::vector<StepMetrics>& trajectory) {
  std::string out = "step,loss,accuracy,sigma,grad_norm_mean\n";
  for (const StepMetrics& m : trajectory) {
    absl::StrAppendFormat(&out, "%d,%.17g,%.17g,%.17g,%.17g\n", m.step, m.loss,
                          m.accuracy, m.sigma, m.grad_norm_mean);
  }
  return out;
}

absl::Status SaveModel(const Model& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out.write(kModelMagic, 4);
  const uint32_t dim = static_cast<uint32_t>(m.dim());
  out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
  out.write(reinterpret_cast<const char*>(m.weights.data()),
            static_cast<std::streamsize>(m.dim() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(&m.intercept), sizeof(double));
  if (!out) return absl::DataLossError(absl::StrCat("short write to ", path));
  return absl::OkStatus();
}

absl::StatusOr<Model> LoadModel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  char magic[4];
  uint32_t dim = 0;
  if (!in.read(magic, 4) || std::memcmp(magic, kModelMagic, 4) != 0) {
    return absl::InvalidArgumentError("not a model checkpoint (bad magic)");
  }
  if (!in.read(reinterpret_cast<char*>(&dim), sizeof(dim))) {
    return absl::InvalidArgumentError("truncated checkpoint header");
  }
  Model m(dim);
  if (!in.read(reinterpret_cast<char*>(m.weights.data()),
               static_cast<std::streamsize>(dim * sizeof(double))) ||
      !in.read(reinterpret_cast<char*>(&m.intercept), sizeof(double))) {
    return absl::InvalidArgumentError("truncated checkpoint");
  }
  return m;
}

}  // namespace mattrib
