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

#ifndef MATTRIB_HARNESS_H_
#define MATTRIB_HARNESS_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "mattrib/bounding.h"
#include "mattrib/datagen.h"
#include "mattrib/dptrain.h"
#include "mattrib/graphgen.h"
#include "mattrib/strategy.h"

namespace mattrib {

enum class GraphModel { kRegular, kSkewed };

struct GraphSource {
  std::string path;  // load from file when set
  GraphModel model = GraphModel::kRegular;
  GraphGenSpec gen;
};

enum class BoundingAlgo { kNoDup, kDup, kMinSep, kInterleaved, kRandom };

struct BoundingSpec {
  std::string name;
  BoundingAlgo algo = BoundingAlgo::kDup;
  uint32_t k = 2;
  OrderSpec order;
  InterleaveSpec interleave;
  RandomPool pool = RandomPool::kAll;
  size_t random_size = 0;
  uint64_t random_seed = 0;
  // Min-sep values to try; empty means probe b = 2, 3, ... up to the first
  // failure (or max_min_sep).
  std::vector<size_t> min_seps;
  size_t max_min_sep = 64;
};

enum class MechanismKind { kDpSgd, kDpMf };

struct BiasSweepSpec {
  uint32_t k = 3;
  std::vector<uint32_t> thresholds = {1, 2, 3, 4};
  uint32_t max_run = 10;
  bool allow_dup = true;
};

struct RetentionSpec {
  std::vector<size_t> num_edges = {125000};
  std::vector<uint32_t> ks = {2, 4, 8};
  std::vector<double> degrees = {2, 4, 8};
  double expected_arity = 2.0;
  double skew_alpha = 1.5;
  uint64_t seed = 0;
  // Min-sep probe; skipped when probe_minsep is false.
  bool probe_minsep = true;
  size_t minsep_steps = 100;
  size_t minsep_batch = 256;
  size_t max_min_sep = 64;
};

struct ExperimentConfig {
  GraphSource graph;
  RegressionSpec data;
  std::vector<BoundingSpec> bounding;
  MechanismKind mechanism = MechanismKind::kDpSgd;
  StrategyMode strategy = StrategyMode::kOptimized;
  std::vector<double> epsilons;
  double delta = 1e-10;
  size_t hypothetical_batch = 0;  // 0: account with the physical batch
  std::string noise_table;        // optional CSV of external sigmas
  Optimizer optimizer = Optimizer::kAdam;
  std::vector<double> learning_rates = {1e-3};
  std::vector<double> clip_norms = {1.0};
  std::vector<size_t> batch_sizes = {1024};
  size_t product = 1024 * 100;  // batch_size * steps, fixed across the grid
  std::vector<uint64_t> seeds = {0, 1, 2, 3, 4};
  BiasSweepSpec bias;
  RetentionSpec retention;
  bool write_plots = true;
  std::string hash;  // of the source text
};

absl::StatusOr<ExperimentConfig> ParseConfig(std::string_view toml_text);
absl::StatusOr<ExperimentConfig> LoadConfig(const std::string& path);

// One training run (or infeasible calibration).
struct RunRow {
  std::string config_hash;
  std::string bounding;
  std::string mechanism;
  double epsilon = 0;
  double delta = 0;
  double learning_rate = 0;
  double clip_norm = 0;
  size_t batch_size = 0;
  size_t steps = 0;
  size_t min_sep = 0;
  uint64_t seed = 0;
  uint32_t k = 0;           // bound used for accounting
  uint32_t achieved_k = 0;  // measured on the selection
  size_t selected = 0;
  size_t distinct = 0;
  double avg_arity = 0;
  double sampling_prob = 0;
  size_t hypothetical_batch = 0;
  double sigma = 0;
  std::string accountant;
  std::string status;  // ok | infeasible
  double val_loss = 0;
  double val_accuracy = 0;
  double test_loss = 0;
  double test_accuracy = 0;
};

// Best hyperparameters per (bounding, epsilon) by mean validation accuracy,
// ties to the smaller sigma.
struct BestRow {
  std::string bounding;
  double epsilon = 0;
  double learning_rate = 0;
  double clip_norm = 0;
  size_t batch_size = 0;
  size_t min_sep = 0;
  double sigma = 0;
  double avg_arity = 0;
  size_t num_seeds = 0;
  double mean_val_accuracy = 0;
  double mean_test_accuracy = 0;
  double stderr_test_accuracy = 0;
};

struct ExperimentResult {
  std::vector<RunRow> rows;
  std::vector<BestRow> best;
};

std::string RunCsvHeader();
std::string RunCsvLine(const RunRow& r);
std::string BestCsv(const std::vector<BestRow>& best);
std::vector<BestRow> SelectBest(const std::vector<RunRow>& rows);

// Bound, calibrate, train and evaluate over the full grid. Bounding runs on
// the training split only. With a nonempty `out_dir`, writes runs.csv (one
// flushed line per run), best.csv and, if enabled, best_test_accuracy.svg.
absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& cfg,
                                               const std::string& out_dir);

struct BiasSetting {
  uint32_t threshold = 0;
  uint32_t low_run = 0;
  uint32_t high_run = 0;
  size_t size = 0;
  double avg_arity = 0;
  bool pareto = false;
};

// All (threshold, c1, c2) settings of the sweep: c1 = 1 with c2 = 1..max_run,
// then c1 = 1..max_run with c2 = 1, for each threshold.
std::vector<BiasSetting> BiasGrid(const BiasSweepSpec& spec);

struct BiasSweepResult {
  std::vector<BiasSetting> settings;
  ExperimentResult experiment;  // non-dominated settings only
};

// Runs the interleaved sweep on the training split, keeps the Pareto front
// of (size, avg arity) and trains on it. Writes settings.csv, runs.csv and
// best.csv to `out_dir` when nonempty.
absl::StatusOr<BiasSweepResult> SweepBiasTradeoff(const ExperimentConfig& cfg,
                                                  const std::string& out_dir);

struct RetentionRow {
  size_t num_edges = 0;
  uint32_t k = 0;
  double degree = 0;
  size_t regular_selected = 0;
  size_t skewed_selected = 0;
  double retention_ratio = 0;  // skewed / regular
  size_t regular_max_b = 0;    // 0 if not probed or b = 1 fails
  size_t skewed_max_b = 0;
  size_t minsep_batch = 0;
};

// greedy_dup sizes on regular vs skewed graphs over the retention grid, plus
// the largest feasible min-sep b of each graph.
absl::StatusOr<std::vector<RetentionRow>> CompareRetention(
    const RetentionSpec& spec, const std::string& out_dir);
std::string RetentionCsv(const std::vector<RetentionRow>& rows);

// Largest b in [1, max_b] for which b' = 1..b all succeed; 0 if b = 1 fails.
size_t MaxFeasibleMinSep(const Hypergraph& h, size_t steps, size_t batch_size,
                         size_t max_b, const OrderSpec& order = {});

// Line plot of best test accuracy against log2(epsilon), one line per
// bounding name.
std::string BestAccuracySvg(const std::vector<BestRow>& best);

}  // namespace mattrib

#endif  // MATTRIB_HARNESS_H_
