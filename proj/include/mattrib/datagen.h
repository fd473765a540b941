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

#ifndef MATTRIB_DATAGEN_H_
#define MATTRIB_DATAGEN_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "mattrib/hypergraph.h"

namespace mattrib {

// Coordinate variance of the Gaussian used for ground truth and features.
enum class Covariance {
  kInvSqrtDim,  // 1/sqrt(d), the literal covariance (1/sqrt(d)) I
  kInvDim,      // 1/d, so the expected squared norm is 1
};

struct RegressionSpec {
  size_t dim = 100;
  double steepness = 20.0;
  double beta = 1.0;  // bias strength
  uint64_t seed = 0;
  Covariance covariance = Covariance::kInvDim;
};

enum class Split : uint8_t { kTrain = 0, kTest = 1, kValidation = 2 };

// One example per hyperedge. Features are stored as f32 (the on-disk width);
// labels were drawn from the stored features.
struct RegressionDataset {
  size_t dim = 0;
  std::vector<float> features;  // num_examples * dim, row-major
  std::vector<uint8_t> labels;
  std::vector<uint32_t> arity;
  std::vector<Split> split;
  // Ground truth, kept in memory only.
  std::vector<double> base;
  std::vector<double> bias;
  double steepness = 0.0;
  double beta = 1.0;

  size_t num_examples() const { return labels.size(); }
  std::span<const float> feature(size_t i) const {
    return {features.data() + i * dim, dim};
  }
  std::vector<EdgeId> IndicesOf(Split s) const;
};

struct SplitSizes {
  size_t train = 0;
  size_t test = 0;
  size_t validation = 0;
  friend bool operator==(const SplitSizes&, const SplitSizes&) = default;
};

double CoordinateVariance(Covariance c, size_t dim);

// (2 / (1 + beta)) * (base + beta * arity * bias).
std::vector<double> EffectiveParameters(const RegressionDataset& ds,
                                        uint32_t arity);

// <effective parameters for example i, f_i>; the label is
// Bernoulli(sigmoid(steepness * margin)).
double GroundTruthMargin(const RegressionDataset& ds, size_t i);

// Draws ground truth, features and labels for every edge of `h`, then tags
// an 80/10/10 split. Example i depends only on (seed, i).
absl::StatusOr<RegressionDataset> GenerateRegression(const Hypergraph& h,
                                                     const RegressionSpec& spec);

// Fills features (coordinate stddev `stddev`) and label of example i, whose
// effective parameter vector is `effective`.
void SampleRegressionExample(RegressionDataset& ds, uint64_t seed,
                             double stddev, size_t i,
                             std::span<const double> effective);

// Test and validation get floor(n / 10) each; train gets the remainder.
SplitSizes ComputeSplitSizes(size_t n);
SplitSizes CountSplits(const RegressionDataset& ds);

// Uniformly random partition with the sizes above.
RegressionDataset SplitDataset(RegressionDataset ds, uint64_t seed);

// Binary little-endian: "MADP", u32 version, u32 dim, u64 num_edges, then per
// edge f32 x dim, u8 label, u32 arity, u8 split.
absl::Status SaveDataset(const RegressionDataset& ds, const std::string& path);
absl::StatusOr<RegressionDataset> LoadDataset(const std::string& path);

}  // namespace mattrib

#endif  // MATTRIB_DATAGEN_H_
