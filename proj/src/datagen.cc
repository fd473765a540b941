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

#include "mattrib/datagen.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include "absl/strings/str_cat.h"
#include "mattrib/kernels.h"
#include "mattrib/model.h"
#include "mattrib/random.h"

namespace mattrib {

static_assert(std::endian::native == std::endian::little,
              "dataset files are written with host byte order");

namespace {

constexpr char kMagic[4] = {'M', 'A', 'D', 'P'};
constexpr uint32_t kVersion = 1;

template <typename T>
void Put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool Get(std::istream& in, T* v) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(v), sizeof(T)));
}

std::vector<double> GaussianVector(KeyedRng& rng, size_t dim, double stddev) {
  std::normal_distribution<double> normal(0.0, stddev);
  std::vector<double> v(dim);
  for (double& x : v) x = normal(rng);
  return v;
}

}  // namespace

std::vector<EdgeId> RegressionDataset::IndicesOf(Split s) const {
  std::vector<EdgeId> out;
  for (size_t i = 0; i < split.size(); ++i) {
    if (split[i] == s) out.push_back(static_cast<EdgeId>(i));
  }
  return out;
}

double CoordinateVariance(Covariance c, size_t dim) {
  const double d = static_cast<double>(dim);
  return c == Covariance::kInvSqrtDim ? 1.0 / std::sqrt(d) : 1.0 / d;
}

std::vector<double> EffectiveParameters(const RegressionDataset& ds,
                                        uint32_t arity) {
  const double scale = 2.0 / (1.0 + ds.beta);
  std::vector<double> w(ds.dim);
  for (size_t j = 0; j < ds.dim; ++j) {
    w[j] = scale * (ds.base[j] + ds.beta * arity * ds.bias[j]);
  }
  return w;
}

double GroundTruthMargin(const RegressionDataset& ds, size_t i) {
  const std::vector<double> w = EffectiveParameters(ds, ds.arity[i]);
  const auto f = ds.feature(i);
  double margin = 0.0;
  for (size_t j = 0; j < ds.dim; ++j) margin += w[j] * f[j];
  return margin;
}

void SampleRegressionExample(RegressionDataset& ds, uint64_t seed,
                             double stddev, size_t i,
                             std::span<const double> effective) {
  KeyedRng rng(seed, Stream::kFeatures, i);
  std::normal_distribution<double> normal(0.0, stddev);
  float* f = ds.features.data() + i * ds.dim;
  double margin = 0.0;
  for (size_t j = 0; j < ds.dim; ++j) {
    f[j] = static_cast<float>(normal(rng));
    margin += effective[j] * f[j];
  }
  const double p = Sigmoid(ds.steepness * margin);
  ds.labels[i] = rng.Uniform() < p ? 1 : 0;
}

absl::StatusOr<RegressionDataset> GenerateRegression(
    const Hypergraph& h, const RegressionSpec& spec) {
  if (spec.dim < 1) return absl::InvalidArgumentError("dim must be >= 1");
  if (!(spec.steepness > 0)) {
    return absl::InvalidArgumentError("steepness must be > 0");
  }
  if (!(spec.beta > 0)) return absl::InvalidArgumentError("beta must be > 0");
  if (h.num_edges() == 0) {
    return absl::InvalidArgumentError("hypergraph has no edges");
  }
  const double stddev = std::sqrt(CoordinateVariance(spec.covariance, spec.dim));
  RegressionDataset ds;
  ds.dim = spec.dim;
  ds.steepness = spec.steepness;
  ds.beta = spec.beta;
  KeyedRng base_rng(spec.seed, Stream::kGroundTruth, 0);
  KeyedRng bias_rng(spec.seed, Stream::kGroundTruth, 1);
  ds.base = GaussianVector(base_rng, spec.dim, stddev);
  ds.bias = GaussianVector(bias_rng, spec.dim, stddev);

  const size_t n = h.num_edges();
  ds.features.resize(n * spec.dim);
  ds.labels.resize(n);
  ds.arity.resize(n);
  ds.split.assign(n, Split::kTrain);
  for (size_t i = 0; i < n; ++i) ds.arity[i] = static_cast<uint32_t>(h.arity(i));

  const uint32_t max_arity = *std::max_element(ds.arity.begin(), ds.arity.end());
  std::vector<std::vector<double>> effective(max_arity + 1);
  for (uint32_t a = 0; a <= max_arity; ++a) {
    effective[a] = EffectiveParameters(ds, a);
  }
  FillRegressionExamplesParallel(ds, spec.seed, stddev, effective);
  return SplitDataset(std::move(ds), Mix64(spec.seed ^ 0x5B17ULL));
}

SplitSizes ComputeSplitSizes(size_t n) {
  SplitSizes s;
  s.test = n / 10;
  s.validation = n / 10;
  s.train = n - s.test - s.validation;
  return s;
}

SplitSizes CountSplits(const RegressionDataset& ds) {
  SplitSizes s;
  for (Split t : ds.split) {
    switch (t) {
      case Split::kTrain: ++s.train; break;
      case Split::kTest: ++s.test; break;
      case Split::kValidation: ++s.validation; break;
    }
  }
  return s;
}

RegressionDataset SplitDataset(RegressionDataset ds, uint64_t seed) {
  const size_t n = ds.num_examples();
  const SplitSizes sizes = ComputeSplitSizes(n);
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  KeyedRng rng(seed, Stream::kSplit);
  std::shuffle(order.begin(), order.end(), rng);
  ds.split.assign(n, Split::kTrain);
  for (size_t r = 0; r < sizes.test; ++r) ds.split[order[r]] = Split::kTest;
  for (size_t r = sizes.test; r < sizes.test + sizes.validation; ++r) {
    ds.split[order[r]] = Split::kValidation;
  }
  return ds;
}

absl::Status SaveDataset(const RegressionDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out.write(kMagic, 4);
  Put<uint32_t>(out, kVersion);
  Put<uint32_t>(out, static_cast<uint32_t>(ds.dim));
  Put<uint64_t>(out, ds.num_examples());
  for (size_t i = 0; i < ds.num_examples(); ++i) {
    out.write(reinterpret_cast<const char*>(ds.features.data() + i * ds.dim),
              static_cast<std::streamsize>(ds.dim * sizeof(float)));
    Put<uint8_t>(out, ds.labels[i]);
    Put<uint32_t>(out, ds.arity[i]);
    Put<uint8_t>(out, static_cast<uint8_t>(ds.split[i]));
  }
  if (!out) return absl::DataLossError(absl::StrCat("short write to ", path));
  return absl::OkStatus();
}

absl::StatusOr<RegressionDataset> LoadDataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  char magic[4];
  uint32_t version = 0, dim = 0;
  uint64_t n = 0;
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    return absl::InvalidArgumentError("not a dataset file (bad magic)");
  }
  if (!Get(in, &version) || version != kVersion) {
    return absl::InvalidArgumentError("unsupported dataset version");
  }
  if (!Get(in, &dim) || !Get(in, &n) || dim == 0) {
    return absl::InvalidArgumentError("truncated dataset header");
  }
  RegressionDataset ds;
  ds.dim = dim;
  ds.features.resize(n * dim);
  ds.labels.resize(n);
  ds.arity.resize(n);
  ds.split.resize(n);
  for (size_t i = 0; i < n; ++i) {
    uint8_t split = 0;
    if (!in.read(reinterpret_cast<char*>(ds.features.data() + i * dim),
                 static_cast<std::streamsize>(dim * sizeof(float))) ||
        !Get(in, &ds.labels[i]) || !Get(in, &ds.arity[i]) || !Get(in, &split)) {
      return absl::InvalidArgumentError(
          absl::StrCat("truncated dataset at example ", i));
    }
    if (ds.labels[i] > 1 || split > 2) {
      return absl::InvalidArgumentError(
          absl::StrCat("corrupt record at example ", i));
    }
    ds.split[i] = static_cast<Split>(split);
  }
  return ds;
}

}  // namespace mattrib
