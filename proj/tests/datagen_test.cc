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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "gtest/gtest.h"
#include "mattrib/graphgen.h"
#include "mattrib/model.h"
#include "test_util.h"

namespace mattrib {
namespace {

Hypergraph Regular(size_t edges, uint64_t seed = 0) {
  GraphGenSpec s;
  s.num_edges = edges;
  s.seed = seed;
  return *GenerateRegular(s);
}

TEST(EffectiveParametersTest, BetaOneIsPlainSum) {
  RegressionDataset ds;
  ds.dim = 3;
  ds.base = {0.5, -1.0, 0.25};
  ds.bias = {0.1, 0.2, -0.3};
  ds.beta = 1.0;
  const auto w = EffectiveParameters(ds, 3);
  for (size_t j = 0; j < 3; ++j) EXPECT_EQ(w[j], ds.base[j] + 3 * ds.bias[j]);
}

TEST(EffectiveParametersTest, BetaScaling) {
  RegressionDataset ds;
  ds.dim = 2;
  ds.base = {1.0, 2.0};
  ds.bias = {0.5, -0.5};
  ds.beta = 3.0;
  const auto w = EffectiveParameters(ds, 2);
  EXPECT_DOUBLE_EQ(w[0], 0.5 * (1.0 + 3.0 * 2 * 0.5));
  EXPECT_DOUBLE_EQ(w[1], 0.5 * (2.0 - 3.0 * 2 * 0.5));
}

TEST(GroundTruthMarginTest, OrthogonalFeatureGivesHalf) {
  RegressionDataset ds;
  ds.dim = 2;
  ds.base = {1.0, 0.0};
  ds.bias = {0.0, 0.0};
  ds.beta = 1.0;
  ds.steepness = 20.0;
  ds.features = {0.0f, 3.0f};
  ds.labels = {0};
  ds.arity = {1};
  EXPECT_EQ(GroundTruthMargin(ds, 0), 0.0);
  EXPECT_EQ(Sigmoid(ds.steepness * GroundTruthMargin(ds, 0)), 0.5);
}

TEST(SplitSizesTest, FloorRule) {
  EXPECT_EQ(ComputeSplitSizes(10), (SplitSizes{8, 1, 1}));
  EXPECT_EQ(ComputeSplitSizes(0), (SplitSizes{0, 0, 0}));
  EXPECT_EQ(ComputeSplitSizes(125000), (SplitSizes{100000, 12500, 12500}));
  EXPECT_EQ(ComputeSplitSizes(19), (SplitSizes{17, 1, 1}));
}

TEST(SplitDatasetTest, SizesAndDeterminism) {
  RegressionDataset ds;
  ds.labels.assign(1003, 0);
  const RegressionDataset a = SplitDataset(ds, 4);
  const RegressionDataset b = SplitDataset(ds, 4);
  const RegressionDataset c = SplitDataset(ds, 5);
  EXPECT_EQ(CountSplits(a), ComputeSplitSizes(1003));
  EXPECT_EQ(a.split, b.split);
  EXPECT_NE(a.split, c.split);
  RegressionDataset empty;
  EXPECT_EQ(CountSplits(SplitDataset(empty, 1)), (SplitSizes{0, 0, 0}));
}

TEST(SplitDatasetTest, UniformAcrossPositions) {
  // Each position lands in the test split with probability 1/10.
  const size_t n = 100;
  const int trials = 4000;
  std::vector<int> hits(n, 0);
  RegressionDataset ds;
  ds.labels.assign(n, 0);
  for (int t = 0; t < trials; ++t) {
    const RegressionDataset s = SplitDataset(ds, t);
    for (size_t i = 0; i < n; ++i) hits[i] += s.split[i] == Split::kTest;
  }
  const double se = std::sqrt(trials * 0.1 * 0.9);
  for (size_t i = 0; i < n; ++i) EXPECT_NEAR(hits[i], trials * 0.1, 5 * se);
}

TEST(GenerateRegressionTest, Errors) {
  const Hypergraph h = testing::FigureOne();
  RegressionSpec spec;
  spec.dim = 0;
  EXPECT_FALSE(GenerateRegression(h, spec).ok());
  spec = {};
  spec.steepness = 0;
  EXPECT_FALSE(GenerateRegression(h, spec).ok());
  spec = {};
  spec.beta = 0;
  EXPECT_FALSE(GenerateRegression(h, spec).ok());
  EXPECT_FALSE(GenerateRegression(Hypergraph(), RegressionSpec()).ok());
}

TEST(GenerateRegressionTest, ShapesAndArity) {
  const Hypergraph h = Regular(2000, 3);
  RegressionSpec spec;
  spec.dim = 7;
  auto ds = GenerateRegression(h, spec);
  ASSERT_TRUE(ds.ok());
  EXPECT_EQ(ds->num_examples(), 2000u);
  EXPECT_EQ(ds->features.size(), 2000u * 7);
  EXPECT_EQ(CountSplits(*ds), ComputeSplitSizes(2000));
  for (size_t i = 0; i < 2000; ++i) {
    EXPECT_EQ(ds->arity[i], h.arity(i));
    EXPECT_LE(ds->labels[i], 1);
  }
}

double EmpiricalVariance(const std::vector<float>& xs) {
  double s = 0, ss = 0;
  for (float x : xs) {
    s += x;
    ss += static_cast<double>(x) * x;
  }
  const double n = static_cast<double>(xs.size());
  return ss / n - (s / n) * (s / n);
}

TEST(GenerateRegressionTest, CoordinateVariance) {
  const Hypergraph h = Regular(10000, 1);
  for (Covariance c : {Covariance::kInvSqrtDim, Covariance::kInvDim}) {
    RegressionSpec spec;
    spec.covariance = c;
    auto ds = GenerateRegression(h, spec);
    ASSERT_TRUE(ds.ok());
    const double var = CoordinateVariance(c, 100);
    const double n = static_cast<double>(ds->features.size());
    EXPECT_NEAR(EmpiricalVariance(ds->features), var,
                3 * var * std::sqrt(2.0 / n));
  }
  EXPECT_DOUBLE_EQ(CoordinateVariance(Covariance::kInvSqrtDim, 100), 0.1);
  EXPECT_DOUBLE_EQ(CoordinateVariance(Covariance::kInvDim, 100), 0.01);
}

TEST(GenerateRegressionTest, SquaredNormOfGroundTruthDraws) {
  // Mean ||a||^2 over seeds is d times the coordinate variance.
  const Hypergraph h = testing::FigureOne();
  double s = 0, ss = 0;
  const int n = 2000;
  for (int seed = 0; seed < n; ++seed) {
    RegressionSpec spec;
    spec.seed = seed;
    auto ds = GenerateRegression(h, spec);
    const double norm2 =
        std::inner_product(ds->base.begin(), ds->base.end(), ds->base.begin(), 0.0);
    s += norm2;
    ss += norm2 * norm2;
  }
  const double mean = s / n;
  const double se = std::sqrt((ss / n - mean * mean) / n);
  EXPECT_NEAR(mean, 1.0, 3 * se);
}

TEST(GenerateRegressionTest, LabelLaw) {
  // Sum of labels against the sum of their Bernoulli probabilities.
  const Hypergraph h = Regular(100000, 2);
  auto ds = GenerateRegression(h, RegressionSpec());
  ASSERT_TRUE(ds.ok());
  double expected = 0, var = 0, observed = 0;
  for (size_t i = 0; i < ds->num_examples(); ++i) {
    const double p = Sigmoid(ds->steepness * GroundTruthMargin(*ds, i));
    expected += p;
    var += p * (1 - p);
    observed += ds->labels[i];
  }
  EXPECT_NEAR(observed, expected, 3 * std::sqrt(var));
}

TEST(GenerateRegressionTest, GroundTruthAccuracyWellSeparated) {
  const Hypergraph h = Regular(125000, 0);
  auto ds = GenerateRegression(h, RegressionSpec());
  ASSERT_TRUE(ds.ok());
  size_t correct = 0;
  const auto test = ds->IndicesOf(Split::kTest);
  for (EdgeId i : test) {
    const int pred = GroundTruthMargin(*ds, i) >= 0 ? 1 : 0;
    correct += pred == ds->labels[i];
  }
  const double acc = static_cast<double>(correct) / test.size();
  EXPECT_GT(acc, 0.6);
  EXPECT_LT(acc, 0.98);
}

TEST(GenerateRegressionTest, Deterministic) {
  const Hypergraph h = Regular(3000, 5);
  RegressionSpec spec;
  spec.seed = 12;
  auto a = GenerateRegression(h, spec);
  auto b = GenerateRegression(h, spec);
  spec.seed = 13;
  auto c = GenerateRegression(h, spec);
  EXPECT_EQ(a->features, b->features);
  EXPECT_EQ(a->labels, b->labels);
  EXPECT_EQ(a->split, b->split);
  EXPECT_NE(a->features, c->features);
}

TEST(DatasetFileTest, RoundTrip) {
  const Hypergraph h = Regular(500, 5);
  RegressionSpec spec;
  spec.dim = 5;
  auto ds = GenerateRegression(h, spec);
  const auto path =
      (std::filesystem::temp_directory_path() / "mattrib_ds_test.bin").string();
  ASSERT_TRUE(SaveDataset(*ds, path).ok());
  EXPECT_EQ(std::filesystem::file_size(path),
            4 + 4 + 4 + 8 + 500 * (5 * 4 + 1 + 4 + 1));
  auto back = LoadDataset(path);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(back->dim, 5u);
  EXPECT_EQ(back->features, ds->features);
  EXPECT_EQ(back->labels, ds->labels);
  EXPECT_EQ(back->arity, ds->arity);
  EXPECT_EQ(back->split, ds->split);

  std::filesystem::resize_file(path, 100);
  EXPECT_FALSE(LoadDataset(path).ok());
  {
    std::ofstream out(path, std::ios::binary);
    out << "XXXX";
  }
  EXPECT_FALSE(LoadDataset(path).ok());
  std::filesystem::remove(path);
  EXPECT_TRUE(absl::IsNotFound(LoadDataset(path).status()));
}

}  // namespace
}  // namespace mattrib
