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

#include "mattrib/kernels.h"

#include <cmath>
#include <utility>

namespace mattrib {

namespace {

size_t NumBlocks(size_t n) { return (n + kReductionBlock - 1) / kReductionBlock; }

struct Leaf {
  std::vector<double> sum;
  double norm_sum = 0.0;
};

Leaf GradientLeaf(const Model& model, const RegressionDataset& ds,
                  std::span<const EdgeId> batch, size_t block,
                  double clip_norm) {
  Leaf leaf;
  leaf.sum.assign(model.num_params(), 0.0);
  std::vector<double> g(model.num_params());
  const size_t begin = block * kReductionBlock;
  const size_t end = std::min(batch.size(), begin + kReductionBlock);
  for (size_t k = begin; k < end; ++k) {
    const double norm = ExampleGradient(model, ds, batch[k], g);
    leaf.norm_sum += norm;
    const double factor = norm > clip_norm ? clip_norm / norm : 1.0;
    for (size_t j = 0; j < g.size(); ++j) leaf.sum[j] += factor * g[j];
  }
  return leaf;
}

void CombineInto(Leaf& a, const Leaf& b) {
  for (size_t j = 0; j < a.sum.size(); ++j) a.sum[j] += b.sum[j];
  a.norm_sum += b.norm_sum;
}

GradientSum Finish(std::vector<Leaf>& leaves, size_t params) {
  GradientSum out;
  if (leaves.empty()) {
    out.sum.assign(params, 0.0);
    return out;
  }
  out.sum = std::move(leaves.front().sum);
  out.unclipped_norm_sum = leaves.front().norm_sum;
  return out;
}

EvalSums EvalLeaf(const Model& model, const RegressionDataset& ds,
                  std::span<const EdgeId> examples, size_t block) {
  EvalSums s;
  const size_t begin = block * kReductionBlock;
  const size_t end = std::min(examples.size(), begin + kReductionBlock);
  for (size_t k = begin; k < end; ++k) {
    const EdgeId i = examples[k];
    const auto f = ds.feature(i);
    double z = model.intercept;
    for (size_t j = 0; j < f.size(); ++j) z += model.weights[j] * f[j];
    const bool positive = ds.labels[i] != 0;
    s.loss_sum += positive ? Softplus(-z) : Softplus(z);
    const bool predict_positive = Sigmoid(z) >= 0.5;
    s.correct += predict_positive == positive ? 1 : 0;
    ++s.count;
  }
  return s;
}

// Contribution of column j of C^{-1} to ||A C^{-1}||_F^2.
double ColumnError(const StrategyMatrix& c, size_t j, std::vector<double>& x) {
  const size_t steps = c.steps();
  const size_t lag = c.band() - 1;
  double err = 0.0;
  double prefix = 0.0;
  for (size_t i = j; i < steps; ++i) {
    double v = i == j ? 1.0 : 0.0;
    for (size_t r = 1; r <= lag && r <= i - j; ++r) {
      v -= c.at(i, i - r) * x[i - r];
    }
    x[i] = v / c.at(i, i);
    prefix += x[i];
    err += prefix * prefix;
  }
  return err;
}

}  // namespace

double ExampleGradient(const Model& model, const RegressionDataset& ds,
                       EdgeId i, std::span<double> out) {
  const auto f = ds.feature(i);
  double z = model.intercept;
  double f2 = 1.0;
  for (size_t j = 0; j < f.size(); ++j) {
    z += model.weights[j] * f[j];
    f2 += static_cast<double>(f[j]) * f[j];
  }
  const double r = Sigmoid(z) - (ds.labels[i] != 0 ? 1.0 : 0.0);
  for (size_t j = 0; j < f.size(); ++j) out[j] = r * f[j];
  out[f.size()] = r;
  return std::abs(r) * std::sqrt(f2);
}

GradientSum ClippedGradientSumSerial(const Model& model,
                                     const RegressionDataset& ds,
                                     std::span<const EdgeId> batch,
                                     double clip_norm) {
  std::vector<Leaf> leaves(NumBlocks(batch.size()));
  for (size_t b = 0; b < leaves.size(); ++b) {
    leaves[b] = GradientLeaf(model, ds, batch, b, clip_norm);
  }
  for (size_t n = leaves.size(); n > 1; n = (n + 1) / 2) {
    for (size_t i = 0; i < n / 2; ++i) {
      CombineInto(leaves[2 * i], leaves[2 * i + 1]);
      if (i != 0) leaves[i] = std::move(leaves[2 * i]);
    }
    if (n % 2 == 1) leaves[n / 2] = std::move(leaves[n - 1]);
  }
  return Finish(leaves, model.num_params());
}

GradientSum ClippedGradientSumParallel(const Model& model,
                                       const RegressionDataset& ds,
                                       std::span<const EdgeId> batch,
                                       double clip_norm) {
  const long num_blocks = static_cast<long>(NumBlocks(batch.size()));
  std::vector<Leaf> leaves(num_blocks);
#pragma omp parallel for schedule(static)
  for (long b = 0; b < num_blocks; ++b) {
    leaves[b] = GradientLeaf(model, ds, batch, b, clip_norm);
  }
  // Same pairing as the serial tree; each level combines disjoint pairs.
  std::vector<Leaf> next;
  for (size_t n = leaves.size(); n > 1; n = (n + 1) / 2) {
    next.resize((n + 1) / 2);
    const long pairs = static_cast<long>(n / 2);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < pairs; ++i) {
      CombineInto(leaves[2 * i], leaves[2 * i + 1]);
      next[i] = std::move(leaves[2 * i]);
    }
    if (n % 2 == 1) next[n / 2] = std::move(leaves[n - 1]);
    std::swap(leaves, next);
  }
  return Finish(leaves, model.num_params());
}

EvalSums EvaluateSerial(const Model& model, const RegressionDataset& ds,
                        std::span<const EdgeId> examples) {
  EvalSums total;
  for (size_t b = 0; b < NumBlocks(examples.size()); ++b) {
    const EvalSums s = EvalLeaf(model, ds, examples, b);
    total.loss_sum += s.loss_sum;
    total.correct += s.correct;
    total.count += s.count;
  }
  return total;
}

EvalSums EvaluateParallel(const Model& model, const RegressionDataset& ds,
                          std::span<const EdgeId> examples) {
  const long num_blocks = static_cast<long>(NumBlocks(examples.size()));
  std::vector<EvalSums> parts(num_blocks);
#pragma omp parallel for schedule(static)
  for (long b = 0; b < num_blocks; ++b) {
    parts[b] = EvalLeaf(model, ds, examples, b);
  }
  EvalSums total;
  for (const EvalSums& s : parts) {
    total.loss_sum += s.loss_sum;
    total.correct += s.correct;
    total.count += s.count;
  }
  return total;
}

double FactorizationErrorSerial(const StrategyMatrix& c) {
  std::vector<double> x(c.steps());
  double total = 0.0;
  for (size_t j = 0; j < c.steps(); ++j) total += ColumnError(c, j, x);
  return total;
}

double FactorizationErrorParallel(const StrategyMatrix& c) {
  const long steps = static_cast<long>(c.steps());
  std::vector<double> columns(steps);
#pragma omp parallel
  {
    std::vector<double> x(steps);
#pragma omp for schedule(dynamic, 16)
    for (long j = 0; j < steps; ++j) columns[j] = ColumnError(c, j, x);
  }
  double total = 0.0;
  for (double v : columns) total += v;
  return total;
}

namespace {

Hypergraph AssembleEdges(size_t num_users,
                         std::vector<std::vector<UserId>>& edges) {
  std::vector<size_t> offsets{0};
  std::vector<UserId> users;
  offsets.reserve(edges.size() + 1);
  for (auto& e : edges) {
    users.insert(users.end(), e.begin(), e.end());
    offsets.push_back(users.size());
  }
  return *Hypergraph::FromCsr(num_users, std::move(offsets), std::move(users));
}

}  // namespace

Hypergraph GenerateRegularSerial(const GraphGenSpec& spec, size_t num_users) {
  std::vector<std::vector<UserId>> edges(spec.num_edges);
  for (size_t i = 0; i < spec.num_edges; ++i) {
    edges[i] = SampleRegularEdge(spec, num_users, i);
  }
  return AssembleEdges(num_users, edges);
}

Hypergraph GenerateRegularParallel(const GraphGenSpec& spec, size_t num_users) {
  const long n = static_cast<long>(spec.num_edges);
  std::vector<std::vector<UserId>> edges(n);
#pragma omp parallel for schedule(static, 1024)
  for (long i = 0; i < n; ++i) edges[i] = SampleRegularEdge(spec, num_users, i);
  return AssembleEdges(num_users, edges);
}

void FillRegressionExamplesSerial(
    RegressionDataset& ds, uint64_t seed, double stddev,
    const std::vector<std::vector<double>>& effective) {
  for (size_t i = 0; i < ds.num_examples(); ++i) {
    SampleRegressionExample(ds, seed, stddev, i, effective[ds.arity[i]]);
  }
}

void FillRegressionExamplesParallel(
    RegressionDataset& ds, uint64_t seed, double stddev,
    const std::vector<std::vector<double>>& effective) {
  const long n = static_cast<long>(ds.num_examples());
#pragma omp parallel for schedule(static, 256)
  for (long i = 0; i < n; ++i) {
    SampleRegressionExample(ds, seed, stddev, i, effective[ds.arity[i]]);
  }
}

}  // namespace mattrib
