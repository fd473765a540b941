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

#ifndef MATTRIB_MODEL_H_
#define MATTRIB_MODEL_H_

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace mattrib {

// Logistic-regression model: P(y = 1 | f) = sigmoid(<weights, f> + intercept).
struct Model {
  std::vector<double> weights;
  double intercept = 0.0;

  explicit Model(size_t dim = 0) : weights(dim, 0.0) {}
  size_t dim() const { return weights.size(); }
  // Number of trainable parameters, intercept included.
  size_t num_params() const { return weights.size() + 1; }

  friend bool operator==(const Model&, const Model&) = default;
};

inline double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
inline double Softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// Binary checkpoint: "MADM", u32 dim, f64 weights, f64 intercept.
absl::Status SaveModel(const Model& m, const std::string& path);
absl::StatusOr<Model> LoadModel(const std::string& path);

}  // namespace mattrib

#endif  // MATTRIB_MODEL_H_
