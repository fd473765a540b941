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

#ifndef MATTRIB_STRATEGY_H_
#define MATTRIB_STRATEGY_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"

namespace mattrib {

// Lower-triangular b-banded strategy matrix C over `steps` rounds:
// C[i][j] = 0 unless 0 <= i - j < band. Stored column-wise, `band`
// coefficients per column (entries falling below row steps-1 are zero).
class StrategyMatrix {
 public:
  static StrategyMatrix Identity(size_t steps);

  // coeffs[j * band + r] holds C[j + r][j]. Requires a positive diagonal.
  static absl::StatusOr<StrategyMatrix> FromBands(size_t steps, size_t band,
                                                  std::vector<double> coeffs);

  // Toeplitz matrix with first column `first_column` (band = its length),
  // then every column rescaled to unit Euclidean norm.
  static StrategyMatrix NormalizedToeplitz(size_t steps,
                                           std::span<const double> first_column);

  size_t steps() const { return steps_; }
  size_t band() const { return band_; }

  // C[i][j]; zero outside the band.
  double at(size_t i, size_t j) const {
    if (i < j || i - j >= band_ || i >= steps_) return 0.0;
    return coeffs_[j * band_ + (i - j)];
  }
  double ColumnNorm(size_t j) const;
  // Row-major steps x steps copy.
  std::vector<double> Dense() const;

 private:
  size_t steps_ = 0;
  size_t band_ = 1;
  std::vector<double> coeffs_;
};

enum class StrategyMode { kIdentity, kOptimized };

// Identity, or a column-normalized banded Toeplitz strategy whose b
// coefficients are tuned by derivative-free coordinate descent (starting at
// the identity) to reduce the prefix-sum factorization error.
// Optimized coefficients are fitted on at most this many leading rounds and
// then extended to the full horizon, falling back to the identity if the
// extension is worse.
inline constexpr size_t kStrategyFitHorizon = 256;

absl::StatusOr<StrategyMatrix> BuildStrategy(size_t steps, size_t band,
                                             StrategyMode mode);

// ||A C^{-1}||_F^2 with A the all-ones lower-triangular prefix-sum workload.
double FactorizationError(const StrategyMatrix& c);

// i.i.d. N(0, 1) vector for one round, keyed by (seed, step).
std::vector<double> StandardNormalDraw(uint64_t seed, size_t step, size_t dims);

// Streams scale * (C^{-1} z)_i by banded forward substitution, holding only
// the last band-1 unscaled outputs.
class NoiseStream {
 public:
  NoiseStream(const StrategyMatrix& c, size_t dims, double scale,
              uint64_t seed);

  // Noise for the next round. Rounds past c.steps() are an error.
  absl::StatusOr<std::vector<double>> Next();
  size_t step() const { return step_; }

 private:
  const StrategyMatrix* c_;
  size_t dims_;
  double scale_;
  uint64_t seed_;
  size_t step_ = 0;
  // ring_[(i % (band-1)) * dims_ + d] holds output i for the last band-1 i.
  std::vector<double> ring_;
};

}  // namespace mattrib

#endif  // MATTRIB_STRATEGY_H_
