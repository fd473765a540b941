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

#include "mattrib/strategy.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "absl/strings/str_cat.h"
#include "mattrib/kernels.h"
#include "mattrib/random.h"

namespace mattrib {

StrategyMatrix StrategyMatrix::Identity(size_t steps) {
  StrategyMatrix c;
  c.steps_ = steps;
  c.band_ = 1;
  c.coeffs_.assign(steps, 1.0);
  return c;
}

absl::StatusOr<StrategyMatrix> StrategyMatrix::FromBands(
    size_t steps, size_t band, std::vector<double> coeffs) {
  if (band < 1 || band > std::max<size_t>(steps, 1)) {
    return absl::InvalidArgumentError(
        absl::StrCat("band ", band, " outside [1, ", steps, "]"));
  }
  if (coeffs.size() != steps * band) {
    return absl::InvalidArgumentError("coefficient count != steps * band");
  }
  for (size_t j = 0; j < steps; ++j) {
    if (!(coeffs[j * band] > 0.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("diagonal entry ", j, " is not positive"));
    }
    // Entries below the last row do not exist.
    for (size_t r = steps - j; r < band; ++r) coeffs[j * band + r] = 0.0;
  }
  StrategyMatrix c;
  c.steps_ = steps;
  c.band_ = band;
  c.coeffs_ = std::move(coeffs);
  return c;
}

StrategyMatrix StrategyMatrix::NormalizedToeplitz(
    size_t steps, std::span<const double> first_column) {
  const size_t band = first_column.size();
  StrategyMatrix c;
  c.steps_ = steps;
  c.band_ = band;
  c.coeffs_.assign(steps * band, 0.0);
  for (size_t j = 0; j < steps; ++j) {
    const size_t len = std::min(band, steps - j);
    double norm2 = 0.0;
    for (size_t r = 0; r < len; ++r) norm2 += first_column[r] * first_column[r];
    const double inv = 1.0 / std::sqrt(norm2);
    for (size_t r = 0; r < len; ++r) {
      c.coeffs_[j * band + r] = first_column[r] * inv;
    }
  }
  return c;
}

double StrategyMatrix::ColumnNorm(size_t j) const {
  double s = 0.0;
  for (size_t r = 0; r < band_; ++r) {
    s += coeffs_[j * band_ + r] * coeffs_[j * band_ + r];
  }
  return std::sqrt(s);
}

std::vector<double> StrategyMatrix::Dense() const {
  std::vector<double> out(steps_ * steps_, 0.0);
  for (size_t j = 0; j < steps_; ++j) {
    for (size_t r = 0; r < band_ && j + r < steps_; ++r) {
      out[(j + r) * steps_ + j] = coeffs_[j * band_ + r];
    }
  }
  return out;
}

double FactorizationError(const StrategyMatrix& c) {
  return FactorizationErrorParallel(c);
}

absl::StatusOr<StrategyMatrix> BuildStrategy(size_t steps, size_t band,
                                             StrategyMode mode) {
  if (band < 1 || band > steps) {
    return absl::InvalidArgumentError(
        absl::StrCat("need 1 <= band <= steps, got band=", band,
                     " steps=", steps));
  }
  if (mode == StrategyMode::kIdentity || band == 1) {
    return StrategyMatrix::Identity(steps);
  }
  std::vector<double> theta(band, 0.0);
  theta[0] = 1.0;
  const size_t fit_steps = std::min(steps, kStrategyFitHorizon);
  auto objective = [fit_steps](std::span<const double> t) {
    return FactorizationError(StrategyMatrix::NormalizedToeplitz(fit_steps, t));
  };
  double best = objective(theta);
  double step = 0.5;
  constexpr double kMinStep = 1e-4;
  constexpr int kMaxSweeps = 400;
  for (int sweep = 0; sweep < kMaxSweeps && step >= kMinStep; ++sweep) {
    bool improved = false;
    // The diagonal fixes the scale, which column normalization removes.
    for (size_t r = 1; r < band; ++r) {
      for (double dir : {-1.0, 1.0}) {
        std::vector<double> trial = theta;
        trial[r] += dir * step;
        const double f = objective(trial);
        if (f < best) {
          best = f;
          theta = std::move(trial);
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  StrategyMatrix fitted = StrategyMatrix::NormalizedToeplitz(steps, theta);
  if (fit_steps < steps) {
    StrategyMatrix identity = StrategyMatrix::Identity(steps);
    if (FactorizationError(identity) < FactorizationError(fitted)) return identity;
  }
  return fitted;
}

std::vector<double> StandardNormalDraw(uint64_t seed, size_t step,
                                       size_t dims) {
  KeyedRng rng(seed, Stream::kGaussianNoise, step);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z(dims);
  for (double& v : z) v = normal(rng);
  return z;
}

NoiseStream::NoiseStream(const StrategyMatrix& c, size_t dims, double scale,
                         uint64_t seed)
    : c_(&c),
      dims_(dims),
      scale_(scale),
      seed_(seed),
      ring_((c.band() - 1) * dims, 0.0) {}

absl::StatusOr<std::vector<double>> NoiseStream::Next() {
  const size_t i = step_;
  if (i >= c_->steps()) {
    return absl::OutOfRangeError(absl::StrCat(
        "noise requested for round ", i, " of a ", c_->steps(),
        "-round strategy"));
  }
  std::vector<double> out = StandardNormalDraw(seed_, i, dims_);
  const size_t lag = c_->band() - 1;
  // Solve row i of C * out = z using the previous `lag` outputs.
  for (size_t r = 1; r <= lag && r <= i; ++r) {
    const double coef = c_->at(i, i - r);
    if (coef == 0.0) continue;
    const double* prev = ring_.data() + ((i - r) % lag) * dims_;
    for (size_t d = 0; d < dims_; ++d) out[d] -= coef * prev[d];
  }
  const double diag = c_->at(i, i);
  for (double& v : out) v /= diag;
  if (lag > 0) {
    std::copy(out.begin(), out.end(), ring_.begin() + (i % lag) * dims_);
  }
  for (double& v : out) v *= scale_;
  ++step_;
  return out;
}

}  // namespace mattrib
