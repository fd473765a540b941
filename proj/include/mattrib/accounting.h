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

#ifndef MATTRIB_ACCOUNTING_H_
#define MATTRIB_ACCOUNTING_H_

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace mattrib {

struct PrivacyBudget {
  double epsilon = 1.0;
  double delta = 1e-5;
};

// epsilon >= 0 and finite, delta in (0, 1).
absl::Status ValidateBudget(const PrivacyBudget& b);

// Identifiers recorded next to every calibrated sigma.
inline constexpr char kAccountantRdpGroup[] = "rdp_group_lift";
inline constexpr char kAccountantGaussian[] = "analytic_gaussian";
inline constexpr char kAccountantTable[] = "external_table";

// Standard normal CDF.
double NormalCdf(double x);

// Exact delta(epsilon) of the Gaussian mechanism with sensitivity 1 and noise
// standard deviation sigma.
double AnalyticGaussianDelta(double epsilon, double sigma);

// Smallest sigma with AnalyticGaussianDelta(eps, sigma / sensitivity) <= delta,
// computed for unit sensitivity and then scaled.
absl::StatusOr<double> CalibrateSigmaGaussian(const PrivacyBudget& budget,
                                              double sensitivity = 1.0);

// DP-MF over a min-sep schedule whose users appear at most k times: a single
// Gaussian mechanism with sensitivity sqrt(k) for unit-column-norm strategies.
absl::StatusOr<double> CalibrateSigmaDpMf(const PrivacyBudget& budget,
                                          uint32_t k);

// {1.25, 1.5, 2, 3, ..., 64, 128, 256}.
std::vector<double> DefaultRdpOrders();

struct RdpCurve {
  std::vector<double> orders;
  std::vector<double> epsilons;  // total over all steps
};

// Renyi DP of `steps` compositions of the Poisson-subsampled Gaussian with
// sampling probability p and noise multiplier sigma. Integer orders use the
// binomial expansion; other orders the two-sided series.
absl::StatusOr<RdpCurve> RdpSubsampledGaussian(double sigma, double p,
                                               size_t steps,
                                               std::span<const double> orders);

struct RdpConversion {
  double epsilon = 0.0;
  double order = 0.0;  // minimizing order
};

// min over orders of eps(a) + log(1/(a delta))/(a-1) + log(1-1/a), at least 0.
absl::StatusOr<RdpConversion> RdpToDp(const RdpCurve& curve, double delta);

struct GroupBudget {
  PrivacyBudget budget;
  bool saturated = false;  // (k-1) eps > 700; delta reported as 1
};

// (k eps, k e^{(k-1) eps} delta).
absl::StatusOr<GroupBudget> GroupLift(double epsilon, double delta, uint32_t k);

// Bracket and iteration count of the DP-SGD calibration. The bisection runs
// on log(sigma) with a fixed bracket and step count, so the result is a
// monotone function of the privacy requirement.
inline constexpr double kDpSgdSigmaMin = 1e-3;
inline constexpr double kDpSgdSigmaMax = 1e4;
inline constexpr int kDpSgdBisectionSteps = 48;

// Example-level (eps/k, delta e^{-(k-1) eps/k} / k) target whose group lift
// is exactly `budget`.
PrivacyBudget ExampleLevelTarget(const PrivacyBudget& budget, uint32_t k);

// Smallest sigma (to the bisection resolution) whose subsampled-Gaussian RDP
// guarantee, converted at the example-level delta and lifted to groups of k,
// meets `budget`. FailedPrecondition if sigma = kDpSgdSigmaMax fails.
absl::StatusOr<double> CalibrateSigmaDpSgd(
    const PrivacyBudget& budget, uint32_t k, double p, size_t steps,
    std::span<const double> orders = {});

// Externally supplied sigmas keyed by exact (epsilon, delta, k, p, steps).
class NoiseTable {
 public:
  using Key = std::tuple<double, double, uint32_t, double, size_t>;

  absl::Status Insert(const Key& key, double sigma);
  std::optional<double> Lookup(double epsilon, double delta, uint32_t k,
                               double p, size_t steps) const;
  size_t size() const { return entries_.size(); }

 private:
  std::map<Key, double> entries_;
};

// CSV with header `epsilon,delta,k,p,steps,sigma`.
absl::StatusOr<NoiseTable> ParseNoiseTable(std::istream& in);
absl::StatusOr<NoiseTable> LoadNoiseTable(const std::string& path);

}  // namespace mattrib

#endif  // MATTRIB_ACCOUNTING_H_
