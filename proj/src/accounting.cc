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

#include "mattrib/accounting.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"

namespace mattrib {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double LogAdd(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// log(exp(a) - exp(b)); clamps to -inf when b >= a.
double LogSub(double a, double b) {
  if (b == -kInf) return a;
  if (b >= a) return -kInf;
  return a + std::log1p(-std::exp(b - a));
}

double LogErfc(double x) {
  if (x < 20.0) return std::log(std::erfc(x));
  const double r = 1.0 / (x * x);
  return -x * x - std::log(x) - 0.5 * std::log(std::numbers::pi) +
         std::log1p(r * (-0.5 + r * (0.75 - r * 1.875)));
}

double LogNormalCdf(double x) { return std::log(0.5) + LogErfc(-x / std::numbers::sqrt2); }

// log A_alpha for integer alpha.
double LogAInt(double q, double sigma, int alpha) {
  double log_a = -kInf;
  const double lq = std::log(q);
  const double l1q = std::log1p(-q);
  for (int i = 0; i <= alpha; ++i) {
    const double log_coef = std::lgamma(alpha + 1.0) - std::lgamma(i + 1.0) -
                            std::lgamma(alpha - i + 1.0);
    const double s = log_coef + i * lq + (alpha - i) * l1q +
                     (static_cast<double>(i) * i - i) / (2.0 * sigma * sigma);
    log_a = LogAdd(log_a, s);
  }
  return log_a;
}

// log A_alpha for fractional alpha.
double LogAFrac(double q, double sigma, double alpha) {
  double log_a0 = -kInf;
  double log_a1 = -kInf;
  const double z0 = sigma * sigma * std::log(1.0 / q - 1.0) + 0.5;
  const double lq = std::log(q);
  const double l1q = std::log1p(-q);
  double log_coef = 0.0;  // log |binom(alpha, i)|
  double sign = 1.0;
  for (int i = 0; i < 100000; ++i) {
    if (i > 0) {
      const double factor = (alpha - (i - 1)) / i;
      if (factor < 0) sign = -sign;
      log_coef += std::log(std::abs(factor));
    }
    const double j = alpha - i;
    const double log_t0 = log_coef + i * lq + j * l1q;
    const double log_t1 = log_coef + j * lq + i * l1q;
    const double log_e0 =
        std::log(0.5) + LogErfc((i - z0) / (std::numbers::sqrt2 * sigma));
    const double log_e1 =
        std::log(0.5) + LogErfc((z0 - j) / (std::numbers::sqrt2 * sigma));
    const double log_s0 =
        log_t0 + (static_cast<double>(i) * i - i) / (2 * sigma * sigma) + log_e0;
    const double log_s1 = log_t1 + (j * j - j) / (2 * sigma * sigma) + log_e1;
    if (sign > 0) {
      log_a0 = LogAdd(log_a0, log_s0);
      log_a1 = LogAdd(log_a1, log_s1);
    } else {
      log_a0 = LogSub(log_a0, log_s0);
      log_a1 = LogSub(log_a1, log_s1);
    }
    if (std::max(log_s0, log_s1) < -30) break;
  }
  return LogAdd(log_a0, log_a1);
}

double RdpPerStep(double q, double sigma, double alpha) {
  if (q == 1.0) return alpha / (2.0 * sigma * sigma);
  if (std::isinf(alpha)) return kInf;
  const double log_a = alpha == std::floor(alpha)
                           ? LogAInt(q, sigma, static_cast<int>(alpha))
                           : LogAFrac(q, sigma, alpha);
  return log_a / (alpha - 1.0);
}

}  // namespace

absl::Status ValidateBudget(const PrivacyBudget& b) {
  if (!(b.epsilon >= 0) || std::isinf(b.epsilon)) {
    return absl::InvalidArgumentError("epsilon must be finite and >= 0");
  }
  if (!(b.delta > 0 && b.delta < 1)) {
    return absl::InvalidArgumentError("delta must lie in (0, 1)");
  }
  return absl::OkStatus();
}

double NormalCdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double AnalyticGaussianDelta(double epsilon, double sigma) {
  const double a = 1.0 / (2.0 * sigma) - epsilon * sigma;
  const double b = -1.0 / (2.0 * sigma) - epsilon * sigma;
  const double first = NormalCdf(a);
  const double second = std::exp(epsilon + LogNormalCdf(b));
  return std::max(0.0, first - second);
}

absl::StatusOr<double> CalibrateSigmaGaussian(const PrivacyBudget& budget,
                                              double sensitivity) {
  if (auto s = ValidateBudget(budget); !s.ok()) return s;
  if (!(sensitivity > 0) || std::isinf(sensitivity)) {
    return absl::InvalidArgumentError("sensitivity must be positive");
  }
  double lo = 1e-8;
  double hi = 1.0;
  if (AnalyticGaussianDelta(budget.epsilon, lo) <= budget.delta) {
    return lo * sensitivity;
  }
  while (AnalyticGaussianDelta(budget.epsilon, hi) > budget.delta) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) return absl::InternalError("sigma bracket diverged");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (AnalyticGaussianDelta(budget.epsilon, mid) > budget.delta) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi * sensitivity;
}

absl::StatusOr<double> CalibrateSigmaDpMf(const PrivacyBudget& budget,
                                          uint32_t k) {
  if (k < 1) return absl::InvalidArgumentError("k must be >= 1");
  return CalibrateSigmaGaussian(budget, std::sqrt(static_cast<double>(k)));
}

std::vector<double> DefaultRdpOrders() {
  std::vector<double> orders = {1.25, 1.5};
  for (int a = 2; a <= 64; ++a) orders.push_back(a);
  orders.push_back(128);
  orders.push_back(256);
  return orders;
}

absl::StatusOr<RdpCurve> RdpSubsampledGaussian(double sigma, double p,
                                               size_t steps,
                                               std::span<const double> orders) {
  if (!(sigma > 0)) return absl::InvalidArgumentError("sigma must be > 0");
  if (!(p > 0 && p <= 1)) {
    return absl::InvalidArgumentError("sampling probability must be in (0, 1]");
  }
  RdpCurve curve;
  for (double a : orders) {
    if (!(a > 1)) return absl::InvalidArgumentError("orders must exceed 1");
    curve.orders.push_back(a);
    curve.epsilons.push_back(steps == 0 ? 0.0
                                        : steps * RdpPerStep(p, sigma, a));
  }
  return curve;
}

absl::StatusOr<RdpConversion> RdpToDp(const RdpCurve& curve, double delta) {
  if (curve.orders.empty() || curve.orders.size() != curve.epsilons.size()) {
    return absl::InvalidArgumentError("empty or malformed RDP curve");
  }
  if (!(delta > 0 && delta < 1)) {
    return absl::InvalidArgumentError("delta must lie in (0, 1)");
  }
  RdpConversion best{kInf, curve.orders.front()};
  for (size_t i = 0; i < curve.orders.size(); ++i) {
    const double a = curve.orders[i];
    const double eps = curve.epsilons[i] - (std::log(delta) + std::log(a)) / (a - 1) +
                       std::log1p(-1.0 / a);
    if (eps < best.epsilon) best = {eps, a};
  }
  best.epsilon = std::max(0.0, best.epsilon);
  return best;
}

absl::StatusOr<GroupBudget> GroupLift(double epsilon, double delta, uint32_t k) {
  if (k < 1) return absl::InvalidArgumentError("k must be >= 1");
  GroupBudget out;
  out.budget.epsilon = k * epsilon;
  const double exponent = (k - 1.0) * epsilon;
  if (exponent > 700) {
    out.saturated = true;
    out.budget.delta = 1.0;
    return out;
  }
  out.budget.delta = k * std::exp(exponent) * delta;
  return out;
}

PrivacyBudget ExampleLevelTarget(const PrivacyBudget& budget, uint32_t k) {
  return {budget.epsilon / k,
          budget.delta * std::exp(-(k - 1.0) * budget.epsilon / k) / k};
}

absl::StatusOr<double> CalibrateSigmaDpSgd(const PrivacyBudget& budget,
                                           uint32_t k, double p, size_t steps,
                                           std::span<const double> orders) {
  if (auto s = ValidateBudget(budget); !s.ok()) return s;
  if (k < 1) return absl::InvalidArgumentError("k must be >= 1");
  if (!(p > 0 && p <= 1)) {
    return absl::InvalidArgumentError("sampling probability must be in (0, 1]");
  }
  std::vector<double> default_orders;
  if (orders.empty()) {
    default_orders = DefaultRdpOrders();
    orders = default_orders;
  }
  const PrivacyBudget target = ExampleLevelTarget(budget, k);
  auto meets = [&](double sigma) -> absl::StatusOr<bool> {
    auto curve = RdpSubsampledGaussian(sigma, p, steps, orders);
    if (!curve.ok()) return curve.status();
    auto dp = RdpToDp(*curve, target.delta);
    if (!dp.ok()) return dp.status();
    return dp->epsilon <= target.epsilon;
  };
  auto top = meets(kDpSgdSigmaMax);
  if (!top.ok()) return top.status();
  if (!*top) {
    return absl::FailedPreconditionError(absl::StrCat(
        "infeasible: sigma=", kDpSgdSigmaMax, " does not reach eps=",
        budget.epsilon));
  }
  double lo = std::log(kDpSgdSigmaMin);
  double hi = std::log(kDpSgdSigmaMax);
  auto bottom = meets(kDpSgdSigmaMin);
  if (!bottom.ok()) return bottom.status();
  if (*bottom) return kDpSgdSigmaMin;
  for (int it = 0; it < kDpSgdBisectionSteps; ++it) {
    const double mid = 0.5 * (lo + hi);
    auto ok = meets(std::exp(mid));
    if (!ok.ok()) return ok.status();
    (*ok ? hi : lo) = mid;
  }
  return std::exp(hi);
}

absl::Status NoiseTable::Insert(const Key& key, double sigma) {
  if (!entries_.emplace(key, sigma).second) {
    return absl::InvalidArgumentError(absl::StrCat(
        "duplicate noise-table entry eps=", std::get<0>(key),
        " delta=", std::get<1>(key), " k=", std::get<2>(key),
        " p=", std::get<3>(key), " steps=", std::get<4>(key)));
  }
  return absl::OkStatus();
}

std::optional<double> NoiseTable::Lookup(double epsilon, double delta,
                                         uint32_t k, double p,
                                         size_t steps) const {
  auto it = entries_.find(Key{epsilon, delta, k, p, steps});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

absl::StatusOr<NoiseTable> ParseNoiseTable(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      absl::StripAsciiWhitespace(line) != "epsilon,delta,k,p,steps,sigma") {
    return absl::InvalidArgumentError(
        "noise table must start with header epsilon,delta,k,p,steps,sigma");
  }
  NoiseTable table;
  for (int lineno = 2; std::getline(in, line); ++lineno) {
    const absl::string_view row = absl::StripAsciiWhitespace(line);
    if (row.empty()) continue;
    const std::vector<absl::string_view> f = absl::StrSplit(row, ',');
    double eps, delta, p, sigma;
    uint32_t k;
    uint64_t steps;
    if (f.size() != 6 || !absl::SimpleAtod(f[0], &eps) ||
        !absl::SimpleAtod(f[1], &delta) || !absl::SimpleAtoi(f[2], &k) ||
        !absl::SimpleAtod(f[3], &p) || !absl::SimpleAtoi(f[4], &steps) ||
        !absl::SimpleAtod(f[5], &sigma) || !(sigma > 0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("noise table line ", lineno, ": malformed row"));
    }
    if (auto s = table.Insert({eps, delta, k, p, steps}, sigma); !s.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("noise table line ", lineno, ": ", s.message()));
    }
  }
  return table;
}

absl::StatusOr<NoiseTable> LoadNoiseTable(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  return ParseNoiseTable(in);
}

}  // namespace mattrib
