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

#include "mattrib/graphgen.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <utility>

#include "absl/strings/str_cat.h"
#include "mattrib/kernels.h"
#include "mattrib/random.h"

namespace mattrib {

namespace {

absl::Status ValidateSpec(const GraphGenSpec& spec) {
  if (!(spec.expected_arity > 0) || !(spec.expected_degree > 0)) {
    return absl::InvalidArgumentError(
        "expected arity and expected degree must be positive");
  }
  if (!(spec.skew_alpha >= 0)) {
    return absl::InvalidArgumentError("skew alpha must be >= 0");
  }
  return absl::OkStatus();
}

// Fenwick tree over degree classes holding n_d * (1 + d)^alpha.
class WeightTree {
 public:
  explicit WeightTree(size_t n) : tree_(n + 1, 0.0) {}

  void Add(size_t i, double v) {
    for (++i; i < tree_.size(); i += i & (~i + 1)) tree_[i] += v;
  }
  double Prefix(size_t count) const {
    double s = 0.0;
    for (size_t i = count; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }
  // Smallest index whose inclusive prefix exceeds x.
  size_t Search(double x) const {
    size_t pos = 0;
    size_t mask = 1;
    while (mask * 2 < tree_.size()) mask *= 2;
    for (; mask > 0; mask /= 2) {
      const size_t next = pos + mask;
      if (next < tree_.size() && tree_[next] <= x) {
        pos = next;
        x -= tree_[next];
      }
    }
    return pos;
  }

 private:
  std::vector<double> tree_;
};

// -log(1 - p) / p, the ratio of the Poisson rate giving inclusion
// probability p to p itself; increasing in p.
double RateRatio(double p) { return p < 1e-12 ? 1.0 : -std::log1p(-p) / p; }

}  // namespace

double ZeroTruncatedPoissonRate(double mean) {
  if (!(mean > 1.0)) return 0.0;
  // lambda / (1 - e^-lambda) is increasing from 1; it exceeds lambda and is
  // below lambda + 1, so the root lies in [mean - 1, mean].
  double lo = mean - 1.0, hi = mean;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid / -std::expm1(-mid) < mean) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

absl::StatusOr<size_t> DerivedUserCount(const GraphGenSpec& spec) {
  if (auto s = ValidateSpec(spec); !s.ok()) return s;
  const double m = std::round(static_cast<double>(spec.num_edges) *
                              spec.expected_arity / spec.expected_degree);
  if (m < 1) {
    return absl::InvalidArgumentError(absl::StrCat(
        "derived user count m = ", m, " < 1 (edges=", spec.num_edges, ")"));
  }
  return static_cast<size_t>(m);
}

std::vector<UserId> SampleRegularEdge(const GraphGenSpec& spec,
                                      size_t num_users, size_t edge) {
  KeyedRng rng(spec.seed, Stream::kRegularEdge, edge);
  const double rate = ZeroTruncatedPoissonRate(spec.expected_arity);
  uint64_t n = 1;
  if (rate > 0) {
    std::poisson_distribution<uint64_t> arity_dist(rate);
    for (n = 0; n == 0;) n = arity_dist(rng);
  }
  n = std::min<uint64_t>(n, num_users);
  // Floyd's sampling of n distinct values from [0, num_users).
  std::vector<UserId> users;
  users.reserve(n);
  for (uint64_t j = num_users - n; j < num_users; ++j) {
    std::uniform_int_distribution<uint64_t> pick(0, j);
    const auto t = static_cast<UserId>(pick(rng));
    if (std::find(users.begin(), users.end(), t) == users.end()) {
      users.push_back(t);
    } else {
      users.push_back(static_cast<UserId>(j));
    }
  }
  std::sort(users.begin(), users.end());
  return users;
}

absl::StatusOr<Hypergraph> GenerateRegular(const GraphGenSpec& spec) {
  auto m = DerivedUserCount(spec);
  if (!m.ok()) return m.status();
  return GenerateRegularParallel(spec, *m);
}

absl::StatusOr<Hypergraph> GenerateSkewed(const GraphGenSpec& spec) {
  auto m_or = DerivedUserCount(spec);
  if (!m_or.ok()) return m_or.status();
  const size_t m = *m_or;
  const size_t num_edges = spec.num_edges;
  const double rate = ZeroTruncatedPoissonRate(spec.expected_arity);

  std::vector<double> weight(num_edges + 2);
  for (size_t d = 0; d < weight.size(); ++d) {
    weight[d] = std::pow(1.0 + static_cast<double>(d), spec.skew_alpha);
  }
  // Users bucketed by current degree; pos[u] is u's slot in its bucket.
  std::vector<std::vector<UserId>> bucket(num_edges + 2);
  std::vector<uint32_t> degree(m, 0);
  std::vector<size_t> pos(m);
  bucket[0].resize(m);
  for (UserId u = 0; u < m; ++u) {
    bucket[0][u] = u;
    pos[u] = u;
  }
  std::set<uint32_t> classes{0};
  WeightTree tree(num_edges + 2);
  tree.Add(0, static_cast<double>(m) * weight[0]);

  auto move_up = [&](UserId u) {
    const uint32_t d = degree[u];
    auto& from = bucket[d];
    const UserId last = from.back();
    from[pos[u]] = last;
    pos[last] = pos[u];
    from.pop_back();
    tree.Add(d, -weight[d]);
    if (from.empty()) classes.erase(d);
    auto& to = bucket[d + 1];
    pos[u] = to.size();
    to.push_back(u);
    tree.Add(d + 1, weight[d + 1]);
    classes.insert(d + 1);
    degree[u] = d + 1;
  };

  std::vector<size_t> offsets{0};
  std::vector<UserId> users;
  std::vector<UserId> edge;
  for (size_t i = 0; i < num_edges; ++i) {
    for (uint64_t attempt = 0; edge.empty(); ++attempt) {
      KeyedRng rng(spec.seed, Stream::kSkewedEdge, i, attempt);
      const double total = tree.Prefix(num_edges + 2);
      if (rate == 0) {
        // Limit of conditioning on a nonempty edge as the rate vanishes: one
        // user, chosen in proportion to its weight.
        size_t d = tree.Search(rng.Uniform() * total);
        if (d >= bucket.size() || bucket[d].empty()) d = *classes.rbegin();
        std::uniform_int_distribution<size_t> pick(0, bucket[d].size() - 1);
        edge.push_back(bucket[d][pick(rng)]);
        break;
      }
      // Classes whose probability reaches 1 are included outright; they are
      // the highest degrees.
      uint32_t capped_from = static_cast<uint32_t>(num_edges + 2);
      for (auto it = classes.rbegin(); it != classes.rend(); ++it) {
        if (rate * weight[*it] < total) break;
        capped_from = *it;
        edge.insert(edge.end(), bucket[*it].begin(), bucket[*it].end());
      }
      auto top = classes.lower_bound(capped_from);
      if (top == classes.begin()) break;
      const uint32_t top_uncapped = *std::prev(top);
      const double uncapped_weight = tree.Prefix(capped_from);
      const double ratio_max = RateRatio(rate * weight[top_uncapped] / total);
      // Poisson points with rate (E/W) * ratio_max * w_j dominate the exact
      // per-user rates -log(1 - p_j); thinning by ratio(p_j) / ratio_max
      // leaves independent inclusion with probability p_j.
      std::poisson_distribution<uint64_t> points(rate * ratio_max *
                                                 uncapped_weight / total);
      const uint64_t n = points(rng);
      const size_t num_fixed = edge.size();
      for (uint64_t k = 0; k < n; ++k) {
        const size_t d = tree.Search(rng.Uniform() * uncapped_weight);
        if (d >= capped_from || bucket[d].empty()) continue;  // rounding
        std::uniform_int_distribution<size_t> pick(0, bucket[d].size() - 1);
        const UserId u = bucket[d][pick(rng)];
        const double accept = RateRatio(rate * weight[d] / total) / ratio_max;
        if (rng.Uniform() >= accept) continue;
        if (std::find(edge.begin() + num_fixed, edge.end(), u) == edge.end()) {
          edge.push_back(u);
        }
      }
    }
    std::sort(edge.begin(), edge.end());
    for (UserId u : edge) move_up(u);
    users.insert(users.end(), edge.begin(), edge.end());
    offsets.push_back(users.size());
    edge.clear();
  }
  return Hypergraph::FromCsr(m, std::move(offsets), std::move(users));
}

std::map<uint32_t, size_t> DegreeHistogram(const Hypergraph& h) {
  std::map<uint32_t, size_t> hist;
  for (uint32_t d : h.degree_index()) ++hist[d];
  return hist;
}

double MeanArity(const Hypergraph& h) {
  if (h.num_edges() == 0) return 0.0;
  return static_cast<double>(h.total_incidence()) /
         static_cast<double>(h.num_edges());
}

}  // namespace mattrib
