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

#include "mattrib/bounding.h"

#include <algorithm>
#include <iterator>
#include <numeric>
#include <random>
#include <utility>

#include "absl/strings/str_cat.h"
#include "mattrib/random.h"

namespace mattrib {

namespace {

// Per-user selected-copy counts during a greedy run.
class LoadTracker {
 public:
  LoadTracker(const Hypergraph& h, uint32_t k)
      : h_(h), k_(k), load_(h.num_users(), 0) {}

  bool Fits(EdgeId e) const {
    for (UserId u : h_.users(e)) {
      if (load_[u] >= k_) return false;
    }
    return true;
  }
  void Take(EdgeId e) {
    for (UserId u : h_.users(e)) ++load_[u];
  }

 private:
  const Hypergraph& h_;
  uint32_t k_;
  std::vector<uint32_t> load_;
};

// Rebuilds a Selection from dense per-edge counts in one ordered sweep.
Selection FromCounts(const std::vector<uint32_t>& counts) {
  Selection s;
  for (EdgeId e = 0; e < counts.size(); ++e) s.Add(e, counts[e]);
  return s;
}

absl::Status CheckInterleave(const InterleaveSpec& spec, uint32_t k) {
  if (k < 1) return absl::InvalidArgumentError("k must be >= 1");
  if (spec.threshold < 1 || spec.low_run < 1 || spec.high_run < 1) {
    return absl::InvalidArgumentError(
        "interleave threshold and run lengths must be >= 1");
  }
  return absl::OkStatus();
}

// Runs the interleaved stream, reporting each visit to `visit`.
template <typename Visit>
std::vector<uint32_t> RunInterleaved(const Hypergraph& h, uint32_t k,
                                     const InterleaveSpec& spec,
                                     const OrderSpec& order, Visit&& visit) {
  struct Group {
    std::vector<EdgeId> edges;
    uint32_t run = 1;
    size_t cursor = 0;
    size_t misses = 0;  // consecutive visits of this group without an add
    bool exhausted() const { return edges.empty() || misses >= edges.size(); }
  };
  Group groups[2];
  groups[0].run = spec.low_run;
  groups[1].run = spec.high_run;
  for (EdgeId e : SortedByArity(h, order)) {
    groups[h.arity(e) <= spec.threshold ? 0 : 1].edges.push_back(e);
  }
  LoadTracker tracker(h, k);
  std::vector<uint32_t> counts(h.num_edges(), 0);
  for (int turn = 0; !(groups[0].exhausted() && groups[1].exhausted());
       turn ^= 1) {
    Group& g = groups[turn];
    for (uint32_t r = 0; r < g.run && !g.exhausted(); ++r) {
      const EdgeId e = g.edges[g.cursor];
      g.cursor = (g.cursor + 1) % g.edges.size();
      const bool add = (spec.allow_dup || counts[e] == 0) && tracker.Fits(e);
      if (add) {
        tracker.Take(e);
        ++counts[e];
        g.misses = 0;
      } else {
        ++g.misses;
      }
      visit(e, add);
    }
  }
  return counts;
}

}  // namespace

std::vector<EdgeId> SortedByArity(const Hypergraph& h, const OrderSpec& order) {
  std::vector<EdgeId> edges(h.num_edges());
  std::iota(edges.begin(), edges.end(), 0);
  if (order.tie == TieBreak::kSeededShuffle) {
    KeyedRng rng(order.seed, Stream::kTieShuffle);
    std::shuffle(edges.begin(), edges.end(), rng);
  }
  std::stable_sort(edges.begin(), edges.end(), [&h](EdgeId a, EdgeId b) {
    return h.arity(a) < h.arity(b);
  });
  return edges;
}

BoundingResult Summarize(const Hypergraph& h, Selection selection) {
  BoundingResult r;
  r.achieved_k = MaxContribution(h, selection);
  r.distinct_count = selection.distinct_count();
  r.total_count = selection.total_count();
  double arity_sum = 0.0;
  for (const auto& [e, c] : selection.counts()) {
    arity_sum += static_cast<double>(h.arity(e)) * c;
  }
  r.avg_arity = r.total_count == 0 ? 0.0 : arity_sum / r.total_count;
  r.selection = std::move(selection);
  return r;
}

BoundingResult GreedyNoDup(const Hypergraph& h, uint32_t k,
                           const OrderSpec& order) {
  LoadTracker tracker(h, k);
  std::vector<uint32_t> counts(h.num_edges(), 0);
  for (EdgeId e : SortedByArity(h, order)) {
    if (tracker.Fits(e)) {
      tracker.Take(e);
      counts[e] = 1;
    }
  }
  return Summarize(h, FromCounts(counts));
}

BoundingResult GreedyDup(const Hypergraph& h, uint32_t k,
                         const OrderSpec& order) {
  const std::vector<EdgeId> sorted = SortedByArity(h, order);
  LoadTracker tracker(h, k);
  std::vector<uint32_t> counts(h.num_edges(), 0);
  // A full pass without additions means every edge is blocked for good:
  // loads never decrease.
  for (bool added = true; added;) {
    added = false;
    for (EdgeId e : sorted) {
      if (tracker.Fits(e)) {
        tracker.Take(e);
        ++counts[e];
        added = true;
      }
    }
  }
  return Summarize(h, FromCounts(counts));
}

absl::StatusOr<BoundingResult> GreedyMinSep(const Hypergraph& h, size_t steps,
                                            size_t batch_size, size_t min_sep,
                                            const OrderSpec& order) {
  if (steps < 1 || batch_size < 1 || min_sep < 1) {
    return absl::InvalidArgumentError("steps, batch size and b must be >= 1");
  }
  const std::vector<EdgeId> sorted = SortedByArity(h, order);
  const size_t target = steps * batch_size;
  constexpr size_t kNever = static_cast<size_t>(-1);
  std::vector<size_t> last(h.num_users(), kNever);
  Schedule schedule;
  schedule.batch_size = batch_size;
  schedule.min_sep = min_sep;
  std::vector<uint32_t> counts(h.num_edges(), 0);
  size_t placed = 0;
  size_t misses = 0;
  for (size_t idx = 0; placed < target; idx = (idx + 1) % sorted.size()) {
    if (sorted.empty() || misses >= sorted.size()) {
      return absl::NotFoundError(absl::StrCat(
          "no schedule found: placed ", placed, " of ", target,
          " entries with b=", min_sep));
    }
    const EdgeId e = sorted[idx];
    const size_t t = placed / batch_size;
    bool fits = true;
    for (UserId u : h.users(e)) {
      if (last[u] != kNever && t - last[u] < min_sep) {
        fits = false;
        break;
      }
    }
    if (!fits) {
      ++misses;
      continue;
    }
    misses = 0;
    for (UserId u : h.users(e)) last[u] = t;
    if (t == schedule.batches.size()) schedule.batches.emplace_back();
    schedule.batches[t].push_back(e);
    ++counts[e];
    ++placed;
  }
  BoundingResult r = Summarize(h, FromCounts(counts));
  r.schedule = std::move(schedule);
  return r;
}

absl::StatusOr<BoundingResult> GreedyInterleaved(const Hypergraph& h,
                                                 uint32_t k,
                                                 const InterleaveSpec& spec,
                                                 const OrderSpec& order) {
  if (auto s = CheckInterleave(spec, k); !s.ok()) return s;
  auto counts = RunInterleaved(h, k, spec, order, [](EdgeId, bool) {});
  return Summarize(h, FromCounts(counts));
}

absl::StatusOr<std::vector<InterleaveStep>> TraceInterleaved(
    const Hypergraph& h, uint32_t k, const InterleaveSpec& spec,
    const OrderSpec& order) {
  if (auto s = CheckInterleave(spec, k); !s.ok()) return s;
  std::vector<InterleaveStep> trace;
  RunInterleaved(h, k, spec, order, [&trace](EdgeId e, bool added) {
    trace.push_back({e, added});
  });
  return trace;
}

double MedianArity(const Hypergraph& h) {
  const size_t n = h.num_edges();
  if (n == 0) return 0.0;
  std::vector<size_t> a(n);
  for (EdgeId e = 0; e < n; ++e) a[e] = h.arity(e);
  std::nth_element(a.begin(), a.begin() + n / 2, a.end());
  const double upper = static_cast<double>(a[n / 2]);
  if (n % 2 == 1) return upper;
  const double lower =
      static_cast<double>(*std::max_element(a.begin(), a.begin() + n / 2));
  return 0.5 * (lower + upper);
}

std::vector<EdgeId> RandomPoolEdges(const Hypergraph& h, RandomPool pool) {
  const double median = MedianArity(h);
  std::vector<EdgeId> out;
  for (EdgeId e = 0; e < h.num_edges(); ++e) {
    const double a = static_cast<double>(h.arity(e));
    if (pool == RandomPool::kAll || (pool == RandomPool::kLow && a <= median) ||
        (pool == RandomPool::kHigh && a > median)) {
      out.push_back(e);
    }
  }
  return out;
}

absl::StatusOr<Selection> RandomBaseline(const Hypergraph& h,
                                         size_t target_size, RandomPool pool,
                                         uint64_t seed) {
  const std::vector<EdgeId> eligible = RandomPoolEdges(h, pool);
  if (target_size > eligible.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("pool has ", eligible.size(), " edges, ", target_size,
                     " requested"));
  }
  std::vector<EdgeId> chosen;
  chosen.reserve(target_size);
  KeyedRng rng(seed, Stream::kRandomBaseline);
  std::sample(eligible.begin(), eligible.end(), std::back_inserter(chosen),
              target_size, rng);
  Selection s;
  for (EdgeId e : chosen) s.Add(e);
  return s;
}

std::vector<size_t> ParetoFilter(std::span<const SizeArityPoint> points) {
  std::vector<size_t> idx(points.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    if (points[a].size != points[b].size) return points[a].size > points[b].size;
    return points[a].avg_arity > points[b].avg_arity;
  });
  // Sweep in decreasing size. A point survives iff it has the largest arity
  // within its size group and beats every strictly larger point's arity.
  std::vector<size_t> keep;
  bool have_larger = false;
  double best_larger = 0.0;
  for (size_t g = 0; g < idx.size();) {
    size_t end = g;
    while (end < idx.size() && points[idx[end]].size == points[idx[g]].size) {
      ++end;
    }
    const double group_max = points[idx[g]].avg_arity;
    for (size_t r = g; r < end; ++r) {
      const double a = points[idx[r]].avg_arity;
      if (a == group_max && (!have_larger || a > best_larger)) {
        keep.push_back(idx[r]);
      }
    }
    if (!have_larger || group_max > best_larger) best_larger = group_max;
    have_larger = true;
    g = end;
  }
  std::sort(keep.begin(), keep.end());
  return keep;
}

}  // namespace mattrib
