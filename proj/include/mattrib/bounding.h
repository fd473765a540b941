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

#ifndef MATTRIB_BOUNDING_H_
#define MATTRIB_BOUNDING_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "mattrib/hypergraph.h"

namespace mattrib {

// Order in which greedy passes visit edges: ascending arity, ties broken by
// edge id or by a seeded shuffle.
enum class TieBreak { kEdgeId, kSeededShuffle };

struct OrderSpec {
  TieBreak tie = TieBreak::kEdgeId;
  uint64_t seed = 0;
};

std::vector<EdgeId> SortedByArity(const Hypergraph& h,
                                  const OrderSpec& order = {});

// Output of a contribution-bounding algorithm. `schedule` is set only for
// min-sep scheduling; `selection` always holds the multiset of chosen edges.
struct BoundingResult {
  Selection selection;
  std::optional<Schedule> schedule;
  uint32_t achieved_k = 0;
  size_t distinct_count = 0;
  size_t total_count = 0;
  double avg_arity = 0.0;  // over selected copies
};

// Fills achieved_k, counts and avg_arity from `selection`.
BoundingResult Summarize(const Hypergraph& h, Selection selection);

// One pass in sorted order; an edge is kept iff all its users have fewer than
// k selected edges. The result is maximal.
BoundingResult GreedyNoDup(const Hypergraph& h, uint32_t k,
                           const OrderSpec& order = {});

// Repeated passes adding copies while the bound holds, until a pass adds
// nothing. The first pass coincides with GreedyNoDup.
BoundingResult GreedyDup(const Hypergraph& h, uint32_t k,
                         const OrderSpec& order = {});

// Appends edges in repeated sorted order to a list cut into batches of
// `batch_size`; an edge is appended iff each of its users last appeared at
// least `min_sep` batches earlier. Succeeds once steps * batch_size entries
// are placed; NotFound if a full pass places nothing first.
absl::StatusOr<BoundingResult> GreedyMinSep(const Hypergraph& h, size_t steps,
                                            size_t batch_size, size_t min_sep,
                                            const OrderSpec& order = {});

struct InterleaveSpec {
  uint32_t threshold = 2;  // low group: arity <= threshold
  uint32_t low_run = 1;    // consecutive low-group candidates per turn
  uint32_t high_run = 1;   // consecutive high-group candidates per turn
  bool allow_dup = true;
};

// Greedy with the candidate stream alternating `low_run` edges of the
// low-arity group and `high_run` of the high-arity group, each group cycling
// through its own sorted order. An exhausted group is skipped. Insertion and
// termination follow GreedyDup (or GreedyNoDup without duplicates).
absl::StatusOr<BoundingResult> GreedyInterleaved(const Hypergraph& h,
                                                 uint32_t k,
                                                 const InterleaveSpec& spec,
                                                 const OrderSpec& order = {});

// Trace of the candidate stream visited by GreedyInterleaved, for tests and
// diagnostics: (edge, added) in visit order.
struct InterleaveStep {
  EdgeId edge;
  bool added;
};
absl::StatusOr<std::vector<InterleaveStep>> TraceInterleaved(
    const Hypergraph& h, uint32_t k, const InterleaveSpec& spec,
    const OrderSpec& order = {});

enum class RandomPool { kAll, kLow, kHigh };

// Median of the edge arities (mean of the middle pair for even counts).
double MedianArity(const Hypergraph& h);

// Edges eligible for the pool: all, arity <= median, or arity > median.
std::vector<EdgeId> RandomPoolEdges(const Hypergraph& h, RandomPool pool);

// Uniform sample of `target_size` distinct edges from the pool. Ignores the
// contribution bound.
absl::StatusOr<Selection> RandomBaseline(const Hypergraph& h,
                                         size_t target_size, RandomPool pool,
                                         uint64_t seed);

struct SizeArityPoint {
  double size = 0;
  double avg_arity = 0;
};

// Indices (ascending) of points not strictly dominated when both
// coordinates are maximized.
std::vector<size_t> ParetoFilter(std::span<const SizeArityPoint> points);

}  // namespace mattrib

#endif  // MATTRIB_BOUNDING_H_
