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

#ifndef MATTRIB_ILP_H_
#define MATTRIB_ILP_H_

#include <cstddef>
#include <cstdint>
#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "mattrib/bounding.h"
#include "mattrib/hypergraph.h"

namespace mattrib {

// CPLEX LP text of the contribution-bounding program: maximize the number of
// selected copies subject to one `u<j>: ... <= k` row per user of nonzero
// degree. Variables x<i> are binary, or general integers with x<i> >= 0 when
// duplicates are allowed.
std::string RenderCbIlp(const Hypergraph& h, uint32_t k, bool allow_dup);
absl::Status ExportCbIlp(const Hypergraph& h, uint32_t k, bool allow_dup,
                         const std::string& path);

// Largest |E| * T accepted by the min-sep export.
inline constexpr size_t kMaxMinSepVariables = 1'000'000;

// CPLEX LP text of the min-sep program over binaries x<i>_<t> (t = 1..T):
// minimize k subject to, for every user j of nonzero degree, window rows
// w<j>_<t> (at most one occurrence in batches t..t+b-1, for t = 1..T-b+1, or
// a single window over all T batches when b > T), a total row u<j> (at most
// k occurrences), and batch rows b<t> (exactly B edges in batch t).
absl::StatusOr<std::string> RenderMinSepIlp(const Hypergraph& h, size_t steps,
                                            size_t batch_size, size_t min_sep);
absl::Status ExportMinSepIlp(const Hypergraph& h, size_t steps,
                             size_t batch_size, size_t min_sep,
                             const std::string& path);

// Largest instance accepted by ExactSolveCb.
inline constexpr size_t kMaxExactEdges = 64;

struct ExactLimits {
  uint64_t max_nodes = 100'000'000;
  double max_seconds = 60.0;
};

struct ExactResult {
  BoundingResult result;
  bool optimal = false;  // false if a cap stopped the search
  uint64_t nodes = 0;
};

// Maximum-size selection with contribution bound k, by depth-first branch
// and bound warm-started from the greedy solution. With duplicates each
// edge's multiplicity ranges over 0..k.
absl::StatusOr<ExactResult> ExactSolveCb(const Hypergraph& h, uint32_t k,
                                         bool allow_dup,
                                         const ExactLimits& limits = {});

}  // namespace mattrib

#endif  // MATTRIB_ILP_H_
