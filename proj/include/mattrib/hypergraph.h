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

#ifndef MATTRIB_HYPERGRAPH_H_
#define MATTRIB_HYPERGRAPH_H_

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace mattrib {

using UserId = uint32_t;
using EdgeId = uint32_t;

// Attribution hypergraph: users are dense ids in [0, num_users), every edge
// (training example) is a non-empty set of distinct users. Edges are stored
// in CSR form and keep the user order they were built with. Immutable once
// built.
class Hypergraph {
 public:
  Hypergraph() : offsets_{0} {}

  // Validates every edge: non-empty, users < num_users, no repeats.
  static absl::StatusOr<Hypergraph> Create(
      size_t num_users, const std::vector<std::vector<UserId>>& edges);
  static absl::StatusOr<Hypergraph> FromCsr(size_t num_users,
                                            std::vector<size_t> offsets,
                                            std::vector<UserId> users);

  size_t num_users() const { return num_users_; }
  size_t num_edges() const { return offsets_.size() - 1; }
  std::span<const UserId> users(EdgeId e) const {
    return {users_.data() + offsets_[e], offsets_[e + 1] - offsets_[e]};
  }
  size_t arity(EdgeId e) const { return offsets_[e + 1] - offsets_[e]; }
  uint32_t degree(UserId u) const { return degrees_[u]; }
  std::span<const uint32_t> degree_index() const { return degrees_; }
  // Sum of edge cardinalities.
  size_t total_incidence() const { return users_.size(); }
  uint32_t max_degree() const;
  size_t max_arity() const;

 private:
  size_t num_users_ = 0;
  std::vector<size_t> offsets_;
  std::vector<UserId> users_;
  std::vector<uint32_t> degrees_;
};

// Edges incident to each user, in ascending edge id.
struct Incidence {
  std::vector<size_t> offsets;
  std::vector<EdgeId> edges;

  std::span<const EdgeId> of(UserId u) const {
    return {edges.data() + offsets[u], offsets[u + 1] - offsets[u]};
  }
};
Incidence BuildIncidence(const Hypergraph& h);

// The sub-hypergraph on `edge_ids` (in the given order), over the same user
// ground set. Edge i of the result is edge_ids[i] of `h`.
Hypergraph InducedByEdges(const Hypergraph& h, std::span<const EdgeId> edge_ids);

// Multiset of selected edges, stored as edge id -> multiplicity (>= 1).
class Selection {
 public:
  void Add(EdgeId e, uint32_t copies = 1);
  uint32_t count(EdgeId e) const;
  size_t distinct_count() const { return counts_.size(); }
  size_t total_count() const { return total_; }
  bool empty() const { return total_ == 0; }
  const std::map<EdgeId, uint32_t>& counts() const { return counts_; }
  // Every copy as its own entry, ascending edge id.
  std::vector<EdgeId> Expand() const;

  friend bool operator==(const Selection&, const Selection&) = default;

 private:
  std::map<EdgeId, uint32_t> counts_;
  size_t total_ = 0;
};

// Ordered batches for scheduled (non-sampled) training. `min_sep` records the
// separation the producer guarantees; 0 means unknown.
struct Schedule {
  size_t batch_size = 0;
  size_t min_sep = 0;
  std::vector<std::vector<EdgeId>> batches;

  size_t num_batches() const { return batches.size(); }
  std::vector<EdgeId> Flatten() const;
};

// Per-user incidence counts; empty for a graph without users.
std::vector<uint32_t> Degrees(const Hypergraph& h);

// Largest number of selected copies attributed to one user (0 if empty).
uint32_t MaxContribution(const Hypergraph& h, const Selection& s);
uint32_t MaxContribution(const Hypergraph& h, const Schedule& schedule);

// True iff every user is attributed at most k selected copies.
bool CheckContributionBound(const Hypergraph& h, const Selection& s,
                            uint32_t k);

// True iff, for every user, no two occurrences of that user's edges fall in
// any window of b consecutive batches (windows truncated at the tail).
bool CheckMinSep(const Hypergraph& h, const Schedule& schedule, size_t b);

absl::Status ValidateSelection(const Hypergraph& h, const Selection& s);
absl::Status ValidateSchedule(const Hypergraph& h, const Schedule& schedule);

// Edge-list text format:
//   users=<m>
//   <edge_id>\t<user>,<user>,...
absl::StatusOr<Hypergraph> ParseHypergraph(std::istream& in);
absl::StatusOr<Hypergraph> LoadHypergraph(const std::string& path);
std::string SerializeHypergraph(const Hypergraph& h);
absl::Status SaveHypergraph(const Hypergraph& h, const std::string& path);

// Selection file: `<edge_id>\t<multiplicity>` per line, ascending edge id.
absl::StatusOr<Selection> ParseSelection(std::istream& in);
absl::StatusOr<Selection> LoadSelection(const std::string& path);
std::string SerializeSelection(const Selection& s);
absl::Status SaveSelection(const Selection& s, const std::string& path);

// Schedule file: `<batch_index>\t<edge_id>` per line in flattening order.
// The batch size is taken from the first batch.
absl::StatusOr<Schedule> ParseSchedule(std::istream& in);
absl::StatusOr<Schedule> LoadSchedule(const std::string& path);
std::string SerializeSchedule(const Schedule& schedule);
absl::Status SaveSchedule(const Schedule& schedule, const std::string& path);

// Optional sidecar mapping user ids to external names: `<user_id>\t<name>`.
absl::StatusOr<std::vector<std::string>> LoadNameMap(const std::string& path,
                                                     size_t num_users);

absl::Status WriteTextFile(const std::string& path, const std::string& text);

}  // namespace mattrib

#endif  // MATTRIB_HYPERGRAPH_H_
