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

#ifndef MATTRIB_GRAPHGEN_H_
#define MATTRIB_GRAPHGEN_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "absl/status/statusor.h"
#include "mattrib/hypergraph.h"

namespace mattrib {

struct GraphGenSpec {
  size_t num_edges = 0;
  double expected_arity = 2.0;   // E[|e|]
  double expected_degree = 2.0;  // d_u, examples per user
  double skew_alpha = 1.5;       // skewed model only
  uint64_t seed = 0;
};

// Rate lambda of the Poisson law that, conditioned on being >= 1, has the
// given mean: lambda / (1 - e^-lambda) = mean. Zero when mean <= 1 (every
// draw is then 1).
double ZeroTruncatedPoissonRate(double mean);

// m = round(|E| * E[|e|] / d_u); error unless m >= 1 and the spec is valid.
absl::StatusOr<size_t> DerivedUserCount(const GraphGenSpec& spec);

// Probabilistic regular model: each edge draws its arity from a Poisson law
// with zero redrawn (rate from ZeroTruncatedPoissonRate, so the mean arity is
// E[|e|]; values above m clamped to m) and then that many distinct users
// uniformly. Edge i depends only on (seed, i).
absl::StatusOr<Hypergraph> GenerateRegular(const GraphGenSpec& spec);

// Users of regular-model edge `edge`, ascending.
std::vector<UserId> SampleRegularEdge(const GraphGenSpec& spec,
                                      size_t num_users, size_t edge);

// Skewed (preferential attachment) model: edge i includes user j
// independently with probability min(1, r (1+d_j)^a / sum (1+d_j')^a) over
// degrees accumulated from earlier edges, where r is the zero-truncated rate
// for E[|e|]; an empty draw redraws the edge. Sequential by construction.
absl::StatusOr<Hypergraph> GenerateSkewed(const GraphGenSpec& spec);

// degree -> number of users with that degree (zero-degree users included).
std::map<uint32_t, size_t> DegreeHistogram(const Hypergraph& h);

double MeanArity(const Hypergraph& h);

}  // namespace mattrib

#endif  // MATTRIB_GRAPHGEN_H_
