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

#include "mattrib/hypergraph.h"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <utility>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"

namespace mattrib {

namespace {

absl::Status LineError(size_t line_no, absl::string_view what) {
  return absl::InvalidArgumentError(absl::StrCat("line ", line_no, ": ", what));
}

template <typename T>
bool ParseUnsigned(absl::string_view text, T* out) {
  if (text.empty() || text.front() == '-' || text.front() == '+') return false;
  uint64_t v = 0;
  if (!absl::SimpleAtoi(text, &v)) return false;
  if (v > std::numeric_limits<T>::max()) return false;
  *out = static_cast<T>(v);
  return true;
}

absl::StatusOr<std::ifstream> OpenForRead(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  return in;
}

}  // namespace

absl::StatusOr<Hypergraph> Hypergraph::FromCsr(size_t num_users,
                                               std::vector<size_t> offsets,
                                               std::vector<UserId> users) {
  if (offsets.empty() || offsets.front() != 0 ||
      offsets.back() != users.size()) {
    return absl::InvalidArgumentError("malformed CSR offsets");
  }
  Hypergraph h;
  h.num_users_ = num_users;
  h.degrees_.assign(num_users, 0);
  // Scratch stamp per user to detect repeats inside one edge.
  std::vector<uint32_t> seen(num_users, 0);
  for (size_t e = 0; e + 1 < offsets.size(); ++e) {
    if (offsets[e + 1] <= offsets[e]) {
      return absl::InvalidArgumentError(
          absl::StrCat("edge ", e, " has an empty user set"));
    }
    const uint32_t stamp = static_cast<uint32_t>(e) + 1;
    for (size_t i = offsets[e]; i < offsets[e + 1]; ++i) {
      const UserId u = users[i];
      if (u >= num_users) {
        return absl::InvalidArgumentError(absl::StrCat(
            "edge ", e, ": user ", u, " out of range (users=", num_users, ")"));
      }
      if (seen[u] == stamp) {
        return absl::InvalidArgumentError(
            absl::StrCat("edge ", e, ": repeated user ", u));
      }
      seen[u] = stamp;
      ++h.degrees_[u];
    }
  }
  h.offsets_ = std::move(offsets);
  h.users_ = std::move(users);
  return h;
}

absl::StatusOr<Hypergraph> Hypergraph::Create(
    size_t num_users, const std::vector<std::vector<UserId>>& edges) {
  std::vector<size_t> offsets{0};
  std::vector<UserId> users;
  offsets.reserve(edges.size() + 1);
  for (const auto& e : edges) {
    users.insert(users.end(), e.begin(), e.end());
    offsets.push_back(users.size());
  }
  return FromCsr(num_users, std::move(offsets), std::move(users));
}

uint32_t Hypergraph::max_degree() const {
  return degrees_.empty() ? 0
                          : *std::max_element(degrees_.begin(), degrees_.end());
}

size_t Hypergraph::max_arity() const {
  size_t best = 0;
  for (size_t e = 0; e < num_edges(); ++e) best = std::max(best, arity(e));
  return best;
}

Incidence BuildIncidence(const Hypergraph& h) {
  Incidence inc;
  inc.offsets.assign(h.num_users() + 1, 0);
  for (UserId u = 0; u < h.num_users(); ++u) {
    inc.offsets[u + 1] = inc.offsets[u] + h.degree(u);
  }
  inc.edges.resize(h.total_incidence());
  std::vector<size_t> cursor(inc.offsets.begin(), inc.offsets.end() - 1);
  for (EdgeId e = 0; e < h.num_edges(); ++e) {
    for (UserId u : h.users(e)) inc.edges[cursor[u]++] = e;
  }
  return inc;
}

Hypergraph InducedByEdges(const Hypergraph& h,
                          std::span<const EdgeId> edge_ids) {
  std::vector<size_t> offsets{0};
  std::vector<UserId> users;
  offsets.reserve(edge_ids.size() + 1);
  for (EdgeId e : edge_ids) {
    auto us = h.users(e);
    users.insert(users.end(), us.begin(), us.end());
    offsets.push_back(users.size());
  }
  // Edges of a valid graph stay valid.
  return *Hypergraph::FromCsr(h.num_users(), std::move(offsets),
                              std::move(users));
}

void Selection::Add(EdgeId e, uint32_t copies) {
  if (copies == 0) return;
  counts_[e] += copies;
  total_ += copies;
}

uint32_t Selection::count(EdgeId e) const {
  auto it = counts_.find(e);
  return it == counts_.end() ? 0 : it->second;
}

std::vector<EdgeId> Selection::Expand() const {
  std::vector<EdgeId> out;
  out.reserve(total_);
  for (const auto& [e, c] : counts_) out.insert(out.end(), c, e);
  return out;
}

std::vector<EdgeId> Schedule::Flatten() const {
  std::vector<EdgeId> out;
  for (const auto& batch : batches) {
    out.insert(out.end(), batch.begin(), batch.end());
  }
  return out;
}

std::vector<uint32_t> Degrees(const Hypergraph& h) {
  auto d = h.degree_index();
  return {d.begin(), d.end()};
}

uint32_t MaxContribution(const Hypergraph& h, const Selection& s) {
  std::vector<uint32_t> load(h.num_users(), 0);
  uint32_t best = 0;
  for (const auto& [e, c] : s.counts()) {
    for (UserId u : h.users(e)) best = std::max(best, load[u] += c);
  }
  return best;
}

uint32_t MaxContribution(const Hypergraph& h, const Schedule& schedule) {
  std::vector<uint32_t> load(h.num_users(), 0);
  uint32_t best = 0;
  for (const auto& batch : schedule.batches) {
    for (EdgeId e : batch) {
      for (UserId u : h.users(e)) best = std::max(best, ++load[u]);
    }
  }
  return best;
}

bool CheckContributionBound(const Hypergraph& h, const Selection& s,
                            uint32_t k) {
  return MaxContribution(h, s) <= k;
}

bool CheckMinSep(const Hypergraph& h, const Schedule& schedule, size_t b) {
  // Occurrences of a user are b-separated iff consecutive occurrences are at
  // least b batches apart; two in the same batch are 0 apart.
  constexpr size_t kNever = static_cast<size_t>(-1);
  std::vector<size_t> last(h.num_users(), kNever);
  for (size_t t = 0; t < schedule.batches.size(); ++t) {
    for (EdgeId e : schedule.batches[t]) {
      for (UserId u : h.users(e)) {
        if (last[u] != kNever && t - last[u] < b) return false;
        last[u] = t;
      }
    }
  }
  return true;
}

absl::Status ValidateSelection(const Hypergraph& h, const Selection& s) {
  for (const auto& [e, c] : s.counts()) {
    if (e >= h.num_edges()) {
      return absl::InvalidArgumentError(
          absl::StrCat("selection references unknown edge ", e));
    }
  }
  return absl::OkStatus();
}

absl::Status ValidateSchedule(const Hypergraph& h, const Schedule& schedule) {
  for (size_t t = 0; t < schedule.batches.size(); ++t) {
    const auto& batch = schedule.batches[t];
    if (t + 1 < schedule.batches.size() &&
        batch.size() != schedule.batch_size) {
      return absl::InvalidArgumentError(absl::StrCat(
          "batch ", t, " has ", batch.size(), " entries, expected ",
          schedule.batch_size));
    }
    for (EdgeId e : batch) {
      if (e >= h.num_edges()) {
        return absl::InvalidArgumentError(
            absl::StrCat("schedule references unknown edge ", e));
      }
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<Hypergraph> ParseHypergraph(std::istream& in) {
  std::string line;
  size_t line_no = 1;
  if (!std::getline(in, line)) return LineError(1, "missing users=<m> header");
  absl::string_view header = line;
  size_t num_users = 0;
  if (!absl::ConsumePrefix(&header, "users=") ||
      !ParseUnsigned(header, &num_users)) {
    return LineError(1, "expected users=<m>");
  }
  std::vector<size_t> offsets{0};
  std::vector<UserId> users;
  std::vector<uint32_t> seen(num_users, 0);
  while (std::getline(in, line)) {
    ++line_no;
    const size_t edge = offsets.size() - 1;
    std::vector<absl::string_view> fields = absl::StrSplit(line, '\t');
    if (fields.size() != 2) {
      return LineError(line_no, "expected <edge_id>\\t<users>");
    }
    size_t edge_id = 0;
    if (!ParseUnsigned(fields[0], &edge_id)) {
      return LineError(line_no, "bad edge id");
    }
    if (edge_id != edge) {
      return LineError(line_no,
                       absl::StrCat("edge ids must increase densely from 0; "
                                    "expected ",
                                    edge, " got ", edge_id));
    }
    if (fields[1].empty()) return LineError(line_no, "empty user set");
    for (absl::string_view tok : absl::StrSplit(fields[1], ',')) {
      UserId u = 0;
      if (!ParseUnsigned(tok, &u)) return LineError(line_no, "bad user id");
      if (u >= num_users) {
        return LineError(line_no, absl::StrCat("user ", u, " out of range"));
      }
      if (seen[u] == edge + 1) {
        return LineError(line_no,
                         absl::StrCat("repeated user ", u, " in edge"));
      }
      seen[u] = static_cast<uint32_t>(edge + 1);
      users.push_back(u);
    }
    offsets.push_back(users.size());
  }
  return Hypergraph::FromCsr(num_users, std::move(offsets), std::move(users));
}

absl::StatusOr<Hypergraph> LoadHypergraph(const std::string& path) {
  auto in = OpenForRead(path);
  if (!in.ok()) return in.status();
  return ParseHypergraph(*in);
}

std::string SerializeHypergraph(const Hypergraph& h) {
  std::string out = absl::StrCat("users=", h.num_users(), "\n");
  for (EdgeId e = 0; e < h.num_edges(); ++e) {
    absl::StrAppend(&out, e, "\t", absl::StrJoin(h.users(e), ","), "\n");
  }
  return out;
}

absl::Status WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << text;
  if (!out) return absl::DataLossError(absl::StrCat("short write to ", path));
  return absl::OkStatus();
}

absl::Status SaveHypergraph(const Hypergraph& h, const std::string& path) {
  return WriteTextFile(path, SerializeHypergraph(h));
}

absl::StatusOr<Selection> ParseSelection(std::istream& in) {
  Selection s;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<absl::string_view> fields = absl::StrSplit(line, '\t');
    EdgeId e = 0;
    uint32_t c = 0;
    if (fields.size() != 2 || !ParseUnsigned(fields[0], &e) ||
        !ParseUnsigned(fields[1], &c)) {
      return LineError(line_no, "expected <edge_id>\\t<multiplicity>");
    }
    if (c == 0) return LineError(line_no, "multiplicity must be >= 1");
    if (s.count(e) != 0) return LineError(line_no, "duplicate edge id");
    s.Add(e, c);
  }
  return s;
}

absl::StatusOr<Selection> LoadSelection(const std::string& path) {
  auto in = OpenForRead(path);
  if (!in.ok()) return in.status();
  return ParseSelection(*in);
}

std::string SerializeSelection(const Selection& s) {
  std::string out;
  for (const auto& [e, c] : s.counts()) absl::StrAppend(&out, e, "\t", c, "\n");
  return out;
}

absl::Status SaveSelection(const Selection& s, const std::string& path) {
  return WriteTextFile(path, SerializeSelection(s));
}

absl::StatusOr<Schedule> ParseSchedule(std::istream& in) {
  Schedule schedule;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<absl::string_view> fields = absl::StrSplit(line, '\t');
    size_t t = 0;
    EdgeId e = 0;
    if (fields.size() != 2 || !ParseUnsigned(fields[0], &t) ||
        !ParseUnsigned(fields[1], &e)) {
      return LineError(line_no, "expected <batch_index>\\t<edge_id>");
    }
    if (t + 1 < schedule.batches.size() || t > schedule.batches.size()) {
      return LineError(line_no, "batch indices must be contiguous from 0");
    }
    if (t == schedule.batches.size()) schedule.batches.emplace_back();
    schedule.batches[t].push_back(e);
  }
  if (!schedule.batches.empty()) {
    schedule.batch_size = schedule.batches.front().size();
  }
  return schedule;
}

absl::StatusOr<Schedule> LoadSchedule(const std::string& path) {
  auto in = OpenForRead(path);
  if (!in.ok()) return in.status();
  return ParseSchedule(*in);
}

std::string SerializeSchedule(const Schedule& schedule) {
  std::string out;
  for (size_t t = 0; t < schedule.batches.size(); ++t) {
    for (EdgeId e : schedule.batches[t]) absl::StrAppend(&out, t, "\t", e, "\n");
  }
  return out;
}

absl::Status SaveSchedule(const Schedule& schedule, const std::string& path) {
  return WriteTextFile(path, SerializeSchedule(schedule));
}

absl::StatusOr<std::vector<std::string>> LoadNameMap(const std::string& path,
                                                     size_t num_users) {
  auto in = OpenForRead(path);
  if (!in.ok()) return in.status();
  std::vector<std::string> names(num_users);
  std::vector<bool> assigned(num_users, false);
  std::string line;
  size_t line_no = 0;
  while (std::getline(*in, line)) {
    ++line_no;
    std::vector<std::string> fields = absl::StrSplit(line, absl::MaxSplits('\t', 1));
    UserId u = 0;
    if (fields.size() != 2 || !ParseUnsigned(absl::string_view(fields[0]), &u)) {
      return LineError(line_no, "expected <user_id>\\t<name>");
    }
    if (u >= num_users) return LineError(line_no, "user id out of range");
    if (assigned[u]) return LineError(line_no, "user named twice");
    assigned[u] = true;
    names[u] = std::move(fields[1]);
  }
  return names;
}

}  // namespace mattrib
