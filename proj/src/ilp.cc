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

#include "mattrib/ilp.h"

#include <algorithm>
#include <chrono>
#include <vector>

#include "absl/strings/str_cat.h"

namespace mattrib {

namespace {

constexpr size_t kLineWidth = 78;

// Accumulates " + term" pieces, wrapping before kLineWidth.
class ExprWriter {
 public:
  ExprWriter(std::string* out, std::string head) : out_(out) {
    line_ = absl::StrCat(" ", head, ":");
  }

  void Term(const std::string& name) {
    const std::string piece =
        first_ ? absl::StrCat(" ", name) : absl::StrCat(" + ", name);
    Append(piece);
    first_ = false;
  }
  void Raw(const std::string& piece) { Append(piece); }
  void Finish() {
    absl::StrAppend(out_, line_, "\n");
    line_.clear();
  }

 private:
  void Append(const std::string& piece) {
    if (line_.size() + piece.size() > kLineWidth && line_.size() > 1) {
      absl::StrAppend(out_, line_, "\n");
      line_ = "  ";
    }
    line_ += piece;
  }

  std::string* out_;
  std::string line_;
  bool first_ = true;
};

// Writes `names` as a whitespace-separated, wrapped list.
void AppendNameList(std::string* out, const std::vector<std::string>& names) {
  std::string line;
  for (const std::string& n : names) {
    if (!line.empty() && line.size() + n.size() + 1 > kLineWidth) {
      absl::StrAppend(out, line, "\n");
      line.clear();
    }
    absl::StrAppend(&line, " ", n);
  }
  if (!line.empty()) absl::StrAppend(out, line, "\n");
}

std::string Var(EdgeId i) { return absl::StrCat("x", i); }
std::string Var(EdgeId i, size_t t) { return absl::StrCat("x", i, "_", t); }

}  // namespace

std::string RenderCbIlp(const Hypergraph& h, uint32_t k, bool allow_dup) {
  std::string out = "Maximize\n";
  ExprWriter obj(&out, "obj");
  for (EdgeId i = 0; i < h.num_edges(); ++i) obj.Term(Var(i));
  obj.Finish();
  out += "Subject To\n";
  const Incidence inc = BuildIncidence(h);
  for (UserId j = 0; j < h.num_users(); ++j) {
    if (inc.of(j).empty()) continue;
    ExprWriter row(&out, absl::StrCat("u", j));
    for (EdgeId i : inc.of(j)) row.Term(Var(i));
    row.Raw(absl::StrCat(" <= ", k));
    row.Finish();
  }
  std::vector<std::string> names;
  for (EdgeId i = 0; i < h.num_edges(); ++i) names.push_back(Var(i));
  if (!names.empty()) {
    if (allow_dup) {
      out += "Bounds\n";
      for (const std::string& n : names) absl::StrAppend(&out, " ", n, " >= 0\n");
      out += "Generals\n";
    } else {
      out += "Binaries\n";
    }
    AppendNameList(&out, names);
  }
  out += "End\n";
  return out;
}

absl::Status ExportCbIlp(const Hypergraph& h, uint32_t k, bool allow_dup,
                         const std::string& path) {
  if (k < 1) return absl::InvalidArgumentError("k must be >= 1");
  return WriteTextFile(path, RenderCbIlp(h, k, allow_dup));
}

absl::StatusOr<std::string> RenderMinSepIlp(const Hypergraph& h, size_t steps,
                                            size_t batch_size, size_t min_sep) {
  if (steps < 1 || batch_size < 1 || min_sep < 1) {
    return absl::InvalidArgumentError("T, B and b must be >= 1");
  }
  const size_t n = h.num_edges();
  if (n > 0 && steps > kMaxMinSepVariables / n) {
    return absl::ResourceExhaustedError(absl::StrCat(
        "min-sep program has ", n, " x ", steps, " variables; limit is ",
        kMaxMinSepVariables));
  }
  std::string out = "Minimize\n obj: k\nSubject To\n";
  const Incidence inc = BuildIncidence(h);
  const size_t windows = min_sep > steps ? 1 : steps - min_sep + 1;
  for (UserId j = 0; j < h.num_users(); ++j) {
    if (inc.of(j).empty()) continue;
    for (size_t t = 1; t <= windows; ++t) {
      ExprWriter row(&out, absl::StrCat("w", j, "_", t));
      const size_t last = std::min(steps, t + min_sep - 1);
      for (EdgeId i : inc.of(j)) {
        for (size_t s = t; s <= last; ++s) row.Term(Var(i, s));
      }
      row.Raw(" <= 1");
      row.Finish();
    }
  }
  for (UserId j = 0; j < h.num_users(); ++j) {
    if (inc.of(j).empty()) continue;
    ExprWriter row(&out, absl::StrCat("u", j));
    for (EdgeId i : inc.of(j)) {
      for (size_t s = 1; s <= steps; ++s) row.Term(Var(i, s));
    }
    row.Raw(" - k <= 0");
    row.Finish();
  }
  for (size_t t = 1; t <= steps; ++t) {
    ExprWriter row(&out, absl::StrCat("b", t));
    for (EdgeId i = 0; i < n; ++i) row.Term(Var(i, t));
    if (n == 0) row.Raw(" 0 k");
    row.Raw(absl::StrCat(" = ", batch_size));
    row.Finish();
  }
  std::vector<std::string> names;
  names.reserve(n * steps);
  for (EdgeId i = 0; i < n; ++i) {
    for (size_t s = 1; s <= steps; ++s) names.push_back(Var(i, s));
  }
  if (!names.empty()) {
    out += "Binaries\n";
    AppendNameList(&out, names);
  }
  out += "Generals\n k\nEnd\n";
  return out;
}

absl::Status ExportMinSepIlp(const Hypergraph& h, size_t steps,
                             size_t batch_size, size_t min_sep,
                             const std::string& path) {
  auto text = RenderMinSepIlp(h, steps, batch_size, min_sep);
  if (!text.ok()) return text.status();
  return WriteTextFile(path, *text);
}

namespace {

class BranchAndBound {
 public:
  BranchAndBound(const Hypergraph& h, uint32_t k, bool allow_dup,
                 const ExactLimits& limits)
      : h_(h),
        k_(k),
        max_copies_(allow_dup ? k : 1),
        limits_(limits),
        order_(SortedByArity(h)),
        load_(h.num_users(), 0),
        counts_(h.num_edges(), 0),
        start_(std::chrono::steady_clock::now()) {
    for (UserId u = 0; u < h.num_users(); ++u) {
      if (h.degree(u) > 0) slack_ += k;
    }
  }

  void SetIncumbent(const Selection& s) {
    best_total_ = s.total_count();
    best_counts_.assign(h_.num_edges(), 0);
    for (const auto& [e, c] : s.counts()) best_counts_[e] = c;
  }

  void Run() { Visit(0, 0); }

  bool stopped() const { return stopped_; }
  uint64_t nodes() const { return nodes_; }
  const std::vector<uint32_t>& best_counts() const { return best_counts_; }

 private:
  bool OutOfBudget() {
    if (nodes_ >= limits_.max_nodes) return true;
    if ((nodes_ & 4095) == 0) {
      const std::chrono::duration<double> elapsed =
          std::chrono::steady_clock::now() - start_;
      if (elapsed.count() > limits_.max_seconds) return true;
    }
    return false;
  }

  void Visit(size_t idx, size_t total) {
    if (stopped_) return;
    ++nodes_;
    if (OutOfBudget()) {
      stopped_ = true;
      return;
    }
    if (total > best_total_) {
      best_total_ = total;
      best_counts_ = counts_;
    }
    const size_t n = order_.size();
    if (idx == n) return;
    // Every further copy uses at least arity(order_[idx]) units of slack.
    const EdgeId e = order_[idx];
    const size_t arity = h_.arity(e);
    const size_t bound =
        total + std::min((n - idx) * max_copies_, slack_ / arity);
    if (bound <= best_total_) return;
    uint32_t room = max_copies_;
    for (UserId u : h_.users(e)) room = std::min(room, k_ - load_[u]);
    for (uint32_t c = room + 1; c-- > 0;) {
      Apply(e, c, arity);
      Visit(idx + 1, total + c);
      Apply(e, -static_cast<int64_t>(c), arity);
      if (stopped_) return;
    }
  }

  void Apply(EdgeId e, int64_t c, size_t arity) {
    if (c == 0) return;
    for (UserId u : h_.users(e)) load_[u] = static_cast<uint32_t>(load_[u] + c);
    counts_[e] = static_cast<uint32_t>(counts_[e] + c);
    slack_ = static_cast<size_t>(static_cast<int64_t>(slack_) -
                                 c * static_cast<int64_t>(arity));
  }

  const Hypergraph& h_;
  const uint32_t k_;
  const uint32_t max_copies_;
  const ExactLimits limits_;
  const std::vector<EdgeId> order_;
  std::vector<uint32_t> load_;
  std::vector<uint32_t> counts_;
  size_t slack_ = 0;
  size_t best_total_ = 0;
  std::vector<uint32_t> best_counts_;
  uint64_t nodes_ = 0;
  bool stopped_ = false;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

absl::StatusOr<ExactResult> ExactSolveCb(const Hypergraph& h, uint32_t k,
                                         bool allow_dup,
                                         const ExactLimits& limits) {
  if (k < 1) return absl::InvalidArgumentError("k must be >= 1");
  if (h.num_edges() > kMaxExactEdges) {
    return absl::InvalidArgumentError(
        absl::StrCat("exact solver accepts at most ", kMaxExactEdges,
                     " edges, got ", h.num_edges()));
  }
  BranchAndBound bnb(h, k, allow_dup, limits);
  bnb.SetIncumbent(allow_dup ? GreedyDup(h, k).selection
                             : GreedyNoDup(h, k).selection);
  bnb.Run();
  Selection best;
  const std::vector<uint32_t>& counts = bnb.best_counts();
  for (EdgeId e = 0; e < counts.size(); ++e) best.Add(e, counts[e]);
  ExactResult out;
  out.result = Summarize(h, std::move(best));
  out.optimal = !bnb.stopped();
  out.nodes = bnb.nodes();
  return out;
}

}  // namespace mattrib
