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

#include "mattrib/harness.h"

#define TOML_EXCEPTIONS 0
#include <toml.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <type_traits>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "mattrib/accounting.h"
#include "mattrib/hypergraph.h"
#include "mattrib/random.h"

namespace mattrib {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------------------
// Config parsing.

std::string HashText(std::string_view text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return absl::StrFormat("%016x", h);
}

absl::Status CheckKeys(const toml::table& t, std::string_view section,
                       std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, node] : t) {
    const std::string_view k = key.str();
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown key '", std::string(k), "' in [",
                       std::string(section), "]"));
    }
  }
  return absl::OkStatus();
}

template <typename T>
std::optional<T> Scalar(const toml::node& n) {
  if constexpr (std::is_same_v<T, bool>) {
    return n.value<bool>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    return n.value<std::string>();
  } else if constexpr (std::is_floating_point_v<T>) {
    return n.value<double>();
  } else {
    auto v = n.value<int64_t>();
    if (!v || *v < 0) return std::nullopt;
    return static_cast<T>(*v);
  }
}

template <typename T>
absl::Status Read(const toml::table& t, std::string_view section,
                  std::string_view key, T* out) {
  const toml::node* n = t.get(key);
  if (n == nullptr) return absl::OkStatus();
  auto bad = [&]() -> absl::Status {
    return absl::InvalidArgumentError(
        absl::StrCat("[", std::string(section), "] ", std::string(key),
                     " has the wrong type or sign"));
  };
  if constexpr (requires { typename T::value_type; } &&
                !std::is_same_v<T, std::string>) {
    const toml::array* arr = n->as_array();
    if (arr == nullptr) return bad();
    T values;
    for (const toml::node& el : *arr) {
      auto v = Scalar<typename T::value_type>(el);
      if (!v) return bad();
      values.push_back(*v);
    }
    *out = std::move(values);
  } else {
    auto v = Scalar<T>(*n);
    if (!v) return bad();
    *out = *v;
  }
  return absl::OkStatus();
}

#define MATTRIB_RETURN_IF_ERROR(expr)      \
  do {                                     \
    if (absl::Status _s = (expr); !_s.ok()) return _s; \
  } while (0)

const toml::table* Section(const toml::table& root, std::string_view name) {
  const toml::node* n = root.get(name);
  return n == nullptr ? nullptr : n->as_table();
}

absl::Status ParseGraph(const toml::table& t, GraphSource* g) {
  MATTRIB_RETURN_IF_ERROR(CheckKeys(
      t, "graph",
      {"path", "model", "num_edges", "expected_arity", "expected_degree",
       "skew_alpha", "seed"}));
  std::string model = "regular";
  MATTRIB_RETURN_IF_ERROR(Read(t, "graph", "path", &g->path));
  MATTRIB_RETURN_IF_ERROR(Read(t, "graph", "model", &model));
  MATTRIB_RETURN_IF_ERROR(Read(t, "graph", "num_edges", &g->gen.num_edges));
  MATTRIB_RETURN_IF_ERROR(
      Read(t, "graph", "expected_arity", &g->gen.expected_arity));
  MATTRIB_RETURN_IF_ERROR(
      Read(t, "graph", "expected_degree", &g->gen.expected_degree));
  MATTRIB_RETURN_IF_ERROR(Read(t, "graph", "skew_alpha", &g->gen.skew_alpha));
  MATTRIB_RETURN_IF_ERROR(Read(t, "graph", "seed", &g->gen.seed));
  if (model == "regular") {
    g->model = GraphModel::kRegular;
  } else if (model == "skewed") {
    g->model = GraphModel::kSkewed;
  } else {
    return absl::InvalidArgumentError(
        absl::StrCat("[graph] model must be regular or skewed, got ", model));
  }
  return absl::OkStatus();
}

absl::Status ParseData(const toml::table& t, RegressionSpec* d) {
  MATTRIB_RETURN_IF_ERROR(CheckKeys(
      t, "data", {"dim", "steepness", "beta", "covariance", "seed"}));
  std::string cov = "inv_dim";
  MATTRIB_RETURN_IF_ERROR(Read(t, "data", "dim", &d->dim));
  MATTRIB_RETURN_IF_ERROR(Read(t, "data", "steepness", &d->steepness));
  MATTRIB_RETURN_IF_ERROR(Read(t, "data", "beta", &d->beta));
  MATTRIB_RETURN_IF_ERROR(Read(t, "data", "covariance", &cov));
  MATTRIB_RETURN_IF_ERROR(Read(t, "data", "seed", &d->seed));
  if (cov == "inv_dim") {
    d->covariance = Covariance::kInvDim;
  } else if (cov == "inv_sqrt_dim") {
    d->covariance = Covariance::kInvSqrtDim;
  } else {
    return absl::InvalidArgumentError(
        absl::StrCat("[data] covariance must be inv_dim or inv_sqrt_dim"));
  }
  return absl::OkStatus();
}

absl::StatusOr<BoundingSpec> ParseBounding(const toml::table& t) {
  MATTRIB_RETURN_IF_ERROR(CheckKeys(
      t, "bounding",
      {"name", "algo", "k", "tie", "tie_seed", "threshold", "c1", "c2",
       "allow_dup", "pool", "size", "seed", "min_sep", "max_min_sep"}));
  BoundingSpec b;
  std::string algo = "dup", tie = "id", pool = "all";
  MATTRIB_RETURN_IF_ERROR(Read(t, "bounding", "name", &b.name));
  MATTRIB_RETURN_IF_ERROR(Read(t, "bounding", "algo", &algo));
  MATTRIB_RETURN_IF_ERROR(Read(t, "bounding", "k", &b.k));
  MATTRIB_RETURN_IF_ERROR(Read(t, "bounding", "tie", &tie));
  MATTRIB_RETURN_IF_ERROR(Read(t, "bounding", "tie_seed", &b.order.seed));
  MATTRIB_RETURN_IF_ERROR(
      Read(t, "bounding", "threshold", &b.interleave.threshold));
  MATTRIB_RETURN_IF_ERROR(Read(t, "bounding", "c1", &b.interleave.low_run));
  MATTRIB_RETURN_IF_ERROR(Read(t, "bounding", "c2", &b.interleave.high_run));
  MATTRIB_RETURN_IF_ERROR(
      Read(t, "bounding", "allow_dup", &b.interleave.allow_dup));
  MATTRIB_RETURN_IF_ERROR(Read(t, "bounding", "pool", &pool));
  MATTRIB_RETURN_IF_ERROR(Read(t, "bounding", "size", &b.random_size));
  MATTRIB_RETURN_IF_ERROR(Read(t, "bounding", "seed", &b.random_seed));
  MATTRIB_RETURN_IF_ERROR(Read(t, "bounding", "min_sep", &b.min_seps));
  MATTRIB_RETURN_IF_ERROR(Read(t, "bounding", "max_min_sep", &b.max_min_sep));
  static const std::map<std::string, BoundingAlgo> kAlgos = {
      {"nodup", BoundingAlgo::kNoDup},
      {"dup", BoundingAlgo::kDup},
      {"minsep", BoundingAlgo::kMinSep},
      {"interleaved", BoundingAlgo::kInterleaved},
      {"random", BoundingAlgo::kRandom}};
  auto it = kAlgos.find(algo);
  if (it == kAlgos.end()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "[bounding] algo must be nodup, dup, minsep, interleaved or random"));
  }
  b.algo = it->second;
  if (tie == "id") {
    b.order.tie = TieBreak::kEdgeId;
  } else if (tie == "seeded-shuffle") {
    b.order.tie = TieBreak::kSeededShuffle;
  } else {
    return absl::InvalidArgumentError(
        "[bounding] tie must be id or seeded-shuffle");
  }
  if (pool == "all") {
    b.pool = RandomPool::kAll;
  } else if (pool == "low") {
    b.pool = RandomPool::kLow;
  } else if (pool == "high") {
    b.pool = RandomPool::kHigh;
  } else {
    return absl::InvalidArgumentError("[bounding] pool must be all, low or high");
  }
  if (b.name.empty()) b.name = algo;
  if (b.k < 1) return absl::InvalidArgumentError("[bounding] k must be >= 1");
  return b;
}

absl::Status ParseMechanism(const toml::table& t, ExperimentConfig* cfg) {
  MATTRIB_RETURN_IF_ERROR(CheckKeys(
      t, "mechanism",
      {"kind", "strategy", "epsilons", "delta", "hypothetical_batch",
       "noise_table"}));
  std::string kind = "dpsgd", strategy = "optimized";
  MATTRIB_RETURN_IF_ERROR(Read(t, "mechanism", "kind", &kind));
  MATTRIB_RETURN_IF_ERROR(Read(t, "mechanism", "strategy", &strategy));
  MATTRIB_RETURN_IF_ERROR(Read(t, "mechanism", "epsilons", &cfg->epsilons));
  MATTRIB_RETURN_IF_ERROR(Read(t, "mechanism", "delta", &cfg->delta));
  MATTRIB_RETURN_IF_ERROR(
      Read(t, "mechanism", "hypothetical_batch", &cfg->hypothetical_batch));
  MATTRIB_RETURN_IF_ERROR(Read(t, "mechanism", "noise_table", &cfg->noise_table));
  if (kind == "dpsgd") {
    cfg->mechanism = MechanismKind::kDpSgd;
  } else if (kind == "dpmf") {
    cfg->mechanism = MechanismKind::kDpMf;
  } else {
    return absl::InvalidArgumentError("[mechanism] kind must be dpsgd or dpmf");
  }
  if (strategy == "optimized") {
    cfg->strategy = StrategyMode::kOptimized;
  } else if (strategy == "identity") {
    cfg->strategy = StrategyMode::kIdentity;
  } else {
    return absl::InvalidArgumentError(
        "[mechanism] strategy must be optimized or identity");
  }
  return absl::OkStatus();
}

absl::Status ParseTrain(const toml::table& t, ExperimentConfig* cfg) {
  MATTRIB_RETURN_IF_ERROR(CheckKeys(
      t, "train",
      {"optimizer", "learning_rates", "clip_norms", "batch_sizes", "product",
       "seeds", "num_seeds"}));
  std::string optimizer = "adam";
  size_t num_seeds = 0;
  MATTRIB_RETURN_IF_ERROR(Read(t, "train", "optimizer", &optimizer));
  MATTRIB_RETURN_IF_ERROR(
      Read(t, "train", "learning_rates", &cfg->learning_rates));
  MATTRIB_RETURN_IF_ERROR(Read(t, "train", "clip_norms", &cfg->clip_norms));
  MATTRIB_RETURN_IF_ERROR(Read(t, "train", "batch_sizes", &cfg->batch_sizes));
  MATTRIB_RETURN_IF_ERROR(Read(t, "train", "product", &cfg->product));
  MATTRIB_RETURN_IF_ERROR(Read(t, "train", "seeds", &cfg->seeds));
  MATTRIB_RETURN_IF_ERROR(Read(t, "train", "num_seeds", &num_seeds));
  if (t.contains("seeds") && t.contains("num_seeds")) {
    return absl::InvalidArgumentError("[train] give seeds or num_seeds, not both");
  }
  if (t.contains("num_seeds")) {
    cfg->seeds.clear();
    for (uint64_t s = 0; s < num_seeds; ++s) cfg->seeds.push_back(s);
  }
  if (optimizer == "adam") {
    cfg->optimizer = Optimizer::kAdam;
  } else if (optimizer == "sgd") {
    cfg->optimizer = Optimizer::kSgd;
  } else {
    return absl::InvalidArgumentError("[train] optimizer must be adam or sgd");
  }
  return absl::OkStatus();
}

absl::Status ParseBias(const toml::table& t, BiasSweepSpec* b) {
  MATTRIB_RETURN_IF_ERROR(
      CheckKeys(t, "bias", {"k", "thresholds", "max_run", "allow_dup"}));
  MATTRIB_RETURN_IF_ERROR(Read(t, "bias", "k", &b->k));
  MATTRIB_RETURN_IF_ERROR(Read(t, "bias", "thresholds", &b->thresholds));
  MATTRIB_RETURN_IF_ERROR(Read(t, "bias", "max_run", &b->max_run));
  MATTRIB_RETURN_IF_ERROR(Read(t, "bias", "allow_dup", &b->allow_dup));
  if (b->k < 1 || b->max_run < 1 || b->thresholds.empty()) {
    return absl::InvalidArgumentError(
        "[bias] needs k >= 1, max_run >= 1 and thresholds");
  }
  return absl::OkStatus();
}

absl::Status ParseRetention(const toml::table& t, RetentionSpec* r) {
  MATTRIB_RETURN_IF_ERROR(CheckKeys(
      t, "retention",
      {"num_edges", "ks", "degrees", "expected_arity", "skew_alpha", "seed",
       "probe_minsep", "minsep_steps", "minsep_batch", "max_min_sep"}));
  MATTRIB_RETURN_IF_ERROR(Read(t, "retention", "num_edges", &r->num_edges));
  MATTRIB_RETURN_IF_ERROR(Read(t, "retention", "ks", &r->ks));
  MATTRIB_RETURN_IF_ERROR(Read(t, "retention", "degrees", &r->degrees));
  MATTRIB_RETURN_IF_ERROR(
      Read(t, "retention", "expected_arity", &r->expected_arity));
  MATTRIB_RETURN_IF_ERROR(Read(t, "retention", "skew_alpha", &r->skew_alpha));
  MATTRIB_RETURN_IF_ERROR(Read(t, "retention", "seed", &r->seed));
  MATTRIB_RETURN_IF_ERROR(Read(t, "retention", "probe_minsep", &r->probe_minsep));
  MATTRIB_RETURN_IF_ERROR(Read(t, "retention", "minsep_steps", &r->minsep_steps));
  MATTRIB_RETURN_IF_ERROR(Read(t, "retention", "minsep_batch", &r->minsep_batch));
  MATTRIB_RETURN_IF_ERROR(Read(t, "retention", "max_min_sep", &r->max_min_sep));
  return absl::OkStatus();
}

absl::Status ValidateGrid(const ExperimentConfig& cfg) {
  if (cfg.epsilons.empty()) {
    return absl::InvalidArgumentError("epsilon grid is empty");
  }
  for (double e : cfg.epsilons) {
    if (!(e > 0)) return absl::InvalidArgumentError("epsilons must be > 0");
  }
  if (!(cfg.delta > 0 && cfg.delta < 1)) {
    return absl::InvalidArgumentError("delta must lie in (0, 1)");
  }
  if (cfg.learning_rates.empty() || cfg.clip_norms.empty() ||
      cfg.batch_sizes.empty() || cfg.seeds.empty()) {
    return absl::InvalidArgumentError(
        "learning_rates, clip_norms, batch_sizes and seeds must be nonempty");
  }
  for (size_t b : cfg.batch_sizes) {
    if (b == 0 || cfg.product % b != 0) {
      return absl::InvalidArgumentError(absl::StrCat(
          "batch size ", b, " does not divide the fixed product ", cfg.product));
    }
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<ExperimentConfig> ParseConfig(std::string_view toml_text) {
  toml::parse_result parsed = toml::parse(toml_text);
  if (!parsed) {
    const toml::parse_error& err = parsed.error();
    return absl::InvalidArgumentError(
        absl::StrCat("config line ", static_cast<int>(err.source().begin.line),
                     ": ", std::string(err.description())));
  }
  const toml::table& root = parsed.table();
  MATTRIB_RETURN_IF_ERROR(CheckKeys(
      root, "top level",
      {"graph", "data", "bounding", "mechanism", "train", "bias", "retention",
       "output"}));
  ExperimentConfig cfg;
  cfg.hash = HashText(toml_text);
  if (const toml::table* t = Section(root, "graph")) {
    MATTRIB_RETURN_IF_ERROR(ParseGraph(*t, &cfg.graph));
  }
  if (const toml::table* t = Section(root, "data")) {
    MATTRIB_RETURN_IF_ERROR(ParseData(*t, &cfg.data));
  }
  if (const toml::node* n = root.get("bounding")) {
    auto add = [&cfg](const toml::table& t) -> absl::Status {
      auto b = ParseBounding(t);
      if (!b.ok()) return b.status();
      cfg.bounding.push_back(*std::move(b));
      return absl::OkStatus();
    };
    if (const toml::array* arr = n->as_array()) {
      for (const toml::node& el : *arr) {
        if (!el.is_table()) {
          return absl::InvalidArgumentError("[[bounding]] entries must be tables");
        }
        MATTRIB_RETURN_IF_ERROR(add(*el.as_table()));
      }
    } else if (const toml::table* t = n->as_table()) {
      MATTRIB_RETURN_IF_ERROR(add(*t));
    } else {
      return absl::InvalidArgumentError("bounding must be a table");
    }
  }
  std::set<std::string> names;
  for (const BoundingSpec& b : cfg.bounding) {
    if (!names.insert(b.name).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate bounding name ", b.name));
    }
  }
  if (const toml::table* t = Section(root, "mechanism")) {
    MATTRIB_RETURN_IF_ERROR(ParseMechanism(*t, &cfg));
  }
  if (const toml::table* t = Section(root, "train")) {
    MATTRIB_RETURN_IF_ERROR(ParseTrain(*t, &cfg));
  }
  if (const toml::table* t = Section(root, "bias")) {
    MATTRIB_RETURN_IF_ERROR(ParseBias(*t, &cfg.bias));
  }
  if (const toml::table* t = Section(root, "retention")) {
    MATTRIB_RETURN_IF_ERROR(ParseRetention(*t, &cfg.retention));
  }
  if (const toml::table* t = Section(root, "output")) {
    MATTRIB_RETURN_IF_ERROR(CheckKeys(*t, "output", {"plots"}));
    MATTRIB_RETURN_IF_ERROR(Read(*t, "output", "plots", &cfg.write_plots));
  }
  return cfg;
}

absl::StatusOr<ExperimentConfig> LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str());
}

// ---------------------------------------------------------------------------
// CSV output.

namespace {

std::string Num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return absl::StrFormat("%.10g", v);
}

std::string MechanismName(MechanismKind k) {
  return k == MechanismKind::kDpSgd ? "dpsgd" : "dpmf";
}

}  // namespace

std::string RunCsvHeader() {
  return "config_hash,bounding,mechanism,epsilon,delta,learning_rate,"
         "clip_norm,batch_size,steps,min_sep,seed,k,achieved_k,selected,"
         "distinct,avg_arity,sampling_prob,hypothetical_batch,sigma,"
         "accountant,status,val_loss,val_accuracy,test_loss,test_accuracy";
}

std::string RunCsvLine(const RunRow& r) {
  return absl::StrCat(
      r.config_hash, ",", r.bounding, ",", r.mechanism, ",", Num(r.epsilon),
      ",", Num(r.delta), ",", Num(r.learning_rate), ",", Num(r.clip_norm), ",",
      r.batch_size, ",", r.steps, ",", r.min_sep, ",", r.seed, ",", r.k, ",",
      r.achieved_k, ",", r.selected, ",", r.distinct, ",", Num(r.avg_arity),
      ",", Num(r.sampling_prob), ",", r.hypothetical_batch, ",", Num(r.sigma),
      ",", r.accountant, ",", r.status, ",", Num(r.val_loss), ",",
      Num(r.val_accuracy), ",", Num(r.test_loss), ",", Num(r.test_accuracy));
}

std::string BestCsv(const std::vector<BestRow>& best) {
  std::string out =
      "bounding,epsilon,learning_rate,clip_norm,batch_size,min_sep,sigma,"
      "avg_arity,num_seeds,mean_val_accuracy,mean_test_accuracy,"
      "stderr_test_accuracy\n";
  for (const BestRow& b : best) {
    absl::StrAppend(&out, b.bounding, ",", Num(b.epsilon), ",",
                    Num(b.learning_rate), ",", Num(b.clip_norm), ",",
                    b.batch_size, ",", b.min_sep, ",", Num(b.sigma), ",",
                    Num(b.avg_arity), ",", b.num_seeds, ",",
                    Num(b.mean_val_accuracy), ",", Num(b.mean_test_accuracy),
                    ",", Num(b.stderr_test_accuracy), "\n");
  }
  return out;
}

std::vector<BestRow> SelectBest(const std::vector<RunRow>& rows) {
  using HpKey = std::tuple<double, double, size_t, size_t>;
  struct Agg {
    std::vector<const RunRow*> runs;
    bool all_ok = true;
  };
  // Keyed by (bounding, epsilon) in first-appearance order.
  std::vector<std::pair<std::string, double>> cells;
  std::map<std::pair<std::string, double>, std::map<HpKey, Agg>> groups;
  for (const RunRow& r : rows) {
    const auto cell = std::make_pair(r.bounding, r.epsilon);
    if (!groups.contains(cell)) cells.push_back(cell);
    Agg& a = groups[cell][HpKey{r.learning_rate, r.clip_norm, r.batch_size,
                                r.min_sep}];
    a.runs.push_back(&r);
    a.all_ok = a.all_ok && r.status == "ok";
  }
  std::vector<BestRow> out;
  for (const auto& cell : cells) {
    std::optional<BestRow> best;
    for (const auto& [hp, agg] : groups[cell]) {
      if (!agg.all_ok || agg.runs.empty()) continue;
      BestRow b;
      b.bounding = cell.first;
      b.epsilon = cell.second;
      std::tie(b.learning_rate, b.clip_norm, b.batch_size, b.min_sep) = hp;
      b.sigma = agg.runs.front()->sigma;
      b.avg_arity = agg.runs.front()->avg_arity;
      b.num_seeds = agg.runs.size();
      double val = 0, test = 0;
      for (const RunRow* r : agg.runs) {
        val += r->val_accuracy;
        test += r->test_accuracy;
      }
      const double n = static_cast<double>(agg.runs.size());
      b.mean_val_accuracy = val / n;
      b.mean_test_accuracy = test / n;
      double ss = 0;
      for (const RunRow* r : agg.runs) {
        ss += (r->test_accuracy - b.mean_test_accuracy) *
              (r->test_accuracy - b.mean_test_accuracy);
      }
      b.stderr_test_accuracy = n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
      if (!best || b.mean_val_accuracy > best->mean_val_accuracy ||
          (b.mean_val_accuracy == best->mean_val_accuracy &&
           b.sigma < best->sigma)) {
        best = b;
      }
    }
    if (best) out.push_back(*best);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiment execution.

namespace {

struct Prepared {
  Hypergraph graph;
  RegressionDataset data;
  std::vector<EdgeId> train, validation, test;
  Hypergraph train_graph;  // edge i is data example train[i]
};

absl::StatusOr<Hypergraph> BuildGraph(const GraphSource& g) {
  if (!g.path.empty()) return LoadHypergraph(g.path);
  return g.model == GraphModel::kRegular ? GenerateRegular(g.gen)
                                         : GenerateSkewed(g.gen);
}

absl::StatusOr<Prepared> Prepare(const ExperimentConfig& cfg) {
  Prepared p;
  auto h = BuildGraph(cfg.graph);
  if (!h.ok()) return h.status();
  p.graph = *std::move(h);
  auto ds = GenerateRegression(p.graph, cfg.data);
  if (!ds.ok()) return ds.status();
  p.data = *std::move(ds);
  p.train = p.data.IndicesOf(Split::kTrain);
  p.validation = p.data.IndicesOf(Split::kValidation);
  p.test = p.data.IndicesOf(Split::kTest);
  if (p.train.empty() || p.validation.empty() || p.test.empty()) {
    return absl::InvalidArgumentError(
        "graph too small for a train/validation/test split");
  }
  p.train_graph = InducedByEdges(p.graph, p.train);
  return p;
}

Selection ToDataIds(const Prepared& p, const Selection& s) {
  Selection out;
  for (const auto& [e, c] : s.counts()) out.Add(p.train[e], c);
  return out;
}

Schedule ToDataIds(const Prepared& p, const Schedule& s) {
  Schedule out = s;
  for (auto& batch : out.batches) {
    for (EdgeId& e : batch) e = p.train[e];
  }
  return out;
}

// Bounds the training graph for DP-SGD and verifies the result.
absl::StatusOr<BoundingResult> BoundForDpSgd(const Hypergraph& h,
                                             const BoundingSpec& spec,
                                             uint32_t* accounting_k) {
  BoundingResult r;
  switch (spec.algo) {
    case BoundingAlgo::kNoDup:
      r = GreedyNoDup(h, spec.k, spec.order);
      break;
    case BoundingAlgo::kDup:
      r = GreedyDup(h, spec.k, spec.order);
      break;
    case BoundingAlgo::kInterleaved: {
      auto res = GreedyInterleaved(h, spec.k, spec.interleave, spec.order);
      if (!res.ok()) return res.status();
      r = *std::move(res);
      break;
    }
    case BoundingAlgo::kRandom: {
      auto sel = RandomBaseline(h, spec.random_size, spec.pool, spec.random_seed);
      if (!sel.ok()) return sel.status();
      r = Summarize(h, *std::move(sel));
      // No bound is enforced; account with the measured one.
      *accounting_k = std::max<uint32_t>(1, r.achieved_k);
      return r;
    }
    case BoundingAlgo::kMinSep:
      return absl::InvalidArgumentError(
          absl::StrCat("bounding ", spec.name, ": minsep requires dpmf"));
  }
  if (!CheckContributionBound(h, r.selection, spec.k)) {
    return absl::InternalError(absl::StrCat(
        "bounding ", spec.name, " violates its contribution bound"));
  }
  *accounting_k = spec.k;
  return r;
}

class RunWriter {
 public:
  absl::Status Open(const std::string& dir) {
    if (dir.empty()) return absl::OkStatus();
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
      return absl::UnavailableError(
          absl::StrCat("cannot create ", dir, ": ", ec.message()));
    }
    out_.open(std::filesystem::path(dir) / "runs.csv");
    if (!out_) return absl::UnavailableError(absl::StrCat("cannot write ", dir));
    out_ << RunCsvHeader() << "\n" << std::flush;
    return absl::OkStatus();
  }
  void Append(std::vector<RunRow>& rows, RunRow row) {
    if (out_.is_open()) out_ << RunCsvLine(row) << "\n" << std::flush;
    rows.push_back(std::move(row));
  }

 private:
  std::ofstream out_;
};

struct GridCell {
  const BoundingSpec* spec = nullptr;
  const Selection* selection = nullptr;  // dpsgd
  const Schedule* schedule = nullptr;    // dpmf
  const StrategyMatrix* strategy = nullptr;
  uint32_t k = 0;
  const BoundingResult* summary = nullptr;
  size_t batch_size = 0;
  size_t steps = 0;
  size_t min_sep = 0;
};

// Calibrates, trains and evaluates one grid cell over (lr, clip, seed).
absl::Status RunCell(const ExperimentConfig& cfg, const Prepared& p,
                     const NoiseTable* table, const GridCell& cell,
                     double epsilon, RunWriter& writer,
                     std::vector<RunRow>& rows) {
  RunRow base;
  base.config_hash = cfg.hash;
  base.bounding = cell.spec->name;
  base.mechanism = MechanismName(cfg.mechanism);
  base.epsilon = epsilon;
  base.delta = cfg.delta;
  base.batch_size = cell.batch_size;
  base.steps = cell.steps;
  base.min_sep = cell.min_sep;
  base.k = cell.k;
  base.achieved_k = cell.summary->achieved_k;
  base.selected = cell.summary->total_count;
  base.distinct = cell.summary->distinct_count;
  base.avg_arity = cell.summary->avg_arity;
  base.hypothetical_batch = cfg.hypothetical_batch;
  const PrivacyBudget budget{epsilon, cfg.delta};

  absl::StatusOr<double> sigma;
  if (cfg.mechanism == MechanismKind::kDpSgd) {
    const size_t account_b =
        cfg.hypothetical_batch > 0 ? cfg.hypothetical_batch : cell.batch_size;
    base.sampling_prob = std::min(
        1.0, static_cast<double>(account_b) / cell.summary->total_count);
    std::optional<double> fixed;
    if (table != nullptr) {
      fixed = table->Lookup(epsilon, cfg.delta, cell.k, base.sampling_prob,
                            cell.steps);
    }
    if (fixed) {
      sigma = *fixed;
      base.accountant = kAccountantTable;
    } else {
      sigma = CalibrateSigmaDpSgd(budget, cell.k, base.sampling_prob,
                                  cell.steps);
      base.accountant = kAccountantRdpGroup;
    }
  } else {
    base.sampling_prob = 1.0;
    sigma = CalibrateSigmaDpMf(budget, cell.k);
    base.accountant = kAccountantGaussian;
  }
  const bool feasible = sigma.ok();
  if (!feasible && !absl::IsFailedPrecondition(sigma.status())) {
    return sigma.status();
  }
  base.sigma = feasible ? *sigma : std::numeric_limits<double>::infinity();
  base.status = feasible ? "ok" : "infeasible";

  for (double lr : cfg.learning_rates) {
    for (double clip : cfg.clip_norms) {
      for (uint64_t seed : cfg.seeds) {
        RunRow row = base;
        row.learning_rate = lr;
        row.clip_norm = clip;
        row.seed = seed;
        if (!feasible) {
          row.val_loss = row.val_accuracy = row.test_loss = row.test_accuracy =
              kNan;
          writer.Append(rows, std::move(row));
          continue;
        }
        TrainConfig tc;
        tc.steps = cell.steps;
        tc.batch_size = cell.batch_size;
        tc.clip_norm = clip;
        tc.noise_multiplier = row.sigma;
        tc.learning_rate = lr;
        tc.optimizer = cfg.optimizer;
        tc.seed = Mix64(seed ^ 0x7261696eULL);
        absl::StatusOr<TrainResult> trained =
            cfg.mechanism == MechanismKind::kDpSgd
                ? DpSgdTrain(p.data, *cell.selection, tc)
                : DpMfTrain(p.data, *cell.schedule, tc, *cell.strategy);
        if (!trained.ok()) return trained.status();
        auto val = Evaluate(trained->model, p.data, p.validation);
        auto test = Evaluate(trained->model, p.data, p.test);
        if (!val.ok()) return val.status();
        if (!test.ok()) return test.status();
        row.val_loss = val->loss;
        row.val_accuracy = val->accuracy;
        row.test_loss = test->loss;
        row.test_accuracy = test->accuracy;
        writer.Append(rows, std::move(row));
      }
    }
  }
  return absl::OkStatus();
}

absl::Status RunDpSgdSpec(const ExperimentConfig& cfg, const Prepared& p,
                          const NoiseTable* table, const BoundingSpec& spec,
                          RunWriter& writer, std::vector<RunRow>& rows) {
  uint32_t k = 0;
  auto bounded = BoundForDpSgd(p.train_graph, spec, &k);
  if (!bounded.ok()) return bounded.status();
  if (bounded->selection.empty()) {
    return absl::FailedPreconditionError(
        absl::StrCat("bounding ", spec.name, " selected nothing"));
  }
  const Selection selection = ToDataIds(p, bounded->selection);
  for (double eps : cfg.epsilons) {
    for (size_t b : cfg.batch_sizes) {
      GridCell cell;
      cell.spec = &spec;
      cell.selection = &selection;
      cell.k = k;
      cell.summary = &*bounded;
      cell.batch_size = b;
      cell.steps = cfg.product / b;
      MATTRIB_RETURN_IF_ERROR(RunCell(cfg, p, table, cell, eps, writer, rows));
    }
  }
  return absl::OkStatus();
}

absl::Status RunDpMfSpec(const ExperimentConfig& cfg, const Prepared& p,
                         const BoundingSpec& spec, RunWriter& writer,
                         std::vector<RunRow>& rows) {
  if (spec.algo != BoundingAlgo::kMinSep) {
    return absl::InvalidArgumentError(
        absl::StrCat("bounding ", spec.name, ": dpmf requires minsep"));
  }
  struct Feasible {
    size_t batch_size, steps, min_sep;
    BoundingResult result;  // holds the schedule over training-graph ids
    Schedule schedule;      // over dataset ids
    StrategyMatrix strategy;
  };
  for (size_t b : cfg.batch_sizes) {
    const size_t steps = cfg.product / b;
    std::vector<size_t> candidates = spec.min_seps;
    const bool probe = candidates.empty();
    if (probe) {
      for (size_t s = 2; s <= std::min(spec.max_min_sep, steps); ++s) {
        candidates.push_back(s);
      }
    }
    std::vector<Feasible> feasible;
    std::optional<size_t> first_failure;
    for (size_t sep : candidates) {
      auto res = GreedyMinSep(p.train_graph, steps, b, sep, spec.order);
      if (!res.ok()) {
        if (!absl::IsNotFound(res.status())) return res.status();
        if (!first_failure) first_failure = sep;
        if (probe) break;
        continue;
      }
      if (!CheckMinSep(p.train_graph, *res->schedule, sep)) {
        return absl::InternalError("min-sep schedule violates its separation");
      }
      const size_t band = std::min(sep, steps);
      auto strategy = BuildStrategy(steps, band, cfg.strategy);
      if (!strategy.ok()) return strategy.status();
      Schedule mapped = ToDataIds(p, *res->schedule);
      feasible.push_back({b, steps, sep, *std::move(res), std::move(mapped),
                          *std::move(strategy)});
    }
    for (double eps : cfg.epsilons) {
      for (const Feasible& f : feasible) {
        GridCell cell;
        cell.spec = &spec;
        cell.schedule = &f.schedule;
        cell.strategy = &f.strategy;
        cell.k = std::max<uint32_t>(1, f.result.achieved_k);
        cell.summary = &f.result;
        cell.batch_size = f.batch_size;
        cell.steps = f.steps;
        cell.min_sep = f.min_sep;
        MATTRIB_RETURN_IF_ERROR(RunCell(cfg, p, nullptr, cell, eps, writer, rows));
      }
      if (feasible.empty() && first_failure) {
        // No schedule at all: record the failing cell without training.
        RunRow row;
        row.config_hash = cfg.hash;
        row.bounding = spec.name;
        row.mechanism = MechanismName(cfg.mechanism);
        row.epsilon = eps;
        row.delta = cfg.delta;
        row.batch_size = b;
        row.steps = steps;
        row.min_sep = *first_failure;
        row.sigma = std::numeric_limits<double>::infinity();
        row.accountant = kAccountantGaussian;
        row.status = "infeasible";
        row.val_loss = row.val_accuracy = row.test_loss = row.test_accuracy =
            kNan;
        writer.Append(rows, std::move(row));
      }
    }
  }
  return absl::OkStatus();
}

absl::Status WriteSummaries(const ExperimentConfig& cfg,
                            const std::string& out_dir,
                            const std::vector<BestRow>& best) {
  if (out_dir.empty()) return absl::OkStatus();
  const std::filesystem::path dir(out_dir);
  MATTRIB_RETURN_IF_ERROR(WriteTextFile((dir / "best.csv").string(), BestCsv(best)));
  if (cfg.write_plots && !best.empty()) {
    MATTRIB_RETURN_IF_ERROR(WriteTextFile(
        (dir / "best_test_accuracy.svg").string(), BestAccuracySvg(best)));
  }
  return absl::OkStatus();
}

absl::StatusOr<ExperimentResult> RunGrid(const ExperimentConfig& cfg,
                                         const Prepared& p,
                                         const std::vector<BoundingSpec>& specs,
                                         const std::string& out_dir) {
  MATTRIB_RETURN_IF_ERROR(ValidateGrid(cfg));
  if (specs.empty()) return absl::InvalidArgumentError("no bounding specs");
  std::optional<NoiseTable> table;
  if (!cfg.noise_table.empty()) {
    auto t = LoadNoiseTable(cfg.noise_table);
    if (!t.ok()) return t.status();
    table = *std::move(t);
  }
  RunWriter writer;
  MATTRIB_RETURN_IF_ERROR(writer.Open(out_dir));
  ExperimentResult result;
  for (const BoundingSpec& spec : specs) {
    if (cfg.mechanism == MechanismKind::kDpSgd) {
      MATTRIB_RETURN_IF_ERROR(RunDpSgdSpec(cfg, p, table ? &*table : nullptr,
                                           spec, writer, result.rows));
    } else {
      MATTRIB_RETURN_IF_ERROR(RunDpMfSpec(cfg, p, spec, writer, result.rows));
    }
  }
  result.best = SelectBest(result.rows);
  MATTRIB_RETURN_IF_ERROR(WriteSummaries(cfg, out_dir, result.best));
  return result;
}

}  // namespace

absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& cfg,
                                               const std::string& out_dir) {
  MATTRIB_RETURN_IF_ERROR(ValidateGrid(cfg));
  auto p = Prepare(cfg);
  if (!p.ok()) return p.status();
  return RunGrid(cfg, *p, cfg.bounding, out_dir);
}

std::vector<BiasSetting> BiasGrid(const BiasSweepSpec& spec) {
  std::vector<BiasSetting> out;
  for (uint32_t u : spec.thresholds) {
    for (uint32_t c2 = 1; c2 <= spec.max_run; ++c2) {
      out.push_back({u, 1, c2});
    }
    for (uint32_t c1 = 1; c1 <= spec.max_run; ++c1) {
      out.push_back({u, c1, 1});
    }
  }
  return out;
}

absl::StatusOr<BiasSweepResult> SweepBiasTradeoff(const ExperimentConfig& cfg,
                                                  const std::string& out_dir) {
  MATTRIB_RETURN_IF_ERROR(ValidateGrid(cfg));
  if (cfg.mechanism != MechanismKind::kDpSgd) {
    return absl::InvalidArgumentError("the bias sweep trains with dpsgd");
  }
  auto p = Prepare(cfg);
  if (!p.ok()) return p.status();
  BiasSweepResult result;
  result.settings = BiasGrid(cfg.bias);
  std::vector<SizeArityPoint> points;
  for (BiasSetting& s : result.settings) {
    InterleaveSpec is{s.threshold, s.low_run, s.high_run, cfg.bias.allow_dup};
    auto r = GreedyInterleaved(p->train_graph, cfg.bias.k, is);
    if (!r.ok()) return r.status();
    s.size = r->total_count;
    s.avg_arity = r->avg_arity;
    points.push_back({static_cast<double>(s.size), s.avg_arity});
  }
  std::vector<BoundingSpec> specs;
  std::set<std::tuple<uint32_t, uint32_t, uint32_t>> seen;
  for (size_t i : ParetoFilter(points)) {
    BiasSetting& s = result.settings[i];
    s.pareto = true;
    if (s.size == 0 || !seen.insert({s.threshold, s.low_run, s.high_run}).second) {
      continue;
    }
    BoundingSpec spec;
    spec.name = absl::StrCat("u", s.threshold, "_c", s.low_run, "_", s.high_run);
    spec.algo = BoundingAlgo::kInterleaved;
    spec.k = cfg.bias.k;
    spec.interleave = {s.threshold, s.low_run, s.high_run, cfg.bias.allow_dup};
    specs.push_back(spec);
  }
  if (!out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    std::string csv = "threshold,c1,c2,size,avg_arity,pareto\n";
    for (const BiasSetting& s : result.settings) {
      absl::StrAppend(&csv, s.threshold, ",", s.low_run, ",", s.high_run, ",",
                      s.size, ",", Num(s.avg_arity), ",", s.pareto ? 1 : 0,
                      "\n");
    }
    MATTRIB_RETURN_IF_ERROR(WriteTextFile(
        (std::filesystem::path(out_dir) / "settings.csv").string(), csv));
  }
  auto grid = RunGrid(cfg, *p, specs, out_dir);
  if (!grid.ok()) return grid.status();
  result.experiment = *std::move(grid);
  return result;
}

size_t MaxFeasibleMinSep(const Hypergraph& h, size_t steps, size_t batch_size,
                         size_t max_b, const OrderSpec& order) {
  size_t best = 0;
  for (size_t b = 1; b <= max_b; ++b) {
    if (!GreedyMinSep(h, steps, batch_size, b, order).ok()) break;
    best = b;
  }
  return best;
}

absl::StatusOr<std::vector<RetentionRow>> CompareRetention(
    const RetentionSpec& spec, const std::string& out_dir) {
  std::vector<RetentionRow> rows;
  for (size_t n : spec.num_edges) {
    for (double d : spec.degrees) {
      GraphGenSpec gen;
      gen.num_edges = n;
      gen.expected_arity = spec.expected_arity;
      gen.expected_degree = d;
      gen.skew_alpha = spec.skew_alpha;
      gen.seed = spec.seed;
      auto regular = GenerateRegular(gen);
      if (!regular.ok()) return regular.status();
      auto skewed = GenerateSkewed(gen);
      if (!skewed.ok()) return skewed.status();
      size_t regular_b = 0, skewed_b = 0;
      if (spec.probe_minsep) {
        regular_b = MaxFeasibleMinSep(*regular, spec.minsep_steps,
                                      spec.minsep_batch, spec.max_min_sep);
        skewed_b = MaxFeasibleMinSep(*skewed, spec.minsep_steps,
                                     spec.minsep_batch, spec.max_min_sep);
      }
      for (uint32_t k : spec.ks) {
        RetentionRow row;
        row.num_edges = n;
        row.k = k;
        row.degree = d;
        row.regular_selected = GreedyDup(*regular, k).total_count;
        row.skewed_selected = GreedyDup(*skewed, k).total_count;
        row.retention_ratio =
            row.regular_selected == 0
                ? kNan
                : static_cast<double>(row.skewed_selected) / row.regular_selected;
        row.regular_max_b = regular_b;
        row.skewed_max_b = skewed_b;
        row.minsep_batch = spec.probe_minsep ? spec.minsep_batch : 0;
        rows.push_back(row);
      }
    }
  }
  std::sort(rows.begin(), rows.end(), [](const RetentionRow& a, const RetentionRow& b) {
    return std::tie(a.num_edges, a.k, a.degree) < std::tie(b.num_edges, b.k, b.degree);
  });
  if (!out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    MATTRIB_RETURN_IF_ERROR(WriteTextFile(
        (std::filesystem::path(out_dir) / "retention.csv").string(),
        RetentionCsv(rows)));
  }
  return rows;
}

std::string RetentionCsv(const std::vector<RetentionRow>& rows) {
  std::string out =
      "num_edges,k,expected_degree,regular_selected,skewed_selected,"
      "retention_ratio,regular_max_b_times_batch,skewed_max_b_times_batch\n";
  for (const RetentionRow& r : rows) {
    absl::StrAppend(&out, r.num_edges, ",", r.k, ",", Num(r.degree), ",",
                    r.regular_selected, ",", r.skewed_selected, ",",
                    Num(r.retention_ratio), ",", r.regular_max_b * r.minsep_batch,
                    ",", r.skewed_max_b * r.minsep_batch, "\n");
  }
  return out;
}

std::string BestAccuracySvg(const std::vector<BestRow>& best) {
  constexpr double kW = 640, kH = 400, kLeft = 60, kRight = 160, kTop = 20,
                   kBottom = 50;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  std::map<std::string, std::vector<std::pair<double, double>>> lines;
  std::vector<std::string> order;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const BestRow& b : best) {
    if (!lines.contains(b.bounding)) order.push_back(b.bounding);
    const double x = std::log2(b.epsilon);
    lines[b.bounding].push_back({x, b.mean_test_accuracy});
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, b.mean_test_accuracy);
    y1 = std::max(y1, b.mean_test_accuracy);
  }
  if (x1 <= x0) x1 = x0 + 1;
  y0 -= 0.01;
  y1 += 0.01;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * (kW - kLeft - kRight); };
  auto py = [&](double y) { return kH - kBottom - (y - y0) / (y1 - y0) * (kH - kTop - kBottom); };
  std::string svg = absl::StrFormat(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%%\" height=\"100%%\" fill=\"white\"/>\n",
      static_cast<int>(kW), static_cast<int>(kH));
  absl::StrAppendFormat(&svg,
                        "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n"
                        "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n",
                        kLeft, kH - kBottom, kW - kRight, kH - kBottom, kLeft, kTop,
                        kLeft, kH - kBottom);
  for (int t = static_cast<int>(std::ceil(x0)); t <= static_cast<int>(std::floor(x1)); ++t) {
    absl::StrAppendFormat(&svg,
                          "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">2^%d</text>\n",
                          px(t), kH - kBottom + 18, t);
  }
  for (int i = 0; i <= 4; ++i) {
    const double y = y0 + (y1 - y0) * i / 4;
    absl::StrAppendFormat(&svg,
                          "<text x=\"%g\" y=\"%g\" text-anchor=\"end\">%.3f</text>\n",
                          kLeft - 6, py(y) + 4, y);
  }
  absl::StrAppendFormat(&svg,
                        "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">epsilon</text>\n",
                        (kLeft + kW - kRight) / 2, kH - 10);
  for (size_t i = 0; i < order.size(); ++i) {
    auto& pts = lines[order[i]];
    std::sort(pts.begin(), pts.end());
    std::vector<std::string> coords;
    for (const auto& [x, y] : pts) coords.push_back(absl::StrFormat("%.2f,%.2f", px(x), py(y)));
    const char* color = kColors[i % 8];
    absl::StrAppendFormat(&svg,
                          "<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"2\" "
                          "points=\"%s\"/>\n",
                          color, absl::StrJoin(coords, " "));
    absl::StrAppendFormat(&svg,
                          "<text x=\"%g\" y=\"%g\" fill=\"%s\">%s</text>\n",
                          kW - kRight + 10, kTop + 16 * (i + 1), color, order[i]);
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace mattrib
