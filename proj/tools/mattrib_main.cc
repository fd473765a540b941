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

// Command-line front end for graph and data generation, contribution
// bounding, ILP export, privacy calibration, training and experiments.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "mattrib/accounting.h"
#include "mattrib/bounding.h"
#include "mattrib/datagen.h"
#include "mattrib/dptrain.h"
#include "mattrib/graphgen.h"
#include "mattrib/harness.h"
#include "mattrib/hypergraph.h"
#include "mattrib/ilp.h"
#include "mattrib/strategy.h"

namespace {

using ::mattrib::EdgeId;

int Fail(const absl::Status& s) {
  std::cerr << "error: " << s << "\n";
  return 1;
}

struct GenGraphArgs {
  std::string model = "regular";
  size_t edges = 1000;
  double arity = 2.0;
  double degree = 2.0;
  double alpha = 1.5;
  uint64_t seed = 0;
  std::string out;
};

int GenGraph(const GenGraphArgs& a) {
  mattrib::GraphGenSpec spec{a.edges, a.arity, a.degree, a.alpha, a.seed};
  auto h = a.model == "regular" ? mattrib::GenerateRegular(spec)
                                : mattrib::GenerateSkewed(spec);
  if (!h.ok()) return Fail(h.status());
  if (auto s = mattrib::SaveHypergraph(*h, a.out); !s.ok()) return Fail(s);
  std::cout << absl::StrFormat("edges=%d users=%d mean_arity=%.4f max_degree=%d\n",
                               h->num_edges(), h->num_users(),
                               mattrib::MeanArity(*h), h->max_degree());
  return 0;
}

struct GenDataArgs {
  size_t dim = 100;
  double steepness = 20.0;
  double beta = 1.0;
  std::string covariance = "inv_dim";
  uint64_t seed = 0;
  std::string graph;
  std::string out;
};

int GenData(const GenDataArgs& a) {
  auto h = mattrib::LoadHypergraph(a.graph);
  if (!h.ok()) return Fail(h.status());
  mattrib::RegressionSpec spec;
  spec.dim = a.dim;
  spec.steepness = a.steepness;
  spec.beta = a.beta;
  spec.seed = a.seed;
  spec.covariance = a.covariance == "inv_sqrt_dim"
                        ? mattrib::Covariance::kInvSqrtDim
                        : mattrib::Covariance::kInvDim;
  auto ds = mattrib::GenerateRegression(*h, spec);
  if (!ds.ok()) return Fail(ds.status());
  if (auto s = mattrib::SaveDataset(*ds, a.out); !s.ok()) return Fail(s);
  const mattrib::SplitSizes sizes = mattrib::CountSplits(*ds);
  std::cout << absl::StrFormat("examples=%d train=%d validation=%d test=%d\n",
                               ds->num_examples(), sizes.train,
                               sizes.validation, sizes.test);
  return 0;
}

struct BoundArgs {
  std::string algo = "dup";
  uint32_t k = 2;
  size_t steps = 0;
  size_t batch = 0;
  size_t b = 1;
  uint32_t u = 2;
  uint32_t c1 = 1;
  uint32_t c2 = 1;
  bool no_dup = false;
  std::string mode = "all";
  size_t size = 0;
  uint64_t seed = 0;
  std::string tie = "id";
  std::string graph;
  std::string out;
};

int Bound(const BoundArgs& a) {
  auto h = mattrib::LoadHypergraph(a.graph);
  if (!h.ok()) return Fail(h.status());
  mattrib::OrderSpec order;
  order.tie = a.tie == "seeded-shuffle" ? mattrib::TieBreak::kSeededShuffle
                                        : mattrib::TieBreak::kEdgeId;
  order.seed = a.seed;
  mattrib::BoundingResult r;
  if (a.algo == "nodup") {
    r = mattrib::GreedyNoDup(*h, a.k, order);
  } else if (a.algo == "dup") {
    r = mattrib::GreedyDup(*h, a.k, order);
  } else if (a.algo == "minsep") {
    auto res = mattrib::GreedyMinSep(*h, a.steps, a.batch, a.b, order);
    if (!res.ok()) return Fail(res.status());
    r = *std::move(res);
  } else if (a.algo == "interleaved") {
    auto res = mattrib::GreedyInterleaved(*h, a.k, {a.u, a.c1, a.c2, !a.no_dup},
                                          order);
    if (!res.ok()) return Fail(res.status());
    r = *std::move(res);
  } else {
    static const std::map<std::string, mattrib::RandomPool> kPools = {
        {"all", mattrib::RandomPool::kAll},
        {"low", mattrib::RandomPool::kLow},
        {"high", mattrib::RandomPool::kHigh}};
    auto sel = mattrib::RandomBaseline(*h, a.size, kPools.at(a.mode), a.seed);
    if (!sel.ok()) return Fail(sel.status());
    r = mattrib::Summarize(*h, *std::move(sel));
  }
  const absl::Status saved =
      r.schedule ? mattrib::SaveSchedule(*r.schedule, a.out)
                 : mattrib::SaveSelection(r.selection, a.out);
  if (!saved.ok()) return Fail(saved);
  std::cout << absl::StrFormat("total=%d distinct=%d k=%d avg_arity=%.6f\n",
                               r.total_count, r.distinct_count, r.achieved_k,
                               r.avg_arity);
  return 0;
}

struct IlpArgs {
  std::string graph;
  std::string out;
  uint32_t k = 1;
  bool allow_dup = false;
  size_t steps = 1;
  size_t batch = 1;
  size_t b = 1;
  uint64_t max_nodes = 100'000'000;
  double max_seconds = 60;
};

int IlpExportCb(const IlpArgs& a) {
  auto h = mattrib::LoadHypergraph(a.graph);
  if (!h.ok()) return Fail(h.status());
  if (auto s = mattrib::ExportCbIlp(*h, a.k, a.allow_dup, a.out); !s.ok()) {
    return Fail(s);
  }
  return 0;
}

int IlpExportMinSep(const IlpArgs& a) {
  auto h = mattrib::LoadHypergraph(a.graph);
  if (!h.ok()) return Fail(h.status());
  if (auto s = mattrib::ExportMinSepIlp(*h, a.steps, a.batch, a.b, a.out);
      !s.ok()) {
    return Fail(s);
  }
  return 0;
}

int IlpSolveCb(const IlpArgs& a) {
  auto h = mattrib::LoadHypergraph(a.graph);
  if (!h.ok()) return Fail(h.status());
  auto r = mattrib::ExactSolveCb(*h, a.k, a.allow_dup,
                                 {a.max_nodes, a.max_seconds});
  if (!r.ok()) return Fail(r.status());
  if (!a.out.empty()) {
    if (auto s = mattrib::SaveSelection(r->result.selection, a.out); !s.ok()) {
      return Fail(s);
    }
  }
  std::cout << absl::StrFormat("total=%d distinct=%d k=%d optimal=%d nodes=%d\n",
                               r->result.total_count, r->result.distinct_count,
                               r->result.achieved_k, r->optimal ? 1 : 0,
                               r->nodes);
  return 0;
}

struct AccountArgs {
  std::string mech = "dpsgd";
  double eps = 1.0;
  double delta = 1e-5;
  uint32_t k = 0;
  double p = 1.0;
  size_t steps = 1;
  size_t b = 1;
};

int AccountCalibrate(const AccountArgs& a) {
  const mattrib::PrivacyBudget budget{a.eps, a.delta};
  if (a.mech == "dpsgd") {
    const uint32_t k = a.k == 0 ? 1 : a.k;
    auto sigma = mattrib::CalibrateSigmaDpSgd(budget, k, a.p, a.steps);
    if (!sigma.ok()) return Fail(sigma.status());
    std::cout << absl::StrFormat("sigma=%.10g accountant=%s k=%d\n", *sigma,
                                 mattrib::kAccountantRdpGroup, k);
    return 0;
  }
  // Without an explicit k, use the min-sep worst case ceil(T / b).
  const uint32_t k =
      a.k != 0 ? a.k : static_cast<uint32_t>((a.steps + a.b - 1) / a.b);
  auto sigma = mattrib::CalibrateSigmaDpMf(budget, k);
  if (!sigma.ok()) return Fail(sigma.status());
  std::cout << absl::StrFormat("sigma=%.10g accountant=%s k=%d\n", *sigma,
                               mattrib::kAccountantGaussian, k);
  return 0;
}

struct TrainArgs {
  std::string data;
  std::string selection;
  std::string schedule;
  std::string graph;  // required with a schedule
  size_t steps = 100;
  size_t batch = 64;
  double clip = 1.0;
  double sigma = 0.0;
  double lr = 0.1;
  std::string optimizer = "sgd";
  size_t band = 1;
  std::string strategy = "optimized";
  uint64_t seed = 0;
  size_t log_every = 0;
  std::string model_out;
  std::string metrics_out;
};

int Train(const TrainArgs& a) {
  auto ds = mattrib::LoadDataset(a.data);
  if (!ds.ok()) return Fail(ds.status());
  mattrib::TrainConfig cfg;
  cfg.steps = a.steps;
  cfg.batch_size = a.batch;
  cfg.clip_norm = a.clip;
  cfg.noise_multiplier = a.sigma;
  cfg.learning_rate = a.lr;
  cfg.optimizer =
      a.optimizer == "adam" ? mattrib::Optimizer::kAdam : mattrib::Optimizer::kSgd;
  cfg.seed = a.seed;
  cfg.log_every = a.log_every;
  const std::vector<EdgeId> validation =
      ds->IndicesOf(mattrib::Split::kValidation);
  cfg.monitor = validation;
  absl::StatusOr<mattrib::TrainResult> result;
  if (!a.schedule.empty()) {
    auto schedule = mattrib::LoadSchedule(a.schedule);
    if (!schedule.ok()) return Fail(schedule.status());
    if (a.graph.empty()) {
      return Fail(absl::InvalidArgumentError("--schedule requires --graph"));
    }
    auto graph = mattrib::LoadHypergraph(a.graph);
    if (!graph.ok()) return Fail(graph.status());
    if (auto s = mattrib::ValidateSchedule(*graph, *schedule); !s.ok()) {
      return Fail(s);
    }
    if (!mattrib::CheckMinSep(*graph, *schedule, a.band)) {
      return Fail(absl::FailedPreconditionError(absl::StrCat(
          "schedule is not ", a.band, "-min-separated; lower --band")));
    }
    schedule->min_sep = a.band;
    cfg.batch_size = schedule->batch_size;
    auto c = mattrib::BuildStrategy(schedule->num_batches(), a.band,
                                    a.strategy == "identity"
                                        ? mattrib::StrategyMode::kIdentity
                                        : mattrib::StrategyMode::kOptimized);
    if (!c.ok()) return Fail(c.status());
    result = mattrib::DpMfTrain(*ds, *schedule, cfg, *c);
  } else {
    auto selection = mattrib::LoadSelection(a.selection);
    if (!selection.ok()) return Fail(selection.status());
    result = mattrib::DpSgdTrain(*ds, *selection, cfg);
  }
  if (!result.ok()) return Fail(result.status());
  if (!a.model_out.empty()) {
    if (auto s = mattrib::SaveModel(result->model, a.model_out); !s.ok()) {
      return Fail(s);
    }
  }
  if (!a.metrics_out.empty()) {
    if (auto s = mattrib::WriteTextFile(a.metrics_out,
                                        mattrib::MetricsCsv(result->trajectory));
        !s.ok()) {
      return Fail(s);
    }
  }
  const std::vector<EdgeId> test = ds->IndicesOf(mattrib::Split::kTest);
  auto eval = mattrib::Evaluate(result->model, *ds, test);
  if (!eval.ok()) return Fail(eval.status());
  std::cout << absl::StrFormat("test_loss=%.6f test_accuracy=%.6f\n", eval->loss,
                               eval->accuracy);
  return 0;
}

int Experiment(const std::string& which, const std::string& config,
               const std::string& out) {
  auto cfg = mattrib::LoadConfig(config);
  if (!cfg.ok()) return Fail(cfg.status());
  if (which == "run") {
    auto r = mattrib::RunExperiment(*cfg, out);
    if (!r.ok()) return Fail(r.status());
    std::cout << mattrib::BestCsv(r->best);
  } else if (which == "sweep-bias") {
    auto r = mattrib::SweepBiasTradeoff(*cfg, out);
    if (!r.ok()) return Fail(r.status());
    size_t kept = 0;
    for (const auto& s : r->settings) kept += s.pareto ? 1 : 0;
    std::cout << absl::StrFormat("settings=%d pareto=%d\n", r->settings.size(),
                                 kept);
    std::cout << mattrib::BestCsv(r->experiment.best);
  } else {
    auto r = mattrib::CompareRetention(cfg->retention, out);
    if (!r.ok()) return Fail(r.status());
    std::cout << mattrib::RetentionCsv(*r);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contribution bounding and private training for "
               "multi-attribution data"};
  app.require_subcommand(1);

  GenGraphArgs gg;
  auto* gen_graph = app.add_subcommand("gen-graph", "Generate a hypergraph");
  gen_graph->add_option("--model", gg.model)
      ->check(CLI::IsMember({"regular", "skewed"}));
  gen_graph->add_option("--edges", gg.edges, "number of edges")->required();
  gen_graph->add_option("--arity", gg.arity, "expected users per edge");
  gen_graph->add_option("--degree", gg.degree, "expected edges per user");
  gen_graph->add_option("--alpha", gg.alpha, "skew exponent");
  gen_graph->add_option("--seed", gg.seed);
  gen_graph->add_option("--out", gg.out)->required();

  GenDataArgs gd;
  auto* gen_data = app.add_subcommand("gen-data", "Generate regression data");
  gen_data->add_option("--dim", gd.dim);
  gen_data->add_option("--steepness", gd.steepness);
  gen_data->add_option("--beta", gd.beta);
  gen_data->add_option("--covariance", gd.covariance)
      ->check(CLI::IsMember({"inv_dim", "inv_sqrt_dim"}));
  gen_data->add_option("--seed", gd.seed);
  gen_data->add_option("--graph", gd.graph)->required();
  gen_data->add_option("--out", gd.out)->required();

  BoundArgs bd;
  auto* bound = app.add_subcommand("bound", "Contribution-bound a hypergraph");
  bound->add_option("--algo", bd.algo)
      ->check(CLI::IsMember({"nodup", "dup", "minsep", "interleaved", "random"}));
  bound->add_option("--k", bd.k);
  bound->add_option("--T", bd.steps, "min-sep steps");
  bound->add_option("--B", bd.batch, "min-sep batch size");
  bound->add_option("--b", bd.b, "min-sep separation");
  bound->add_option("--u", bd.u, "interleave arity threshold");
  bound->add_option("--c1", bd.c1, "low-arity run length");
  bound->add_option("--c2", bd.c2, "high-arity run length");
  bound->add_flag("--no-dup", bd.no_dup, "interleave without duplicates");
  bound->add_option("--mode", bd.mode, "random pool")
      ->check(CLI::IsMember({"all", "low", "high"}));
  bound->add_option("--size", bd.size, "random baseline size");
  bound->add_option("--seed", bd.seed);
  bound->add_option("--tie", bd.tie)
      ->check(CLI::IsMember({"id", "seeded-shuffle"}));
  bound->add_option("--graph", bd.graph)->required();
  bound->add_option("--out", bd.out)->required();

  IlpArgs ia;
  auto* ilp = app.add_subcommand("ilp", "Exact formulations");
  ilp->require_subcommand(1);
  auto* export_cb = ilp->add_subcommand("export-cb", "Write the bounding ILP");
  auto* export_ms = ilp->add_subcommand("export-minsep", "Write the min-sep ILP");
  auto* solve_cb = ilp->add_subcommand("solve-cb", "Solve small instances");
  for (CLI::App* sub : {export_cb, export_ms, solve_cb}) {
    sub->add_option("--graph", ia.graph)->required();
  }
  export_cb->add_option("--k", ia.k);
  export_cb->add_flag("--allow-dup", ia.allow_dup);
  export_cb->add_option("--out", ia.out)->required();
  export_ms->add_option("--T", ia.steps);
  export_ms->add_option("--B", ia.batch);
  export_ms->add_option("--b", ia.b);
  export_ms->add_option("--out", ia.out)->required();
  solve_cb->add_option("--k", ia.k);
  solve_cb->add_flag("--allow-dup", ia.allow_dup);
  solve_cb->add_option("--max-nodes", ia.max_nodes);
  solve_cb->add_option("--max-seconds", ia.max_seconds);
  solve_cb->add_option("--out", ia.out, "optional selection output");

  AccountArgs aa;
  auto* account = app.add_subcommand("account", "Privacy accounting");
  account->require_subcommand(1);
  auto* calibrate = account->add_subcommand("calibrate", "Calibrate sigma");
  calibrate->add_option("--mech", aa.mech)
      ->check(CLI::IsMember({"dpsgd", "dpmf"}));
  calibrate->add_option("--eps", aa.eps)->required();
  calibrate->add_option("--delta", aa.delta)->required();
  calibrate->add_option("--k", aa.k);
  calibrate->add_option("--p", aa.p);
  calibrate->add_option("--steps", aa.steps);
  calibrate->add_option("--b", aa.b);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train on a selection or schedule");
  train->add_option("--data", ta.data)->required();
  auto* sel_opt = train->add_option("--selection", ta.selection);
  auto* sched_opt = train->add_option("--schedule", ta.schedule);
  sel_opt->excludes(sched_opt);
  train->add_option("--graph", ta.graph, "hypergraph of a schedule");
  train->add_option("--steps", ta.steps);
  train->add_option("--batch", ta.batch);
  train->add_option("--clip", ta.clip);
  train->add_option("--sigma", ta.sigma);
  train->add_option("--lr", ta.lr);
  train->add_option("--optimizer", ta.optimizer)
      ->check(CLI::IsMember({"sgd", "adam"}));
  train->add_option("--band", ta.band);
  train->add_option("--strategy", ta.strategy)
      ->check(CLI::IsMember({"optimized", "identity"}));
  train->add_option("--seed", ta.seed);
  train->add_option("--log-every", ta.log_every);
  train->add_option("--model-out", ta.model_out);
  train->add_option("--metrics-out", ta.metrics_out);

  std::string exp_config, exp_out;
  auto* experiment = app.add_subcommand("experiment", "Config-driven sweeps");
  experiment->require_subcommand(1);
  std::vector<CLI::App*> exp_subs = {
      experiment->add_subcommand("run", "Bound, calibrate, train, evaluate"),
      experiment->add_subcommand("sweep-bias", "Interleaved bias sweep"),
      experiment->add_subcommand("retention", "Regular vs skewed retention")};
  for (CLI::App* sub : exp_subs) {
    sub->add_option("--config", exp_config)->required();
    sub->add_option("--out", exp_out);
  }

  CLI11_PARSE(app, argc, argv);

  if (*gen_graph) return GenGraph(gg);
  if (*gen_data) return GenData(gd);
  if (*bound) return Bound(bd);
  if (*export_cb) return IlpExportCb(ia);
  if (*export_ms) return IlpExportMinSep(ia);
  if (*solve_cb) return IlpSolveCb(ia);
  if (*calibrate) return AccountCalibrate(aa);
  if (*train) {
    if (ta.selection.empty() == ta.schedule.empty()) {
      return Fail(absl::InvalidArgumentError(
          "train needs exactly one of --selection or --schedule"));
    }
    return Train(ta);
  }
  for (CLI::App* sub : exp_subs) {
    if (*sub) return Experiment(sub->get_name(), exp_config, exp_out);
  }
  return 1;
}
