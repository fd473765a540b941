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

// Acceptance checks, one per criterion. Usage: acceptance_test [N ...]
// Prints "criterion N: PASS|FAIL <details>" and exits nonzero on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "absl/strings/str_cat.h"
#include "mattrib/accounting.h"
#include "mattrib/bounding.h"
#include "mattrib/datagen.h"
#include "mattrib/dptrain.h"
#include "mattrib/graphgen.h"
#include "mattrib/harness.h"
#include "mattrib/hypergraph.h"
#include "mattrib/ilp.h"
#include "mattrib/model.h"
#include "mattrib/strategy.h"

namespace mattrib {
namespace {

// Collects failures for one criterion.
class Report {
 public:
  void Check(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && failures_.size() < 10) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  void Note(const std::string& s) { notes_.push_back(s); }
  bool ok() const { return failed_ == 0; }

  std::string Summary() const {
    std::string s = absl::StrCat(checks_, " checks");
    for (const std::string& n : notes_) absl::StrAppend(&s, "; ", n);
    if (failed_ > 0) {
      absl::StrAppend(&s, "; ", failed_, " failed:");
      for (const std::string& f : failures_) absl::StrAppend(&s, " [", f, "]");
    }
    return s;
  }

 private:
  size_t checks_ = 0;
  size_t failed_ = 0;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

class Timer {
 public:
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

std::string Fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

Hypergraph RandomHypergraph(std::mt19937_64& rng, size_t max_edges,
                            size_t max_arity) {
  const size_t num_users = 1 + rng() % 60;
  const size_t num_edges = 1 + rng() % max_edges;
  const size_t arity_cap = std::min(max_arity, num_users);
  std::vector<UserId> all(num_users);
  for (size_t u = 0; u < num_users; ++u) all[u] = u;
  std::vector<std::vector<UserId>> edges(num_edges);
  for (auto& e : edges) {
    const size_t arity = 1 + rng() % arity_cap;
    std::shuffle(all.begin(), all.end(), rng);
    e.assign(all.begin(), all.begin() + arity);
  }
  return *Hypergraph::Create(num_users, edges);
}

// No unselected edge can be added without exceeding k.
bool IsMaximal(const Hypergraph& h, const Selection& s, uint32_t k) {
  std::vector<uint32_t> load(h.num_users(), 0);
  for (const auto& [e, c] : s.counts()) {
    for (UserId u : h.users(e)) load[u] += c;
  }
  for (EdgeId e = 0; e < h.num_edges(); ++e) {
    if (s.count(e) > 0) continue;
    bool blocked = false;
    for (UserId u : h.users(e)) blocked |= load[u] >= k;
    if (!blocked) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// 1. Feasibility of every bounding algorithm.

bool Criterion1(Report& r) {
  Timer timer;
  std::mt19937_64 rng(101);
  const int kGraphs = 1000;
  size_t schedules = 0;
  for (int g = 0; g < kGraphs; ++g) {
    const Hypergraph h = RandomHypergraph(rng, 200, 5);
    const uint32_t k = 1 + rng() % 5;
    const OrderSpec order{rng() % 2 ? TieBreak::kEdgeId
                                    : TieBreak::kSeededShuffle,
                          rng()};
    const std::string tag = absl::StrCat("graph ", g, " k=", k);

    const BoundingResult nodup = GreedyNoDup(h, k, order);
    r.Check(CheckContributionBound(h, nodup.selection, k), tag + " nodup");
    r.Check(IsMaximal(h, nodup.selection, k), tag + " nodup maximal");
    r.Check(nodup.total_count == nodup.distinct_count, tag + " nodup copies");

    const BoundingResult dup = GreedyDup(h, k, order);
    r.Check(CheckContributionBound(h, dup.selection, k), tag + " dup");

    InterleaveSpec spec;
    spec.threshold = 1 + rng() % 4;
    spec.low_run = 1 + rng() % 10;
    spec.high_run = 1 + rng() % 10;
    spec.allow_dup = rng() % 2;
    auto il = GreedyInterleaved(h, k, spec, order);
    r.Check(il.ok(), tag + " interleaved status");
    if (il.ok()) {
      r.Check(CheckContributionBound(h, il->selection, k),
              tag + " interleaved");
    }

    const size_t steps = 1 + rng() % 20;
    const size_t batch = 1 + rng() % std::max<size_t>(1, h.num_edges() / 8);
    const size_t sep = 1 + rng() % 8;
    auto ms = GreedyMinSep(h, steps, batch, sep, order);
    if (ms.ok()) {
      ++schedules;
      const Schedule& s = *ms->schedule;
      r.Check(CheckMinSep(h, s, sep), tag + " minsep");
      r.Check(s.num_batches() == steps, tag + " minsep steps");
      bool sizes = true;
      for (const auto& b : s.batches) sizes &= b.size() == batch;
      r.Check(sizes, tag + " minsep batch sizes");
      r.Check(ms->achieved_k <= (steps + sep - 1) / sep, tag + " post-hoc k");
    } else {
      r.Check(absl::IsNotFound(ms.status()),
              tag + " minsep error kind: " + std::string(ms.status().message()));
    }
  }
  const double secs = timer.Seconds();
  r.Check(secs < 60.0, "runtime < 60 s");
  r.Note(absl::StrCat(kGraphs, " graphs, ", schedules, " feasible schedules"));
  r.Note(absl::StrCat("runtime ", Fmt(secs), " s"));
  return r.ok();
}

// ---------------------------------------------------------------------------
// 2. Exact solver versus greedy, and independent-set reductions.

// Examples are vertices, users are graph edges, k = 1.
Hypergraph IndependentSetReduction(
    size_t num_vertices, const std::vector<std::pair<int, int>>& graph_edges) {
  std::vector<std::vector<UserId>> examples(num_vertices);
  for (size_t u = 0; u < graph_edges.size(); ++u) {
    examples[graph_edges[u].first].push_back(u);
    examples[graph_edges[u].second].push_back(u);
  }
  // Isolated vertices get a private user.
  size_t users = graph_edges.size();
  for (auto& e : examples) {
    if (e.empty()) e.push_back(users++);
  }
  return *Hypergraph::Create(users, examples);
}

int BruteForceIndependentSet(size_t n,
                             const std::vector<std::pair<int, int>>& edges) {
  int best = 0;
  for (uint32_t mask = 0; mask < (1u << n); ++mask) {
    bool independent = true;
    for (const auto& [a, b] : edges) {
      independent &= !((mask >> a) & 1 && (mask >> b) & 1);
    }
    if (independent) best = std::max(best, __builtin_popcount(mask));
  }
  return best;
}

struct GraphFixture {
  std::string name;
  size_t n;
  std::vector<std::pair<int, int>> edges;
  int alpha;  // known independence number
};

std::vector<GraphFixture> Fixtures() {
  std::vector<GraphFixture> f;
  f.push_back({"P3", 3, {{0, 1}, {1, 2}}, 2});
  f.push_back({"C5", 5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}}, 2});
  f.push_back({"K4", 4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}, 1});
  f.push_back({"K1,5", 6, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}}, 5});
  f.push_back({"P6", 6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}}, 3});
  GraphFixture petersen{"Petersen", 10, {}, 4};
  for (int i = 0; i < 5; ++i) {
    petersen.edges.push_back({i, (i + 1) % 5});
    petersen.edges.push_back({i, i + 5});
    petersen.edges.push_back({5 + i, 5 + (i + 2) % 5});
  }
  f.push_back(petersen);
  GraphFixture cube{"Q3", 8, {}, 4};
  for (int v = 0; v < 8; ++v) {
    for (int bit = 0; bit < 3; ++bit) {
      const int w = v ^ (1 << bit);
      if (v < w) cube.edges.push_back({v, w});
    }
  }
  f.push_back(cube);
  return f;
}

bool Criterion2(Report& r) {
  Timer timer;
  std::mt19937_64 rng(202);
  const int kInstances = 250;
  int strictly_better = 0;
  for (int t = 0; t < kInstances; ++t) {
    const Hypergraph h = RandomHypergraph(rng, 30, 5);
    const uint32_t k = 1 + rng() % 3;
    const std::string tag = absl::StrCat("instance ", t, " k=", k);
    const BoundingResult greedy = GreedyNoDup(h, k);
    auto exact = ExactSolveCb(h, k, /*allow_dup=*/false);
    r.Check(exact.ok(), tag + " status");
    if (!exact.ok()) continue;
    r.Check(exact->optimal, tag + " optimal");
    r.Check(CheckContributionBound(h, exact->result.selection, k),
            tag + " exact feasible");
    r.Check(CheckContributionBound(h, greedy.selection, k),
            tag + " greedy feasible");
    r.Check(exact->result.total_count >= greedy.total_count,
            tag + " exact >= greedy");
    if (exact->result.total_count > greedy.total_count) ++strictly_better;
  }
  for (const GraphFixture& f : Fixtures()) {
    const Hypergraph h = IndependentSetReduction(f.n, f.edges);
    const int brute = BruteForceIndependentSet(f.n, f.edges);
    r.Check(brute == f.alpha, f.name + " brute-force alpha");
    auto exact = ExactSolveCb(h, 1, false);
    r.Check(exact.ok() && exact->optimal, f.name + " exact status");
    if (!exact.ok()) continue;
    r.Check(exact->result.total_count == static_cast<size_t>(f.alpha),
            absl::StrCat(f.name, " exact ", exact->result.total_count,
                         " vs alpha ", f.alpha));
  }
  const double secs = timer.Seconds();
  r.Check(secs < 120.0, "runtime < 120 s");
  r.Note(absl::StrCat(kInstances, " instances, exact > greedy on ",
                      strictly_better));
  r.Note(absl::StrCat(Fixtures().size(), " reduction fixtures"));
  r.Note(absl::StrCat("runtime ", Fmt(secs), " s"));
  return r.ok();
}

// ---------------------------------------------------------------------------
// 3. Streaming correlated noise and the b = 1 equivalence.

std::vector<double> DenseLowerInverse(const std::vector<double>& c, size_t n) {
  std::vector<double> inv(n * n, 0.0);
  for (size_t col = 0; col < n; ++col) {
    for (size_t i = col; i < n; ++i) {
      double v = i == col ? 1.0 : 0.0;
      for (size_t k = col; k < i; ++k) v -= c[i * n + k] * inv[k * n + col];
      inv[i * n + col] = v / c[i * n + i];
    }
  }
  return inv;
}

// Column-normalized, diagonally dominant banded strategy.
StrategyMatrix RandomStrategy(std::mt19937_64& rng, size_t steps,
                              size_t band) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double off = band > 1 ? 0.6 / (band - 1) : 0.0;
  std::vector<double> coeffs(steps * band, 0.0);
  for (size_t j = 0; j < steps; ++j) {
    coeffs[j * band] = 1.0;
    for (size_t r = 1; r < band && j + r < steps; ++r) {
      coeffs[j * band + r] = off * u(rng);
    }
    double n2 = 0;
    for (size_t r = 0; r < band; ++r) n2 += coeffs[j * band + r] * coeffs[j * band + r];
    for (size_t r = 0; r < band; ++r) coeffs[j * band + r] /= std::sqrt(n2);
  }
  return *StrategyMatrix::FromBands(steps, band, coeffs);
}

bool SameTrajectory(const std::vector<StepMetrics>& a,
                    const std::vector<StepMetrics>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].step != b[i].step || a[i].loss != b[i].loss ||
        a[i].accuracy != b[i].accuracy || a[i].sigma != b[i].sigma ||
        a[i].grad_norm_mean != b[i].grad_norm_mean) {
      return false;
    }
  }
  return true;
}

bool Criterion3(Report& r) {
  std::mt19937_64 rng(303);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const size_t steps = 1 + rng() % 64;
    const size_t band = 1 + rng() % steps;
    const size_t dims = 1 + rng() % 4;
    const uint64_t seed = rng();
    const StrategyMatrix c = RandomStrategy(rng, steps, band);
    const std::vector<double> inv = DenseLowerInverse(c.Dense(), steps);
    std::vector<std::vector<double>> z(steps);
    for (size_t i = 0; i < steps; ++i) z[i] = StandardNormalDraw(seed, i, dims);
    NoiseStream stream(c, dims, 1.0, seed);
    double err = 0.0;
    for (size_t i = 0; i < steps; ++i) {
      auto got = stream.Next();
      r.Check(got.ok(), absl::StrCat("strategy ", t, " step ", i));
      if (!got.ok()) break;
      for (size_t d = 0; d < dims; ++d) {
        double want = 0.0;
        for (size_t k = 0; k <= i; ++k) want += inv[i * steps + k] * z[k][d];
        err = std::max(err, std::abs((*got)[d] - want));
      }
    }
    r.Check(err <= 1e-10, absl::StrCat("strategy ", t, " (T=", steps,
                                       ", b=", band, ") error ", Fmt(err)));
    worst = std::max(worst, err);
  }
  r.Note(absl::StrCat("100 strategies, max abs error ", Fmt(worst)));

  // b = 1 DP-MF against DP-SGD on the same batches.
  GraphGenSpec g;
  g.num_edges = 4000;
  g.seed = 3;
  const Hypergraph h = *GenerateRegular(g);
  RegressionSpec rs;
  rs.dim = 20;
  rs.seed = 4;
  const RegressionDataset ds = *GenerateRegression(h, rs);
  const std::vector<EdgeId> train = ds.IndicesOf(Split::kTrain);
  const Hypergraph th = InducedByEdges(h, train);
  auto ms = GreedyMinSep(th, 40, 32, 3);
  r.Check(ms.ok(), "min-sep schedule for equivalence");
  if (!ms.ok()) return r.ok();
  Schedule schedule = *ms->schedule;
  for (auto& batch : schedule.batches) {
    for (EdgeId& e : batch) e = train[e];
  }
  const std::vector<EdgeId> monitor = ds.IndicesOf(Split::kValidation);
  for (Optimizer opt : {Optimizer::kSgd, Optimizer::kAdam}) {
    TrainConfig cfg;
    cfg.batch_size = 32;
    cfg.clip_norm = 0.7;
    cfg.noise_multiplier = 1.3;
    cfg.learning_rate = 0.05;
    cfg.optimizer = opt;
    cfg.seed = 17;
    cfg.log_every = 1;
    cfg.monitor = monitor;
    cfg.steps = schedule.num_batches();
    auto mf = DpMfTrain(ds, schedule, cfg, StrategyMatrix::Identity(40));
    auto sgd = DpSgdTrainFixedBatches(ds, schedule.batches, cfg);
    const std::string tag = opt == Optimizer::kSgd ? "sgd" : "adam";
    r.Check(mf.ok() && sgd.ok(), tag + " equivalence runs");
    if (!mf.ok() || !sgd.ok()) continue;
    r.Check(mf->model == sgd->model, tag + " final model bit-identical");
    r.Check(SameTrajectory(mf->trajectory, sgd->trajectory),
            tag + " trajectory bit-identical");
    r.Check(mf->trajectory.size() == 40, tag + " trajectory length");
  }
  return r.ok();
}

// ---------------------------------------------------------------------------
// 4. Accounting.

// Gaussian privacy loss tail by quadrature, independent of the closed form.
double QuadratureGaussianDelta(double eps, double sigma) {
  // delta = E_{x~N(0,s^2)}[(1 - e^{eps - L(x)})_+], L(x) = (2x + 1) / (2 s^2)
  // with the shift mu = 1 in the numerator distribution.
  const double lo = sigma * sigma * eps + 0.5;  // L(x) = eps at x = lo
  const double hi = lo + 40.0 * sigma + 40.0;
  const int n = 200000;
  const double step = (hi - lo) / n;
  auto f = [&](double x) {
    const double density =
        std::exp(-0.5 * (x - 1) * (x - 1) / (sigma * sigma)) /
        (sigma * std::sqrt(2 * M_PI));
    const double loss = (2 * x - 1) / (2 * sigma * sigma);
    return density * -std::expm1(eps - loss);
  };
  double s = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) s += f(lo + i * step) * (i % 2 ? 4 : 2);
  return s * step / 3;
}

bool Criterion4(Report& r) {
  Timer timer;
  // Round trip of the analytic Gaussian calibration.
  double worst_rel = 0.0;
  for (double eps : {0.05, 0.5, 1.0, 4.0, 16.0, 64.0}) {
    for (double delta : {1e-3, 1e-5, 1e-10}) {
      auto sigma = CalibrateSigmaGaussian({eps, delta});
      r.Check(sigma.ok(), absl::StrCat("calibrate ", eps, " ", delta));
      if (!sigma.ok()) continue;
      const double got = AnalyticGaussianDelta(eps, *sigma);
      const double rel = std::abs(got - delta) / delta;
      worst_rel = std::max(worst_rel, rel);
      r.Check(got <= delta && rel <= 1e-5,
              absl::StrCat("round trip eps=", eps, " delta=", delta,
                           " rel ", Fmt(rel)));
    }
  }
  // Independent bisection on the quadrature delta.
  {
    double lo = 0.1, hi = 100.0;
    for (int i = 0; i < 60; ++i) {
      const double mid = std::sqrt(lo * hi);
      (QuadratureGaussianDelta(1.0, mid) > 1e-5 ? lo : hi) = mid;
    }
    const double got = *CalibrateSigmaGaussian({1.0, 1e-5});
    const double rel = std::abs(got - hi) / hi;
    r.Check(rel <= 1e-5, absl::StrCat("quadrature oracle sigma ", Fmt(hi),
                                      " vs ", Fmt(got)));
    r.Note(absl::StrCat("sigma(1, 1e-5) = ", Fmt(got)));
  }
  r.Note(absl::StrCat("max round-trip rel error ", Fmt(worst_rel)));

  // Monotonicity on a k x T x p x eps grid.
  const std::vector<uint32_t> ks = {1, 2, 4};
  const std::vector<size_t> ts = {10, 100, 1000};
  const std::vector<double> ps = {0.001, 0.01, 0.1};
  const std::vector<double> es = {0.5, 2.0, 8.0};
  const double delta = 1e-10;
  std::map<std::tuple<size_t, size_t, size_t, size_t>, double> sigma;
  for (size_t a = 0; a < ks.size(); ++a) {
    for (size_t b = 0; b < ts.size(); ++b) {
      for (size_t c = 0; c < ps.size(); ++c) {
        for (size_t d = 0; d < es.size(); ++d) {
          auto s = CalibrateSigmaDpSgd({es[d], delta}, ks[a], ps[c], ts[b]);
          r.Check(s.ok(), absl::StrCat("dpsgd calibrate k=", ks[a], " T=",
                                       ts[b], " p=", ps[c], " eps=", es[d]));
          sigma[{a, b, c, d}] = s.ok() ? *s : 0.0;
        }
      }
    }
  }
  size_t comparisons = 0;
  for (const auto& [key, s] : sigma) {
    auto [a, b, c, d] = key;
    auto check = [&](std::tuple<size_t, size_t, size_t, size_t> next,
                     bool increasing, const char* axis) {
      auto it = sigma.find(next);
      if (it == sigma.end()) return;
      ++comparisons;
      r.Check(increasing ? it->second >= s : it->second <= s,
              absl::StrCat("monotone in ", axis, " at (", a, ",", b, ",", c,
                           ",", d, ")"));
    };
    check({a + 1, b, c, d}, true, "k");
    check({a, b + 1, c, d}, true, "T");
    check({a, b, c + 1, d}, true, "p");
    check({a, b, c, d + 1}, false, "eps");
  }
  r.Note(absl::StrCat(sigma.size(), " grid cells, ", comparisons,
                      " monotonicity comparisons"));

  // Amplification never hurts.
  for (double eps : {0.5, 2.0, 8.0}) {
    for (size_t steps : {10u, 100u}) {
      auto full = CalibrateSigmaDpSgd({eps, delta}, 2, 1.0, steps);
      r.Check(full.ok(), "unamplified calibration");
      for (double p : {0.001, 0.1, 0.5}) {
        auto amp = CalibrateSigmaDpSgd({eps, delta}, 2, p, steps);
        r.Check(amp.ok() && full.ok() && *amp <= *full,
                absl::StrCat("amplified <= unamplified eps=", eps, " T=",
                             steps, " p=", p));
      }
    }
  }

  // Group lift closed form.
  for (double eps : {0.0, 0.1, 1.0, 3.0}) {
    for (double d : {1e-10, 1e-6}) {
      for (uint32_t k : {1u, 2u, 5u, 20u}) {
        auto g = GroupLift(eps, d, k);
        r.Check(g.ok() && !g->saturated, "group lift status");
        if (!g.ok()) continue;
        const double want_eps = k * eps;
        const double want_delta = k * std::exp((k - 1.0) * eps) * d;
        r.Check(g->budget.epsilon == want_eps &&
                    g->budget.delta == want_delta,
                absl::StrCat("group lift eps=", eps, " delta=", d, " k=", k));
      }
    }
  }
  auto sat = GroupLift(400.0, 1e-10, 3);
  r.Check(sat.ok() && sat->saturated && sat->budget.delta == 1.0,
          "group lift saturation");

  const double secs = timer.Seconds();
  r.Check(secs < 60.0, "runtime < 60 s");
  r.Note(absl::StrCat("runtime ", Fmt(secs), " s"));
  return r.ok();
}

// ---------------------------------------------------------------------------
// 5. Trainer correctness.

double ExampleLoss(const Model& m, const RegressionDataset& ds, EdgeId i) {
  const auto f = ds.feature(i);
  double z = m.intercept;
  for (size_t j = 0; j < f.size(); ++j) z += m.weights[j] * f[j];
  return ds.labels[i] ? Softplus(-z) : Softplus(z);
}

bool Criterion5(Report& r) {
  GraphGenSpec g;
  g.num_edges = 3000;
  g.seed = 5;
  const Hypergraph h = *GenerateRegular(g);
  RegressionSpec rs;
  rs.dim = 25;
  rs.seed = 6;
  const RegressionDataset ds = *GenerateRegression(h, rs);

  // Finite differences.
  std::mt19937_64 rng(505);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    Model m(ds.dim);
    for (double& w : m.weights) w = normal(rng);
    m.intercept = normal(rng);
    const EdgeId i = rng() % ds.num_examples();
    const std::vector<double> grad =
        ClippedGradient(m, ds, i, std::numeric_limits<double>::infinity());
    double diff2 = 0.0, norm2 = 0.0;
    for (size_t j = 0; j < m.num_params(); ++j) {
      const double step = 1e-5;
      Model plus = m, minus = m;
      double& wp = j < m.dim() ? plus.weights[j] : plus.intercept;
      double& wm = j < m.dim() ? minus.weights[j] : minus.intercept;
      wp += step;
      wm -= step;
      const double fd =
          (ExampleLoss(plus, ds, i) - ExampleLoss(minus, ds, i)) / (2 * step);
      diff2 += (grad[j] - fd) * (grad[j] - fd);
      norm2 += fd * fd;
    }
    const double rel = std::sqrt(diff2 / norm2);
    worst = std::max(worst, rel);
    r.Check(rel <= 1e-5, absl::StrCat("case ", c, " rel error ", Fmt(rel)));
  }
  r.Note(absl::StrCat("100 finite-difference cases, worst rel error ",
                      Fmt(worst)));

  // sigma = 0, clip = inf against plain full-batch gradient descent.
  const std::vector<EdgeId> train = ds.IndicesOf(Split::kTrain);
  std::vector<EdgeId> subset(train.begin(), train.begin() + 500);
  Selection sel;
  for (EdgeId e : subset) sel.Add(e);
  for (Optimizer opt : {Optimizer::kSgd, Optimizer::kAdam}) {
    TrainConfig cfg;
    cfg.steps = 30;
    cfg.batch_size = sel.total_count();
    cfg.clip_norm = std::numeric_limits<double>::infinity();
    cfg.noise_multiplier = 0.0;
    cfg.learning_rate = 0.2;
    cfg.optimizer = opt;
    cfg.log_every = 5;
    cfg.seed = 9;
    auto dp = DpSgdTrain(ds, sel, cfg);
    auto plain = NonPrivateTrain(ds, sel.Expand(), cfg);
    const std::string tag = opt == Optimizer::kSgd ? "sgd" : "adam";
    r.Check(dp.ok() && plain.ok(), tag + " noiseless runs");
    if (!dp.ok() || !plain.ok()) continue;
    r.Check(dp->model == plain->model, tag + " model bit-identical");
    r.Check(SameTrajectory(dp->trajectory, plain->trajectory),
            tag + " trajectory bit-identical");
  }
  // Hand-rolled SGD for the same run, summed naively.
  {
    TrainConfig cfg;
    cfg.steps = 10;
    cfg.batch_size = subset.size();
    cfg.clip_norm = std::numeric_limits<double>::infinity();
    cfg.learning_rate = 0.2;
    auto dp = DpSgdTrain(ds, sel, cfg);
    Model m(ds.dim);
    for (size_t s = 0; s < cfg.steps; ++s) {
      std::vector<double> sum(m.num_params(), 0.0);
      for (EdgeId e : subset) {
        const auto gr = ClippedGradient(m, ds, e, cfg.clip_norm);
        for (size_t j = 0; j < sum.size(); ++j) sum[j] += gr[j];
      }
      for (size_t j = 0; j < m.dim(); ++j) {
        m.weights[j] -= cfg.learning_rate * sum[j] / subset.size();
      }
      m.intercept -= cfg.learning_rate * sum.back() / subset.size();
    }
    double err = 0.0;
    for (size_t j = 0; j < m.dim(); ++j) {
      err = std::max(err, std::abs(m.weights[j] - dp->model.weights[j]));
    }
    err = std::max(err, std::abs(m.intercept - dp->model.intercept));
    r.Check(err <= 1e-12, absl::StrCat("naive SGD reference error ", Fmt(err)));
  }

  // Monte Carlo noise standard deviation.
  for (auto [clip, sigma, batch] :
       {std::tuple{1.0, 1.0, 64.0}, std::tuple{0.3, 2.5, 16.0},
        std::tuple{4.0, 0.7, 256.0}}) {
    TrainConfig cfg;
    cfg.steps = 10000;
    cfg.batch_size = static_cast<size_t>(batch);
    cfg.clip_norm = clip;
    cfg.noise_multiplier = sigma;
    cfg.learning_rate = 1e-3;
    cfg.seed = 13;
    double s = 0, ss = 0;
    size_t n = 0;
    cfg.noise_observer = [&](size_t, std::span<const double> z) {
      for (double v : z) {
        s += v;
        ss += v * v;
        ++n;
      }
    };
    // Empty batches keep the run cheap; the noise is the same.
    std::vector<std::vector<EdgeId>> batches(cfg.steps);
    auto res = DpSgdTrainFixedBatches(ds, batches, cfg);
    r.Check(res.ok() && n == cfg.steps * (ds.dim + 1),
            absl::StrCat("noise run: ", res.status().ToString()));
    const double mean = s / n;
    const double sd = std::sqrt(ss / n - mean * mean);
    const double want = clip * sigma / batch;
    r.Check(std::abs(sd - want) <= 0.05 * want,
            absl::StrCat("noise std ", Fmt(sd), " vs ", Fmt(want)));
    r.Note(absl::StrCat("noise std ", Fmt(sd), "/", Fmt(want)));
  }
  return r.ok();
}

// ---------------------------------------------------------------------------
// 6. Duplicates versus no duplicates on a regular graph.

// Keep configs/run_dup_vs_nodup.toml in sync.
constexpr char kDupVsNoDupConfig[] = R"toml(
[graph]
model = "regular"
num_edges = 125000
expected_arity = 2.0
expected_degree = 2.0
seed = 0

[data]
dim = 100
seed = 0

[[bounding]]
name = "nodup"
algo = "nodup"
k = 4

[[bounding]]
name = "dup"
algo = "dup"
k = 4

[mechanism]
kind = "dpsgd"
epsilons = [0.5, 64]
delta = 1e-10

[train]
optimizer = "adam"
learning_rates = [0.001, 0.002, 0.005]
clip_norms = [1.0]
batch_sizes = [1024, 4096]
product = 10240000
num_seeds = 5
)toml";

bool Criterion6(Report& r) {
  Timer timer;
  auto cfg = ParseConfig(kDupVsNoDupConfig);
  r.Check(cfg.ok(), "config parses");
  if (!cfg.ok()) {
    r.Note(std::string(cfg.status().message()));
    return false;
  }
  cfg->write_plots = false;
  auto res = RunExperiment(*cfg, "");
  r.Check(res.ok(), "experiment runs");
  if (!res.ok()) {
    r.Note(std::string(res.status().message()));
    return false;
  }
  std::map<std::pair<std::string, double>, BestRow> best;
  for (const BestRow& b : res->best) best[{b.bounding, b.epsilon}] = b;
  auto get = [&](const std::string& name, double eps) -> const BestRow* {
    auto it = best.find({name, eps});
    return it == best.end() ? nullptr : &it->second;
  };
  const BestRow* dup_lo = get("dup", 0.5);
  const BestRow* nodup_lo = get("nodup", 0.5);
  const BestRow* dup_hi = get("dup", 64);
  const BestRow* nodup_hi = get("nodup", 64);
  r.Check(dup_lo && nodup_lo && dup_hi && nodup_hi, "all four cells feasible");
  if (!(dup_lo && nodup_lo && dup_hi && nodup_hi)) return false;
  for (const BestRow* b : {nodup_lo, dup_lo, nodup_hi, dup_hi}) {
    r.Check(b->num_seeds == 5, b->bounding + " seeds");
    r.Note(absl::StrCat(b->bounding, "@", b->epsilon, " test acc ",
                        Fmt(b->mean_test_accuracy), " +- ",
                        Fmt(b->stderr_test_accuracy), " (lr ",
                        b->learning_rate, ", B ", b->batch_size, ", sigma ",
                        Fmt(b->sigma), ")"));
  }
  r.Check(dup_lo->mean_test_accuracy > nodup_lo->mean_test_accuracy,
          "dup beats nodup at eps 0.5");
  r.Check(nodup_hi->mean_test_accuracy >= dup_hi->mean_test_accuracy - 0.005,
          "nodup within 0.005 of dup at eps 64");
  const double secs = timer.Seconds();
  r.Check(secs <= 1800.0, "runtime <= 30 min");
  r.Note(absl::StrCat("runtime ", Fmt(secs), " s"));
  return r.ok();
}

// ---------------------------------------------------------------------------
// 7. Retention on skewed graphs.

bool Criterion7(Report& r) {
  Timer timer;
  RetentionSpec spec;
  spec.num_edges = {125000};
  spec.ks = {2, 4, 8};
  spec.degrees = {2, 4, 8};
  spec.expected_arity = 2.0;
  spec.skew_alpha = 1.5;
  spec.probe_minsep = false;
  auto rows = CompareRetention(spec, "");
  r.Check(rows.ok(), "retention runs");
  if (!rows.ok()) return false;
  r.Check(rows->size() == 9, "9 cells");
  std::map<std::pair<uint32_t, double>, double> ratio;
  for (const RetentionRow& row : *rows) {
    ratio[{row.k, row.degree}] = row.retention_ratio;
    r.Check(row.retention_ratio < 1.0,
            absl::StrCat("ratio < 1 at k=", row.k, " d=", row.degree));
    r.Note(absl::StrCat("k=", row.k, " d=", row.degree, " ratio ",
                        Fmt(row.retention_ratio)));
  }
  for (uint32_t k : spec.ks) {
    r.Check(ratio[{k, 8.0}] < ratio[{k, 2.0}],
            absl::StrCat("ratio(d=8) < ratio(d=2) at k=", k));
  }
  const double secs = timer.Seconds();
  r.Check(secs <= 300.0, "runtime <= 5 min");
  r.Note(absl::StrCat("runtime ", Fmt(secs), " s"));
  return r.ok();
}

// ---------------------------------------------------------------------------
// 8. Bias-study mechanics.

bool Dominated(const SizeArityPoint& p, const SizeArityPoint& q) {
  return q.size >= p.size && q.avg_arity >= p.avg_arity &&
         (q.size > p.size || q.avg_arity > p.avg_arity);
}

bool Criterion8(Report& r) {
  BiasSweepSpec spec;
  r.Check(BiasGrid(spec).size() == 80, "bias grid has 80 settings");

  // The sweep itself on a small graph.
  ExperimentConfig cfg;
  cfg.graph.gen.num_edges = 3000;
  cfg.graph.gen.seed = 8;
  cfg.data.dim = 5;
  cfg.epsilons = {4.0};
  cfg.learning_rates = {0.05};
  cfg.batch_sizes = {64};
  cfg.product = 640;
  cfg.seeds = {0};
  cfg.write_plots = false;
  auto sweep = SweepBiasTradeoff(cfg, "");
  r.Check(sweep.ok(), "sweep runs");
  if (sweep.ok()) {
    r.Check(sweep->settings.size() == 80, "sweep produces 80 settings");
    std::vector<SizeArityPoint> pts;
    for (const BiasSetting& s : sweep->settings) {
      pts.push_back({static_cast<double>(s.size), s.avg_arity});
    }
    bool flags = true;
    for (size_t i = 0; i < pts.size(); ++i) {
      bool dominated = false;
      for (size_t j = 0; j < pts.size(); ++j) dominated |= Dominated(pts[i], pts[j]);
      flags &= sweep->settings[i].pareto == !dominated;
    }
    r.Check(flags, "sweep pareto flags match brute force");
    r.Note(absl::StrCat(
        std::count_if(sweep->settings.begin(), sweep->settings.end(),
                      [](const BiasSetting& s) { return s.pareto; }),
        " pareto settings in the sweep"));
  }

  // Pareto filter against brute force, with ties.
  std::mt19937_64 rng(808);
  for (int t = 0; t < 500; ++t) {
    const size_t n = rng() % 40;
    std::vector<SizeArityPoint> pts(n);
    for (auto& p : pts) {
      p.size = static_cast<double>(rng() % 10);
      p.avg_arity = 1.0 + static_cast<double>(rng() % 8) / 4;
    }
    std::vector<size_t> want;
    for (size_t i = 0; i < n; ++i) {
      bool dominated = false;
      for (size_t j = 0; j < n; ++j) dominated |= Dominated(pts[i], pts[j]);
      if (!dominated) want.push_back(i);
    }
    r.Check(ParetoFilter(pts) == want, absl::StrCat("pareto trial ", t));
  }

  // Random (high) pool.
  for (int t = 0; t < 200; ++t) {
    const Hypergraph h = RandomHypergraph(rng, 200, 5);
    std::vector<size_t> a(h.num_edges());
    for (EdgeId e = 0; e < h.num_edges(); ++e) a[e] = h.arity(e);
    std::sort(a.begin(), a.end());
    const size_t n = a.size();
    const double median =
        n % 2 ? a[n / 2] : 0.5 * (a[n / 2 - 1] + a[n / 2]);
    std::vector<EdgeId> want;
    for (EdgeId e = 0; e < h.num_edges(); ++e) {
      if (h.arity(e) > median) want.push_back(e);
    }
    r.Check(RandomPoolEdges(h, RandomPool::kHigh) == want,
            absl::StrCat("high pool trial ", t));
    if (!want.empty()) {
      const size_t size = 1 + rng() % want.size();
      auto sel = RandomBaseline(h, size, RandomPool::kHigh, rng());
      bool inside = sel.ok() && sel->total_count() == size;
      if (sel.ok()) {
        for (const auto& [e, c] : sel->counts()) {
          inside &= c == 1 && h.arity(e) > median;
        }
      }
      r.Check(inside, absl::StrCat("high baseline trial ", t));
    }
  }
  return r.ok();
}

// ---------------------------------------------------------------------------
// 9. Generator statistics.

bool Criterion9(Report& r) {
  Timer timer;
  GraphGenSpec g;
  g.num_edges = 100000;
  g.expected_arity = 2.0;
  g.expected_degree = 2.0;
  const Hypergraph h = *GenerateRegular(g);
  double s = 0, ss = 0;
  for (EdgeId e = 0; e < h.num_edges(); ++e) {
    s += h.arity(e);
    ss += static_cast<double>(h.arity(e)) * h.arity(e);
  }
  const double n = h.num_edges();
  const double mean = s / n;
  const double se = std::sqrt((ss / n - mean * mean) / n);
  r.Check(std::abs(mean - 2.0) <= 3 * se,
          absl::StrCat("mean arity ", Fmt(mean), " se ", Fmt(se)));
  r.Note(absl::StrCat("mean arity ", Fmt(mean), " (se ", Fmt(se), ")"));

  int wins = 0;
  const int kSeeds = 100;
  for (int seed = 0; seed < kSeeds; ++seed) {
    GraphGenSpec spec;
    spec.num_edges = 125000;
    spec.skew_alpha = 1.5;
    spec.seed = seed;
    const Hypergraph reg = *GenerateRegular(spec);
    const Hypergraph skew = *GenerateSkewed(spec);
    if (skew.max_degree() > reg.max_degree()) ++wins;
  }
  r.Check(wins >= 95, absl::StrCat("skewed max degree wins ", wins, "/100"));
  r.Note(absl::StrCat("skewed max degree larger in ", wins, "/", kSeeds,
                      " seeds at 125000 edges"));
  r.Note(absl::StrCat("runtime ", Fmt(timer.Seconds()), " s"));
  return r.ok();
}

}  // namespace
}  // namespace mattrib

int main(int argc, char** argv) {
  using Fn = bool (*)(mattrib::Report&);
  const Fn criteria[] = {mattrib::Criterion1, mattrib::Criterion2,
                         mattrib::Criterion3, mattrib::Criterion4,
                         mattrib::Criterion5, mattrib::Criterion6,
                         mattrib::Criterion7, mattrib::Criterion8,
                         mattrib::Criterion9};
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty()) {
    for (int i = 1; i <= 9; ++i) which.push_back(i);
  }
  bool all = true;
  for (int n : which) {
    if (n < 1 || n > 9) {
      std::fprintf(stderr, "unknown criterion %d\n", n);
      return 2;
    }
    mattrib::Report report;
    const bool ok = criteria[n - 1](report);
    std::printf("criterion %d: %s %s\n", n, ok ? "PASS" : "FAIL",
                report.Summary().c_str());
    std::fflush(stdout);
    all &= ok;
  }
  return all ? 0 : 1;
}
