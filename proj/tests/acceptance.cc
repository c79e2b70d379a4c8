// Copyright 2026 The gridcharge Authors
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

// Acceptance checks for the library as a whole. Prints one PASS/FAIL/SKIP
// line per criterion and exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fixtures.h"
#include "gridcharge/bilevel.h"
#include "gridcharge/errors.h"
#include "gridcharge/kkt.h"
#include "gridcharge/linear_program.h"
#include "gridcharge/market.h"
#include "gridcharge/network.h"
#include "gridcharge/quadratic_program.h"
#include "gridcharge/report.h"
#include "gridcharge/scenario_io.h"
#include "oracles.h"

namespace gridcharge {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  enum Kind { kPass, kFail, kSkip } kind = kPass;
  std::string detail;
};

Outcome Check(bool ok, const std::string& detail) {
  return {ok ? Outcome::kPass : Outcome::kFail, detail};
}

std::string Fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c, d);
  return buf;
}

std::string DataFile(const std::string& name) {
  return std::string(GRIDCHARGE_DATA_DIR) + "/" + name;
}

// Shared state so that the 9-bus sweeps run once.
struct NineBus {
  Scenario es;
  Scenario noes;
  PriceGrid grid{0.0, 1.0, 51};
  double rho = 0.01;
  SweepResult sweep_es;
  SweepResult sweep_noes;
  double sweep_es_seconds = 0.0;
};

NineBus& Bundled() {
  static NineBus* nine = [] {
    auto* n = new NineBus;
    n->es = LoadScenario(DataFile("ieee9_seed42.json"));
    n->noes = LoadScenario(DataFile("ieee9_seed42_noes.json"));
    n->rho = n->es.market.rho;
    const auto start = Clock::now();
    n->sweep_es = SweepPrices(n->es, n->grid, n->rho, {}, 1);
    n->sweep_es_seconds = Seconds(start);
    n->sweep_noes = SweepPrices(n->noes, n->grid, n->rho, {}, 1);
    return n;
  }();
  return *nine;
}

// 1. Distances and PTDF consistency.
Outcome NetworkOracle() {
  const auto start = Clock::now();
  const std::vector<LineSpec> tri = {{0, 1, 1.0, 1.0}, {1, 2, 1.0, 1.0}, {0, 2, 1.0, 1.0}};
  const BusNetwork net(3, tri, 2);
  double tri_err = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      if (i != j) tri_err = std::max(tri_err, std::abs(net.distance(i, j) - 4.0 / 3.0));
    }
  }
  std::mt19937_64 rng(1);
  double ptdf_err = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = testing::Pick(rng, 2, 12);
    const BusNetwork g(n, testing::RandomLines(rng, n, testing::Pick(rng, 0, 6), 1.0),
                       testing::Pick(rng, 0, n - 1));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        Vector p(n, 0.0);
        p[i] += 1.0;
        p[j] -= 1.0;
        const FlowState s = g.SolveDcFlow({p});
        for (std::size_t l = 0; l < g.num_lines(); ++l) {
          ptdf_err = std::max(ptdf_err, std::abs(s.flows[0][l] - g.Ptdf(l, i, j)));
        }
      }
    }
  }
  const double t = Seconds(start);
  return Check(tri_err <= 1e-9 && ptdf_err <= 1e-8 && t < 1.0,
               Fmt("triangle |d-4/3| = %.2e (tol 1e-9), PTDF vs DC flow %.2e (tol 1e-8), "
                   "%.3f s (limit 1 s)",
                   tri_err, ptdf_err, t));
}

// 2. The five-bus illustration needs line reactances that exist only in a
// drawing and could not be read reliably.
Outcome FiveBusAnchor() {
  return {Outcome::kSkip,
          "five-bus reactances are not available as data; the triangle oracle (criterion 1) "
          "covers the distance computation"};
}

// 3. LP and QP solvers against vertex enumeration.
Outcome SolverCorrectness() {
  const auto start = Clock::now();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double lp_err = 0.0, qp_err = 0.0, residual = 0.0;
  int solved = 0, mismatched_status = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 3;
    const std::size_t m = 1 + trial % 4;
    LinearProgram lp;
    testing::Dense g;
    std::vector<double> h, c(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double lo = -2.0 + u(rng), hi = 2.0 + u(rng);
      c[j] = u(rng);
      lp.AddVariable(lo, hi, c[j]);
      std::vector<double> e(n, 0.0);
      e[j] = 1.0;
      g.push_back(e);
      h.push_back(hi);
      e[j] = -1.0;
      g.push_back(e);
      h.push_back(-lo);
    }
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<double> row(n);
      for (double& v : row) v = u(rng);
      const double b = u(rng) + 0.5;
      const bool eq = rng() % 4 == 0;
      const auto r = lp.AddRow(eq ? RowSense::kEqual : RowSense::kLessEqual, b);
      for (std::size_t j = 0; j < n; ++j) lp.AddCoefficient(r, j, row[j]);
      g.push_back(row);
      h.push_back(b);
      if (eq) {
        for (double& v : row) v = -v;
        g.push_back(row);
        h.push_back(-b);
      }
    }
    const auto expected = testing::VertexEnumerationMax(g, h, c);
    const LpSolution sol = SolveLp(lp);
    QuadraticProgram qp;
    qp.linear() = lp;
    const QpSolution qsol = SolveQp(qp);
    if (!expected) {
      mismatched_status += sol.status != SolveStatus::kInfeasible;
      mismatched_status += qsol.status != SolveStatus::kInfeasible;
      continue;
    }
    if (sol.status != SolveStatus::kOptimal || qsol.status != SolveStatus::kOptimal) {
      ++mismatched_status;
      continue;
    }
    ++solved;
    lp_err = std::max(lp_err, std::abs(sol.objective - *expected));
    qp_err = std::max(qp_err, std::abs(qsol.objective - sol.objective));
    for (const Residuals& r : {sol.residuals, qsol.residuals}) {
      residual = std::max({residual, r.primal / 1e-7, r.dual / 1e-7, r.gap / 1e-6,
                           r.complementarity / 1e-6});
    }
  }
  const double t = Seconds(start);
  return Check(mismatched_status == 0 && lp_err <= 1e-6 && qp_err <= 1e-7 && residual <= 1.0 &&
                   t < 30.0,
               Fmt("%g optimal instances, LP vs enumeration %.2e (tol 1e-6), QP vs LP %.2e "
                   "(tol 1e-7), worst residual/tolerance %.2f, ",
                   solved, lp_err, qp_err, residual) +
                   std::to_string(mismatched_status) + " status mismatches, " +
                   Fmt("%.2f s (limit 30 s)", t));
}

double PrimalViolation(const LinearProgram& lp, const Vector& x) {
  const Vector ax = lp.BuildMatrix().Multiply(x);
  double v = 0.0;
  for (std::size_t i = 0; i < ax.size(); ++i) {
    const double d = ax[i] - lp.rhs()[i];
    if (lp.senses()[i] != RowSense::kGreaterEqual) v = std::max(v, d);
    if (lp.senses()[i] != RowSense::kLessEqual) v = std::max(v, -d);
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    v = std::max({v, lp.lower()[j] - x[j], x[j] - lp.upper()[j]});
  }
  return v;
}

// 4. KKT and strong-duality certificates of solved prosumer problems.
Outcome KktCertification() {
  const auto start = Clock::now();
  double worst = 0.0;
  std::size_t instances = 0;
  auto certify = [&](const Scenario& s, double gamma) {
    const LowerLevelProgram program = BuildLowerLp(s.fleet, s.trades, s.grid().distances(), gamma);
    const MarketResponse r = SolveMarket(program, s.num_buses);
    const KktSystem kkt = AssembleKkt(program);
    const KktResiduals res = EvaluateKkt(kkt, r.primal, CollectDuals(kkt, r.duals, r.reduced_costs));
    worst = std::max({worst, res.stationarity, res.primal, res.dual_sign,
                      std::abs(res.strong_duality), res.complementarity});
    ++instances;
  };
  NineBus& nine = Bundled();
  for (std::size_t k = 0; k < nine.grid.levels(); ++k) {
    certify(nine.es, nine.grid.level(k));
    certify(nine.noes, nine.grid.level(k));
  }
  const Scenario tri = LoadScenario(DataFile("triangle.json"));
  for (std::size_t k = 0; k < 11; ++k) certify(tri, 0.1 * static_cast<double>(k));

  // Complementarity versus strong duality on tiny random instances: pair the
  // optimal duals with primal points on the segment from an idle feasible
  // point to the optimum.
  std::mt19937_64 rng(4);
  int agree = 0, total = 0;
  double optimal_products = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Scenario s = testing::RandomScenario(rng);
    const LowerLevelProgram program =
        BuildLowerLp(s.fleet, s.trades, s.grid().distances(), testing::Uniform(rng, 0.0, 0.3));
    const LinearProgram& lp = program.lp();
    const MarketResponse r = SolveMarket(program, s.num_buses);
    const KktSystem kkt = AssembleKkt(program);
    const Vector duals = CollectDuals(kkt, r.duals, r.reduced_costs);
    Vector idle(lp.num_variables(), 0.0);
    for (std::size_t t = 0; t < program.horizon(); ++t) {
      for (std::size_t i = 0; i < s.fleet.size(); ++i) {
        idle[program.energy_col(t, i)] = s.fleet.prosumers[i].battery.initial_energy;
      }
    }
    for (double lambda : {0.0, 0.5, 1.0}) {
      Vector x(lp.num_variables());
      for (std::size_t j = 0; j < x.size(); ++j) {
        x[j] = lambda * r.primal[j] + (1.0 - lambda) * idle[j];
      }
      if (PrimalViolation(lp, x) > 1e-9) continue;
      const KktResiduals res = EvaluateKkt(kkt, x, duals);
      const bool sd = std::abs(res.strong_duality) <= 1e-6;
      const bool cs = res.complementarity <= 1e-6;
      agree += sd == cs;
      ++total;
      if (lambda == 1.0) optimal_products = std::max(optimal_products, res.complementarity);
    }
  }
  const double t = Seconds(start);
  return Check(worst <= 1e-6 && agree == total && optimal_products <= 1e-6 && t < 60.0,
               Fmt("%g market instances, worst KKT/strong-duality residual %.2e (tol 1e-6); ",
                   static_cast<double>(instances), worst) +
                   std::to_string(agree) + "/" + std::to_string(total) +
                   " complementarity-vs-strong-duality agreements, " +
                   Fmt("max product at optimum %.2e, %.2f s (limit 60 s)", optimal_products, t));
}

// 5. Enumeration against the explicit-binary reformulation.
Outcome ReformulationEquivalence() {
  const auto start = Clock::now();
  std::mt19937_64 rng(5);
  double worst = 0.0;
  int compared = 0, disagreements = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const Scenario s = testing::RandomScenario(rng);
    const PriceGrid grid(0.0, 0.4, 5);
    const auto oracle = testing::BruteForceEquilibrium(s, grid, 0.01);
    try {
      const EquilibriumResult eq = SolveEquilibrium(s, grid, 0.01, {});
      if (!oracle) {
        ++disagreements;
        continue;
      }
      worst = std::max(worst, std::abs(eq.solution.metrics.grid_profit - *oracle));
      ++compared;
    } catch (const AllLevelsInfeasible&) {
      disagreements += oracle.has_value();
    }
  }
  const double t = Seconds(start);
  return Check(disagreements == 0 && worst <= 1e-6 && t < 120.0,
               Fmt("%g instances compared, %g feasibility disagreements, max objective gap "
                   "%.2e (tol 1e-6), %.2f s (limit 120 s)",
                   compared, disagreements, worst, t));
}

// 6. Equilibrium existence and structure on the bundled 9-bus scenario.
Outcome EquilibriumStructure() {
  NineBus& nine = Bundled();
  const auto start = Clock::now();
  const EquilibriumResult eq = SolveEquilibrium(nine.es, nine.grid, nine.rho, {}, 1);
  const double t = Seconds(start) + nine.sweep_es_seconds;
  const SweepResult& sw = nine.sweep_es;
  const bool argmax = sw.best.has_value() && eq.level == *sw.best;
  const double gp0 = sw.records[0].metrics.grid_profit;
  const bool upper = sw.upper_price.has_value() &&
                     sw.records[*sw.upper_price].metrics.distance_volume <= 1e-6;
  const double gp_star = eq.solution.metrics.grid_profit;
  return Check(argmax && sw.records[0].feasible && gp0 <= 0.0 && upper && gp_star >= 0.0 &&
                   t < 300.0,
               "gamma* = " + FormatNumber(eq.gamma) +
                   (argmax ? " (sweep argmax)" : " (differs from sweep argmax)") +
                   ", grid profit at 0 = " + FormatNumber(gp0) + ", gamma_U = " +
                   (upper ? FormatNumber(sw.records[*sw.upper_price].gamma) : "none") +
                   ", grid profit at gamma* = " + FormatNumber(gp_star) +
                   Fmt(", %.1f s for sweep + equilibrium (limit 300 s)", t));
}

// 7. Monotone volume and convex, non-increasing prosumer value.
Outcome Monotonicity() {
  NineBus& nine = Bundled();
  double z_rise = 0.0, v_rise = 0.0, convexity = 0.0;
  for (const SweepResult* sw : {&nine.sweep_es, &nine.sweep_noes}) {
    const auto& r = sw->records;
    double last_z = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (r[k].feasible) {
        z_rise = std::max(z_rise, r[k].metrics.distance_volume - last_z);
        last_z = r[k].metrics.distance_volume;
      }
      if (k > 0) v_rise = std::max(v_rise, r[k].lower_value - r[k - 1].lower_value);
      for (std::size_t j = 1; j <= k && k + j < r.size(); ++j) {
        convexity = std::max(convexity, r[k].lower_value -
                                            0.5 * (r[k - j].lower_value + r[k + j].lower_value));
      }
    }
  }
  return Check(z_rise <= 1e-6 && v_rise <= 1e-6 && convexity <= 1e-6,
               Fmt("largest increase of Z %.2e, of V %.2e, midpoint convexity violation %.2e "
                   "(tol 1e-6) over both 9-bus sweeps",
                   z_rise, v_rise, convexity));
}

// 8. Storage makes trading more price sensitive.
Outcome StorageSensitivity() {
  NineBus& nine = Bundled();
  const SweepResult& a = nine.sweep_es;
  const SweepResult& b = nine.sweep_noes;
  const bool both = a.upper_price.has_value() && b.upper_price.has_value();
  const bool upper_ok = both && a.records[*a.upper_price].gamma <= b.records[*b.upper_price].gamma;
  double excess = 0.0;
  std::size_t worst_level = 0;
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    if (!a.records[k].feasible || !b.records[k].feasible) continue;
    const double d = a.records[k].metrics.distance_volume - b.records[k].metrics.distance_volume;
    if (d > excess) {
      excess = d;
      worst_level = k;
    }
  }
  const bool z_ok = excess <= 1e-6;
  std::string detail = "gamma_U with ES " +
                       (a.upper_price ? FormatNumber(a.records[*a.upper_price].gamma) : "none") +
                       ", without " +
                       (b.upper_price ? FormatNumber(b.records[*b.upper_price].gamma) : "none") +
                       ", largest Z(ES) - Z(no ES) " + FormatNumber(excess);
  if (!z_ok) detail += " at gamma " + FormatNumber(a.records[worst_level].gamma);
  return Check(upper_ok && z_ok, detail + " (tol 1e-6)");
}

struct Comparison {
  std::string scenario;
  std::vector<ConfigResult> rows;
};

std::vector<Comparison>& Comparisons() {
  static std::vector<Comparison>* all = [] {
    auto* out = new std::vector<Comparison>;
    NineBus& nine = Bundled();
    const Scenario tri = LoadScenario(DataFile("triangle.json"));
    struct Case {
      std::string name;
      const Scenario* s;
      PriceGrid grid;
      double rho;
    };
    const Case cases[] = {{"triangle", &tri, PriceGrid(0.0, 1.0, 51), tri.market.rho},
                          {"ieee9_seed42", &nine.es, nine.grid, nine.rho}};
    for (const Case& c : cases) {
      Comparison cmp{c.name, {}};
      for (bool storage : {false, true}) {
        for (MarketKind kind : {MarketKind::kNoP2P, MarketKind::kFreeP2P, MarketKind::kSocialP2P,
                                MarketKind::kOptimalP2P}) {
          cmp.rows.push_back(EvaluateConfig(*c.s, {kind, storage}, c.grid, c.rho, {}));
        }
      }
      out->push_back(std::move(cmp));
    }
    return out;
  }();
  return *all;
}

// 9. Welfare ordering and the optimal-vs-social gap.
Outcome WelfareDominance() {
  bool ordered = true;
  std::string detail;
  double nine_gap = 0.0;
  for (const Comparison& c : Comparisons()) {
    for (std::size_t block = 0; block < 2; ++block) {
      const ConfigResult& none = c.rows[block * 4 + 0];
      const ConfigResult& social = c.rows[block * 4 + 2];
      const ConfigResult& optimal = c.rows[block * 4 + 3];
      if (!none.feasible || !social.feasible || !optimal.feasible) {
        ordered = false;
        continue;
      }
      const double s = social.metrics.social_profit;
      const double o = optimal.metrics.social_profit;
      const double n = none.metrics.social_profit;
      ordered = ordered && s >= o - 1e-6 && o >= n - 1e-6;
      const double gap = (s - o) / std::abs(s);
      if (c.scenario == "ieee9_seed42") nine_gap = std::max(nine_gap, gap);
      detail += c.scenario + (block == 0 ? " no ES" : " ES") + Fmt(" gap %.2f%%; ", 100.0 * gap);
    }
  }
  return Check(ordered && nine_gap <= 0.15,
               detail + (ordered ? "social >= optimal >= no P2P everywhere"
                                 : "welfare ordering violated") +
                   ", 9-bus gap bound 15%");
}

// 10. Network charges are internal transfers.
Outcome TransferIdentity() {
  double worst = 0.0;
  std::size_t count = 0;
  auto check = [&](const MarketMetrics& m) {
    worst = std::max(worst, std::abs(m.grid_profit + m.prosumer_profit -
                                     (m.total_utility - m.transmission_loss)));
    ++count;
  };
  for (const Comparison& c : Comparisons()) {
    for (const ConfigResult& r : c.rows) {
      if (r.feasible && r.config.kind != MarketKind::kSocialP2P) check(r.metrics);
    }
  }
  NineBus& nine = Bundled();
  for (const SweepResult* sw : {&nine.sweep_es, &nine.sweep_noes}) {
    for (const LevelRecord& r : sw->records) {
      if (r.feasible) check(r.metrics);
    }
  }
  // The centralized benchmark has no charge: prosumer profit is total utility.
  for (const Comparison& c : Comparisons()) {
    for (const ConfigResult& r : c.rows) {
      if (r.feasible && r.config.kind == MarketKind::kSocialP2P) {
        worst = std::max(worst, std::abs(r.metrics.grid_profit + r.metrics.prosumer_profit -
                                         r.metrics.social_profit));
        ++count;
      }
    }
  }
  return Check(worst <= 1e-6, Fmt("%g evaluated configurations, max |grid + prosumer - "
                                  "(utility - loss)| = %.2e (tol 1e-6)",
                                  static_cast<double>(count), worst));
}

// 11. Parallel sweeps reproduce serial output byte for byte.
Outcome Determinism() {
  NineBus& nine = Bundled();
  const SweepResult parallel = SweepPrices(nine.es, nine.grid, nine.rho, {}, 4);
  const bool csv = SweepCsv(parallel) == SweepCsv(nine.sweep_es);
  const bool json = SweepJson(parallel) == SweepJson(nine.sweep_es);
  return Check(csv && json, std::string("4-worker vs serial sweep: CSV ") +
                                (csv ? "identical" : "differs") + ", JSON " +
                                (json ? "identical" : "differs"));
}

int Main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "PTDF/distance oracle", NetworkOracle},
      {2, "five-bus distance anchor", FiveBusAnchor},
      {3, "LP/QP correctness", SolverCorrectness},
      {4, "KKT and strong-duality certification", KktCertification},
      {5, "reformulation equivalence", ReformulationEquivalence},
      {6, "equilibrium existence and structure", EquilibriumStructure},
      {7, "monotonicity of volume and prosumer value", Monotonicity},
      {8, "storage sensitivity", StorageSensitivity},
      {9, "social-welfare dominance and gap", WelfareDominance},
      {10, "transfer identity", TransferIdentity},
      {11, "determinism of parallel sweeps", Determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Outcome::kFail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.kind == Outcome::kPass ? "PASS" : (o.kind == Outcome::kSkip ? "SKIP" : "FAIL");
    failures += o.kind == Outcome::kFail;
    std::printf("[%s] criterion %d: %s: %s\n", tag, c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace gridcharge

int main() { return gridcharge::Main(); }
