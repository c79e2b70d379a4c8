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

#include "gridcharge/bilevel.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <utility>

#include "gridcharge/backend.h"
#include "gridcharge/errors.h"

namespace gridcharge {

PriceGrid::PriceGrid(double gamma_min, double gamma_max, std::size_t levels)
    : gamma_min_(gamma_min), gamma_max_(gamma_max), levels_(levels) {
  if (!(gamma_min >= 0.0) || !std::isfinite(gamma_max) || !(gamma_max >= gamma_min)) {
    throw InputError("price range must satisfy 0 <= gamma_min <= gamma_max");
  }
  if (levels == 0) throw InputError("price grid needs at least one level");
  if ((levels == 1) != (gamma_min == gamma_max)) {
    throw InputError("a single price level requires gamma_min == gamma_max and vice versa");
  }
}

PriceGrid PriceGrid::FromStep(double gamma_min, double gamma_max, double step) {
  if (!(step > 0.0)) throw InputError("price step must be positive");
  const double count = (gamma_max - gamma_min) / step;
  const double rounded = std::round(count);
  if (!(rounded >= 0.0) || std::abs(count - rounded) > 1e-9 * std::max(1.0, count)) {
    throw InputError("price step does not divide the price range");
  }
  return PriceGrid(gamma_min, gamma_max, static_cast<std::size_t>(rounded) + 1);
}

double PriceGrid::step() const {
  return levels_ == 1 ? 0.0 : (gamma_max_ - gamma_min_) / static_cast<double>(levels_ - 1);
}

double PriceGrid::level(std::size_t k) const {
  if (k + 1 == levels_) return gamma_max_;
  return gamma_min_ + static_cast<double>(k) * step();
}

double BigMBound(const ProsumerFleet& fleet, const TradeGraph& trades,
                 const DenseMatrix& bus_distances) {
  double total = 0.0;
  for (const TradePair& p : trades.pairs) {
    if (!std::isfinite(p.cap)) throw InfiniteCap("trade cap is unbounded");
    const std::size_t bi = fleet.prosumers[p.buyer].bus;
    const std::size_t bj = fleet.prosumers[p.seller].bus;
    total += bus_distances(bi, bj) * p.cap;
  }
  return 1.01 * total * static_cast<double>(fleet.horizon);
}

namespace {

// Appends injection and flow variables for every period, linking them to the
// trade columns, and the loss term -rho * f^2 / b to the objective.
void AddNetwork(QuadraticProgram& qp, const Scenario& scenario,
                const LowerLevelProgram& program, double rho) {
  const BusNetwork& net = scenario.grid();
  LinearProgram& lp = qp.linear();
  const std::size_t nb = net.num_buses();
  const std::size_t nl = net.num_lines();
  const auto& pairs = scenario.trades.pairs;
  const auto& prosumers = scenario.fleet.prosumers;
  for (std::size_t t = 0; t < program.horizon(); ++t) {
    std::vector<std::size_t> injection(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      const double lo = scenario.injection_min.empty() ? -kInfinity : scenario.injection_min[b];
      const double hi = scenario.injection_max.empty() ? kInfinity : scenario.injection_max[b];
      injection[b] = lp.AddVariable(lo, hi, 0.0);
      const std::size_t row = lp.AddRow(RowSense::kEqual, 0.0);
      lp.AddCoefficient(row, injection[b], 1.0);
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        const std::size_t col = program.trade_col(t, p);
        if (prosumers[pairs[p].seller].bus == b) lp.AddCoefficient(row, col, -1.0);
        if (prosumers[pairs[p].buyer].bus == b) lp.AddCoefficient(row, col, 1.0);
      }
    }
    for (std::size_t l = 0; l < nl; ++l) {
      const double limit = net.lines()[l].flow_limit;
      const std::size_t f = lp.AddVariable(-limit, limit, 0.0);
      const std::size_t row = lp.AddRow(RowSense::kEqual, 0.0);
      lp.AddCoefficient(row, f, 1.0);
      for (std::size_t b = 0; b < nb; ++b) {
        const double s = net.shift_factors()(l, b);
        if (s != 0.0) lp.AddCoefficient(row, injection[b], -s);
      }
      if (rho != 0.0) qp.AddQuadratic(f, f, -2.0 * rho / net.susceptance(l));
    }
  }
}

// With a zero price, trades along cycles change neither the prosumers'
// objective nor any net injection, so the solvers may return arbitrary
// circulating volume. Replace the trades of each period by the
// distance-minimal schedule with the same net positions. Objective, flows and
// loss are unchanged and the duals stay optimal.
void RemoveCirculation(const LowerLevelProgram& program, const SolverBackend& backend,
                       const SolverOptions& opts, Vector& x) {
  const std::vector<TradePair>& pairs = program.trades().pairs;
  if (pairs.empty()) return;
  const std::size_t n = program.fleet().size();
  for (std::size_t t = 0; t < program.horizon(); ++t) {
    Vector net(n, 0.0);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const double v = x[program.trade_col(t, p)];
      net[pairs[p].seller] += v;
      net[pairs[p].buyer] -= v;
    }
    LinearProgram lp;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      lp.AddVariable(0.0, pairs[p].cap, -program.pair_distances()[p]);
    }
    for (std::size_t i = 0; i < n; ++i) lp.AddRow(RowSense::kEqual, net[i]);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      lp.AddCoefficient(pairs[p].seller, p, 1.0);
      lp.AddCoefficient(pairs[p].buyer, p, -1.0);
    }
    const LpSolution sol = backend.Solve(lp, opts);
    // The current schedule is feasible, so anything but optimal is a solver
    // failure; keep the original trades in that case.
    if (sol.status != SolveStatus::kOptimal) continue;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      x[program.trade_col(t, p)] = std::clamp(sol.primal[p], 0.0, pairs[p].cap);
    }
  }
}

void FinishLevel(const Scenario& scenario, const LowerLevelProgram& program, double rho,
                 const SolverOptions& opts, const QpSolution& q, Vector duals,
                 Vector reduced_costs, LevelSolution& out) {
  if (q.status != SolveStatus::kOptimal) {
    out.feasible = false;
    return;
  }
  const std::size_t n = program.lp().num_variables();
  Vector x(q.primal.begin(), q.primal.begin() + static_cast<std::ptrdiff_t>(n));
  if (program.gamma() == 0.0) RemoveCirculation(program, GetBackend(opts.backend), opts, x);
  out.response = MakeMarketResponse(program, scenario.grid().num_buses(), std::move(x),
                                    std::move(duals), std::move(reduced_costs));
  out.flow = scenario.grid().SolveDcFlow(out.response.injections);
  out.metrics = ComputeMarketMetrics(out.response, scenario.grid(), rho);
  out.feasible = true;
}

}  // namespace

LevelSolution SolveLevel(const Scenario& scenario, double gamma, double rho,
                         const SolverOptions& opts) {
  const BusNetwork& net = scenario.grid();
  const SolverBackend& backend = GetBackend(opts.backend);
  const LowerLevelProgram program =
      BuildLowerLp(scenario.fleet, scenario.trades, net.distances(), gamma);
  const LinearProgram& lower = program.lp();
  LpSolution lp_sol = backend.Solve(lower, opts);
  if (lp_sol.status != SolveStatus::kOptimal) {
    throw NumericalBreakdown("prosumer problem reported " + ToString(lp_sol.status) +
                             " at gamma " + std::to_string(gamma));
  }
  LevelSolution out;
  out.lower_value = lp_sol.objective;
  out.lp_duals = lp_sol.duals;
  out.lp_reduced_costs = lp_sol.reduced_costs;

  // Restrict to the optimal face: complementary slackness with the optimal
  // duals fixes columns with nonzero reduced cost and tightens rows with
  // nonzero multipliers.
  QuadraticProgram qp;
  LinearProgram& face = qp.linear();
  face = lower;
  const double tol = 1e-9 * std::max(1.0, InfinityNorm(lower.objective()));
  for (std::size_t j = 0; j < lower.num_variables(); ++j) {
    const double d = lp_sol.reduced_costs[j];
    if (d > tol && std::isfinite(lower.upper()[j])) {
      face.SetBounds(j, lower.upper()[j], lower.upper()[j]);
    } else if (d < -tol && std::isfinite(lower.lower()[j])) {
      face.SetBounds(j, lower.lower()[j], lower.lower()[j]);
    }
    face.SetObjective(j, 0.0);
  }
  for (std::size_t i = 0; i < lower.num_rows(); ++i) {
    if (lower.senses()[i] != RowSense::kEqual && std::abs(lp_sol.duals[i]) > tol) {
      face.SetRow(i, RowSense::kEqual, lower.rhs()[i]);
    }
  }
  for (std::size_t t = 0; t < program.horizon(); ++t) {
    for (std::size_t p = 0; p < scenario.trades.pairs.size(); ++p) {
      face.SetObjective(program.trade_col(t, p), gamma * program.pair_distances()[p]);
    }
  }
  AddNetwork(qp, scenario, program, rho);
  const QpSolution q = backend.Solve(qp, opts);
  if (q.status == SolveStatus::kOptimal) {
    const double value = lower.Evaluate(q.primal);
    if (value < out.lower_value - 1e-6 * (1.0 + std::abs(out.lower_value))) {
      throw NumericalBreakdown("tie-break left the prosumer optimal set at gamma " +
                               std::to_string(gamma));
    }
  }
  FinishLevel(scenario, program, rho, opts, q, std::move(lp_sol.duals),
              std::move(lp_sol.reduced_costs), out);
  return out;
}

std::optional<std::size_t> SelectBestLevel(const std::vector<LevelRecord>& records) {
  std::optional<double> best;
  for (const LevelRecord& r : records) {
    if (r.feasible && (!best || r.metrics.grid_profit > *best)) best = r.metrics.grid_profit;
  }
  if (!best) return std::nullopt;
  const double tol = 1e-9 * (1.0 + std::abs(*best));
  for (std::size_t k = 0; k < records.size(); ++k) {
    if (records[k].feasible && records[k].metrics.grid_profit >= *best - tol) return k;
  }
  return std::nullopt;
}

SweepResult SweepPrices(const Scenario& scenario, const PriceGrid& grid, double rho,
                        const SolverOptions& opts, std::size_t threads) {
  SweepResult result;
  result.grid = grid;
  const std::size_t levels = grid.levels();
  result.records.resize(levels);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= levels) return;
      LevelRecord& rec = result.records[k];
      rec.level = k;
      rec.gamma = grid.level(k);
      try {
        const LevelSolution sol = SolveLevel(scenario, rec.gamma, rho, opts);
        rec.feasible = sol.feasible;
        rec.lower_value = sol.lower_value;
        rec.metrics = sol.metrics;
        rec.metrics.gamma = rec.gamma;
      } catch (const NumericalError& e) {
        rec.feasible = false;
        rec.error = e.what();
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(levels);
        return;
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, levels);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  result.best = SelectBestLevel(result.records);
  for (std::size_t k = 0; k < levels; ++k) {
    const LevelRecord& r = result.records[k];
    if (!r.feasible) continue;
    if (!result.lower_price && r.metrics.grid_profit >= -1e-9) result.lower_price = k;
    if (!result.upper_price && r.metrics.distance_volume <= 1e-6) result.upper_price = k;
  }
  return result;
}

EquilibriumResult SolveEquilibrium(const Scenario& scenario, const PriceGrid& grid, double rho,
                                   const SolverOptions& opts, std::size_t threads) {
  EquilibriumResult result;
  result.sweep = SweepPrices(scenario, grid, rho, opts, threads);
  for (const LevelRecord& r : result.sweep.records) {
    if (!r.error.empty()) {
      throw NumericalBreakdown("price level " + std::to_string(r.gamma) + ": " + r.error);
    }
  }
  if (!result.sweep.best) {
    throw AllLevelsInfeasible("no price level admits a network-feasible prosumer response");
  }
  result.level = *result.sweep.best;
  result.gamma = grid.level(result.level);
  result.solution = SolveLevel(scenario, result.gamma, rho, opts);
  result.solution.metrics.gamma = result.gamma;
  result.big_m = BigMBound(scenario.fleet, scenario.trades, scenario.grid().distances());
  return result;
}

LevelSolution SocialOptimum(const Scenario& scenario, double rho, const SolverOptions& opts) {
  const LowerLevelProgram program =
      BuildLowerLp(scenario.fleet, scenario.trades, scenario.grid().distances(), 0.0);
  QuadraticProgram qp;
  qp.linear() = program.lp();
  AddNetwork(qp, scenario, program, rho);
  const QpSolution q = GetBackend(opts.backend).Solve(qp, opts);
  LevelSolution out;
  if (q.status == SolveStatus::kOptimal) out.lower_value = program.lp().Evaluate(q.primal);
  const std::size_t m = program.lp().num_rows();
  const std::size_t n = program.lp().num_variables();
  Vector duals, reduced;
  if (q.status == SolveStatus::kOptimal) {
    duals.assign(q.duals.begin(), q.duals.begin() + static_cast<std::ptrdiff_t>(m));
    reduced.assign(q.reduced_costs.begin(), q.reduced_costs.begin() + static_cast<std::ptrdiff_t>(n));
  }
  FinishLevel(scenario, program, rho, opts, q, duals, reduced, out);
  out.lp_duals = std::move(duals);
  out.lp_reduced_costs = std::move(reduced);
  return out;
}

std::string MarketConfig::name() const {
  std::string base;
  switch (kind) {
    case MarketKind::kNoP2P:
      base = "No P2P";
      break;
    case MarketKind::kFreeP2P:
      base = "Free P2P";
      break;
    case MarketKind::kSocialP2P:
      base = "Social P2P";
      break;
    case MarketKind::kOptimalP2P:
      base = "Optimal P2P";
      break;
  }
  return base + (storage ? " (ES)" : " (No ES)");
}

ConfigResult EvaluateConfig(const Scenario& scenario, const MarketConfig& config,
                            const PriceGrid& grid, double rho, const SolverOptions& opts,
                            std::size_t threads) {
  const Scenario base = config.storage ? scenario : WithoutStorage(scenario);
  ConfigResult out;
  out.config = config;
  LevelSolution sol;
  switch (config.kind) {
    case MarketKind::kNoP2P: {
      const Scenario isolated = WithoutTrading(base);
      sol = SolveLevel(isolated, 0.0, rho, opts);
      out.gamma = 0.0;
      break;
    }
    case MarketKind::kFreeP2P:
      sol = SolveLevel(base, kFreeTradePrice, rho, opts);
      out.gamma = kFreeTradePrice;
      break;
    case MarketKind::kSocialP2P:
      sol = SocialOptimum(base, rho, opts);
      break;
    case MarketKind::kOptimalP2P:
      try {
        EquilibriumResult eq = SolveEquilibrium(base, grid, rho, opts, threads);
        sol = std::move(eq.solution);
        out.gamma = eq.gamma;
      } catch (const AllLevelsInfeasible&) {
        sol.feasible = false;
      }
      break;
  }
  out.feasible = sol.feasible;
  out.metrics = sol.metrics;
  return out;
}

}  // namespace gridcharge
