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

// Small scenario builders and the explicit-binary reference solver for the
// discretized bilevel problem, shared by the unit and acceptance tests.

#ifndef GRIDCHARGE_TESTS_FIXTURES_H_
#define GRIDCHARGE_TESTS_FIXTURES_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gridcharge/bilevel.h"
#include "gridcharge/kkt.h"
#include "gridcharge/market.h"
#include "gridcharge/network.h"
#include "gridcharge/quadratic_program.h"
#include "gridcharge/scenario.h"

namespace gridcharge::testing {

inline double Uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t Pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Random connected network: a random spanning tree plus extra lines.
inline std::vector<LineSpec> RandomLines(std::mt19937_64& rng, std::size_t buses,
                                         std::size_t extra, double limit) {
  std::vector<LineSpec> lines;
  for (std::size_t b = 1; b < buses; ++b) {
    lines.push_back({Pick(rng, 0, b - 1), b, Uniform(rng, 0.2, 2.0), limit});
  }
  for (std::size_t k = 0; k < extra && buses > 1; ++k) {
    const std::size_t i = Pick(rng, 0, buses - 1);
    std::size_t j = Pick(rng, 0, buses - 2);
    if (j >= i) ++j;
    lines.push_back({i, j, Uniform(rng, 0.2, 2.0), limit});
  }
  return lines;
}

inline PwlUtility RandomUtility(std::mt19937_64& rng, double top) {
  const std::size_t k = Pick(rng, 2, 3);
  std::vector<double> slopes(k);
  for (double& s : slopes) s = Uniform(rng, 0.0, 1.0);
  std::sort(slopes.begin(), slopes.end(), std::greater<>());
  std::vector<double> bp(k + 1);
  for (std::size_t i = 0; i <= k; ++i) bp[i] = top * static_cast<double>(i) / static_cast<double>(k);
  return PwlUtility(0.0, bp, slopes);
}

// Assembles a scenario from parts, with derived network data.
inline Scenario MakeScenario(std::size_t buses, std::vector<LineSpec> lines,
                             ProsumerFleet fleet, TradeGraph trades) {
  Scenario s;
  s.name = "fixture";
  s.num_buses = buses;
  s.reference_bus = buses - 1;
  s.lines = std::move(lines);
  s.network = std::make_shared<const BusNetwork>(buses, s.lines, s.reference_bus);
  s.fleet = std::move(fleet);
  s.trades = std::move(trades);
  s.all_pairs = false;
  return s;
}

struct RandomScenarioOptions {
  std::size_t max_buses = 4;
  std::size_t max_prosumers = 3;
  std::size_t max_periods = 3;
  bool storage = true;
  // Line limits are drawn from this range; small values make some price
  // levels network-infeasible.
  double limit_min = 2.0;
  double limit_max = 30.0;
};

inline Scenario RandomScenario(std::mt19937_64& rng, const RandomScenarioOptions& o = {}) {
  const std::size_t buses = Pick(rng, 2, o.max_buses);
  const std::size_t n = Pick(rng, 2, o.max_prosumers);
  const std::size_t horizon = Pick(rng, 1, o.max_periods);
  auto lines = RandomLines(rng, buses, Pick(rng, 0, 2), 0.0);
  for (LineSpec& l : lines) l.flow_limit = Uniform(rng, o.limit_min, o.limit_max);
  ProsumerFleet fleet;
  fleet.horizon = horizon;
  for (std::size_t i = 0; i < n; ++i) {
    Prosumer p;
    p.id = "P" + std::to_string(i + 1);
    p.bus = Pick(rng, 0, buses - 1);
    for (std::size_t t = 0; t < horizon; ++t) {
      PeriodData d;
      d.renewable = Uniform(rng, 0.0, 30.0);
      d.utility = RandomUtility(rng, Uniform(rng, 5.0, 30.0));
      p.periods.push_back(d);
    }
    if (o.storage && rng() % 2 == 0) {
      const double cap = Uniform(rng, 5.0, 20.0);
      p.battery = {0.0, cap, Uniform(rng, 2.0, 10.0), Uniform(rng, 2.0, 10.0), 0.9,
                   Uniform(rng, 0.0, cap)};
    }
    fleet.prosumers.push_back(p);
  }
  return MakeScenario(buses, lines, fleet, TradeGraph::AllPairs(n, Uniform(rng, 5.0, 20.0)));
}

// The discretized single-level problem with explicit level binaries: for a
// fixed binary vector x (one level selected), maximize
//   sum_k gamma_k Y_k - rho * sum_t sum_l f_l^2 / b_l
// over prosumer primal variables, dual variables of the prosumer LP at the
// selected price (stationarity and sign constraints), the strong-duality
// equation with the price-times-volume product replaced by sum_k gamma_k Y_k,
// the big-M product constraints
//   0 <= Y_k <= M x_k,  Z - M (1 - x_k) <= Y_k <= Z,
// and the DC network (flows from shift factors, line limits, optional
// injection bounds). Enumerates every feasible binary vector and returns the
// best objective, or nullopt when all are infeasible.
inline std::optional<double> BruteForceEquilibrium(const Scenario& s, const PriceGrid& grid,
                                                   double rho, double* best_gamma = nullptr) {
  const BusNetwork& net = s.grid();
  const std::size_t levels = grid.levels();
  const double big_m = BigMBound(s.fleet, s.trades, net.distances());
  std::optional<double> best;
  for (std::size_t sel = 0; sel < levels; ++sel) {
    const double gamma = grid.level(sel);
    const LowerLevelProgram program = BuildLowerLp(s.fleet, s.trades, net.distances(), gamma);
    const LinearProgram& lower = program.lp();
    const KktSystem kkt = AssembleKkt(program);
    const std::size_t n = lower.num_variables();

    QuadraticProgram qp;
    LinearProgram& lp = qp.linear();
    // Prosumer primal block.
    for (std::size_t j = 0; j < n; ++j) lp.AddVariable(lower.lower()[j], lower.upper()[j], 0.0);
    for (std::size_t i = 0; i < lower.num_rows(); ++i) {
      lp.AddRow(lower.senses()[i], lower.rhs()[i]);
    }
    for (const Triplet& t : lower.coefficients()) lp.AddCoefficient(t.row, t.col, t.value);
    // Dual block.
    const std::size_t dual0 = lp.num_variables();
    const double inf = std::numeric_limits<double>::infinity();
    for (const DualVariable& d : kkt.duals) {
      const bool free_row = d.kind == DualVariable::Kind::kRow &&
                            lower.senses()[d.index] == RowSense::kEqual;
      const bool ge_row = d.kind == DualVariable::Kind::kRow &&
                          lower.senses()[d.index] == RowSense::kGreaterEqual;
      if (free_row) {
        lp.AddVariable(-inf, inf, 0.0);
      } else if (ge_row) {
        lp.AddVariable(-inf, 0.0, 0.0);
      } else {
        lp.AddVariable(0.0, inf, 0.0);
      }
    }
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t row = lp.AddRow(RowSense::kEqual, -kkt.constants[j]);
      for (const auto& [pos, coef] : kkt.stationarity[j]) lp.AddCoefficient(row, dual0 + pos, coef);
    }
    // Level products Y_k.
    const std::size_t y0 = lp.num_variables();
    for (std::size_t k = 0; k < levels; ++k) lp.AddVariable(0.0, inf, grid.level(k));
    Vector z_coef(n, 0.0);
    for (std::size_t t = 0; t < program.horizon(); ++t) {
      for (std::size_t p = 0; p < s.trades.pairs.size(); ++p) {
        z_coef[program.trade_col(t, p)] = program.pair_distances()[p];
      }
    }
    for (std::size_t k = 0; k < levels; ++k) {
      const double xk = k == sel ? 1.0 : 0.0;
      const std::size_t cap = lp.AddRow(RowSense::kLessEqual, big_m * xk);
      lp.AddCoefficient(cap, y0 + k, 1.0);
      const std::size_t upper = lp.AddRow(RowSense::kLessEqual, 0.0);  // Y - Z <= 0
      lp.AddCoefficient(upper, y0 + k, 1.0);
      const std::size_t lower_row = lp.AddRow(RowSense::kGreaterEqual, -big_m * (1.0 - xk));
      lp.AddCoefficient(lower_row, y0 + k, 1.0);  // Y - Z >= -M (1 - x)
      for (std::size_t j = 0; j < n; ++j) {
        if (z_coef[j] != 0.0) {
          lp.AddCoefficient(upper, j, -z_coef[j]);
          lp.AddCoefficient(lower_row, j, -z_coef[j]);
        }
      }
    }
    // Strong duality: sum u - sum_k gamma_k Y_k = dual objective, where the
    // dual objective is affine in the duals.
    {
      const Vector coef = StrongDualityCoefficients(kkt);
      const Vector zero_primal(n, 0.0), zero_dual(kkt.num_duals(), 0.0);
      const double constant = StrongDualityResidual(kkt, zero_primal, zero_dual);
      const std::size_t row = lp.AddRow(RowSense::kEqual, -constant);
      for (std::size_t j = 0; j < n; ++j) {
        if (z_coef[j] == 0.0 && lower.objective()[j] != 0.0) {
          lp.AddCoefficient(row, j, lower.objective()[j]);
        }
      }
      for (std::size_t k = 0; k < levels; ++k) lp.AddCoefficient(row, y0 + k, -grid.level(k));
      for (std::size_t d = 0; d < kkt.num_duals(); ++d) {
        if (coef[d] != 0.0) lp.AddCoefficient(row, dual0 + d, coef[d]);
      }
    }
    // Network: injections per bus and period, flows through shift factors.
    for (std::size_t t = 0; t < program.horizon(); ++t) {
      std::vector<std::size_t> inj(net.num_buses());
      for (std::size_t b = 0; b < net.num_buses(); ++b) {
        const double lo = s.injection_min.empty() ? -inf : s.injection_min[b];
        const double hi = s.injection_max.empty() ? inf : s.injection_max[b];
        inj[b] = lp.AddVariable(lo, hi, 0.0);
        const std::size_t row = lp.AddRow(RowSense::kEqual, 0.0);
        lp.AddCoefficient(row, inj[b], 1.0);
        for (std::size_t p = 0; p < s.trades.pairs.size(); ++p) {
          const TradePair& tp = s.trades.pairs[p];
          if (s.fleet.prosumers[tp.seller].bus == b) {
            lp.AddCoefficient(row, program.trade_col(t, p), -1.0);
          }
          if (s.fleet.prosumers[tp.buyer].bus == b) {
            lp.AddCoefficient(row, program.trade_col(t, p), 1.0);
          }
        }
      }
      for (std::size_t l = 0; l < net.num_lines(); ++l) {
        const double limit = net.lines()[l].flow_limit;
        const std::size_t f = lp.AddVariable(-limit, limit, 0.0);
        const std::size_t row = lp.AddRow(RowSense::kEqual, 0.0);
        lp.AddCoefficient(row, f, 1.0);
        for (std::size_t b = 0; b < net.num_buses(); ++b) {
          lp.AddCoefficient(row, inj[b], -net.shift_factors()(l, b));
        }
        if (rho != 0.0) qp.AddQuadratic(f, f, -2.0 * rho / net.susceptance(l));
      }
    }
    const QpSolution sol = SolveQp(qp);
    if (sol.status != SolveStatus::kOptimal) continue;
    if (!best || sol.objective > *best + 1e-9 * (1.0 + std::abs(*best))) {
      best = sol.objective;
      if (best_gamma != nullptr) *best_gamma = gamma;
    }
  }
  return best;
}

}  // namespace gridcharge::testing

#endif  // GRIDCHARGE_TESTS_FIXTURES_H_
