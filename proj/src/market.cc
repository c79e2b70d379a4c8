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

#include "gridcharge/market.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "gridcharge/backend.h"
#include "gridcharge/errors.h"

namespace gridcharge {

void ProsumerFleet::Validate(std::size_t num_buses) const {
  if (!(period_hours > 0.0)) throw InputError("period length must be positive");
  for (std::size_t i = 0; i < prosumers.size(); ++i) {
    const Prosumer& p = prosumers[i];
    const std::string who = "prosumer " + std::to_string(i);
    if (p.bus >= num_buses) throw InputError(who + " is attached to an unknown bus");
    if (p.periods.size() != horizon) throw InputError(who + " does not cover the horizon");
    for (const PeriodData& d : p.periods) {
      if (!std::isfinite(d.renewable)) throw InputError(who + " has a non-finite renewable value");
    }
    const Battery& b = p.battery;
    if (!(b.energy_min >= 0.0) || !(b.energy_max >= b.energy_min) || !(b.charge_max >= 0.0) ||
        !(b.discharge_max >= 0.0) || !std::isfinite(b.energy_max) ||
        !std::isfinite(b.charge_max) || !std::isfinite(b.discharge_max)) {
      throw InputError(who + " has invalid battery capacities");
    }
    if (!(b.efficiency > 0.0 && b.efficiency < 1.0)) {
      throw InputError(who + " battery efficiency must lie in (0, 1)");
    }
    if (!(b.initial_energy >= b.energy_min && b.initial_energy <= b.energy_max)) {
      throw InputError(who + " initial energy outside the battery range");
    }
  }
}

TradeGraph TradeGraph::AllPairs(std::size_t prosumers, double cap) {
  TradeGraph g;
  for (std::size_t i = 0; i < prosumers; ++i) {
    for (std::size_t j = 0; j < prosumers; ++j) {
      if (i != j) g.pairs.push_back({i, j, cap});
    }
  }
  return g;
}

void TradeGraph::Validate(std::size_t prosumers) const {
  std::map<std::pair<std::size_t, std::size_t>, double> caps;
  for (const TradePair& p : pairs) {
    if (p.buyer >= prosumers || p.seller >= prosumers) {
      throw InputError("trade pair references an unknown prosumer");
    }
    if (p.buyer == p.seller) throw InputError("trade pair with identical buyer and seller");
    if (!(p.cap >= 0.0)) throw InputError("trade cap must be nonnegative");
    if (!caps.emplace(std::make_pair(p.buyer, p.seller), p.cap).second) {
      throw InputError("duplicate trade pair");
    }
  }
  for (const auto& [key, cap] : caps) {
    const auto it = caps.find({key.second, key.first});
    if (it == caps.end() || it->second != cap) {
      throw InputError("trade pair (" + std::to_string(key.first) + ", " +
                       std::to_string(key.second) + ") lacks a reverse pair with equal cap");
    }
  }
}

void DisableStorage(ProsumerFleet& fleet) {
  for (Prosumer& p : fleet.prosumers) {
    p.battery.energy_min = 0.0;
    p.battery.energy_max = 0.0;
    p.battery.charge_max = 0.0;
    p.battery.discharge_max = 0.0;
    p.battery.initial_energy = 0.0;
  }
}

bool HasStorage(const ProsumerFleet& fleet) {
  for (const Prosumer& p : fleet.prosumers) {
    if (p.battery.energy_max > p.battery.energy_min &&
        (p.battery.charge_max > 0.0 || p.battery.discharge_max > 0.0)) {
      return true;
    }
  }
  return false;
}

std::size_t LowerLevelProgram::trade_col(std::size_t t, std::size_t pair) const {
  return t * period_columns_ + pair;
}

std::size_t LowerLevelProgram::consumption_col(std::size_t t, std::size_t i) const {
  return t * period_columns_ + trades_->pairs.size() + 5 * i;
}

std::size_t LowerLevelProgram::balance_row(std::size_t t, std::size_t i) const {
  return period_row_start_[t] + i;
}

std::size_t LowerLevelProgram::dynamics_row(std::size_t t, std::size_t i) const {
  return period_row_start_[t] + fleet_->size() + i;
}

std::size_t LowerLevelProgram::epigraph_row(std::size_t t, std::size_t i, std::size_t k) const {
  return period_row_start_[t] + 2 * fleet_->size() + epigraph_index_[t][i] + k;
}

LowerLevelProgram BuildLowerLp(const ProsumerFleet& fleet, const TradeGraph& trades,
                               const DenseMatrix& bus_distances, double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw InputError("network charge price must be finite and nonnegative");
  }
  LowerLevelProgram prog;
  prog.fleet_ = &fleet;
  prog.trades_ = &trades;
  prog.gamma_ = gamma;
  const std::size_t n = fleet.size();
  const std::size_t horizon = fleet.horizon;
  const std::size_t np = trades.pairs.size();
  prog.period_columns_ = np + 5 * n;

  prog.purchases_.assign(n, {});
  prog.sales_.assign(n, {});
  prog.pair_distances_.resize(np);
  for (std::size_t p = 0; p < np; ++p) {
    const TradePair& pair = trades.pairs[p];
    const std::size_t bi = fleet.prosumers[pair.buyer].bus;
    const std::size_t bj = fleet.prosumers[pair.seller].bus;
    if (bi >= bus_distances.rows() || bj >= bus_distances.cols()) {
      throw MissingDistance("no distance for trade pair " + std::to_string(p));
    }
    prog.pair_distances_[p] = bus_distances(bi, bj);
    if (!std::isfinite(prog.pair_distances_[p])) {
      throw MissingDistance("non-finite distance for trade pair " + std::to_string(p));
    }
    prog.purchases_[pair.buyer].push_back(p);
    prog.sales_[pair.seller].push_back(p);
  }

  LinearProgram& lp = prog.lp_;
  for (std::size_t t = 0; t < horizon; ++t) {
    for (std::size_t p = 0; p < np; ++p) {
      lp.AddVariable(0.0, trades.pairs[p].cap, -gamma * prog.pair_distances_[p]);
      prog.columns_.push_back({ColumnKind::kTrade, t, p});
    }
    for (std::size_t i = 0; i < n; ++i) {
      const Prosumer& pr = fleet.prosumers[i];
      const PeriodData& d = pr.periods[t];
      const Battery& b = pr.battery;
      lp.AddVariable(d.demand_min(), d.demand_max(), 0.0);
      lp.AddVariable(0.0, b.charge_max, 0.0);
      lp.AddVariable(0.0, b.discharge_max, 0.0);
      lp.AddVariable(b.energy_min, b.energy_max, 0.0);
      lp.AddVariable(-kInfinity, kInfinity, 1.0);
      prog.columns_.push_back({ColumnKind::kConsumption, t, i});
      prog.columns_.push_back({ColumnKind::kCharge, t, i});
      prog.columns_.push_back({ColumnKind::kDischarge, t, i});
      prog.columns_.push_back({ColumnKind::kEnergy, t, i});
      prog.columns_.push_back({ColumnKind::kUtility, t, i});
    }
  }

  prog.epigraph_index_.assign(horizon, std::vector<std::size_t>(n, 0));
  for (std::size_t t = 0; t < horizon; ++t) {
    prog.period_row_start_.push_back(lp.num_rows());
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t row = lp.AddRow(RowSense::kLessEqual, fleet.prosumers[i].periods[t].renewable);
      prog.rows_.push_back({RowKind::kBalance, t, i, 0});
      lp.AddCoefficient(row, prog.consumption_col(t, i), 1.0);
      lp.AddCoefficient(row, prog.discharge_col(t, i), -1.0);
      lp.AddCoefficient(row, prog.charge_col(t, i), 1.0);
      for (std::size_t p : prog.purchases_[i]) lp.AddCoefficient(row, prog.trade_col(t, p), -1.0);
      for (std::size_t p : prog.sales_[i]) lp.AddCoefficient(row, prog.trade_col(t, p), 1.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const Battery& b = fleet.prosumers[i].battery;
      const std::size_t row = lp.AddRow(RowSense::kEqual, t == 0 ? b.initial_energy : 0.0);
      prog.rows_.push_back({RowKind::kDynamics, t, i, 0});
      lp.AddCoefficient(row, prog.energy_col(t, i), 1.0);
      if (t > 0) lp.AddCoefficient(row, prog.energy_col(t - 1, i), -1.0);
      lp.AddCoefficient(row, prog.charge_col(t, i), -b.efficiency);
      lp.AddCoefficient(row, prog.discharge_col(t, i), 1.0 / b.efficiency);
    }
    std::size_t offset = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const PwlUtility& u = fleet.prosumers[i].periods[t].utility;
      prog.epigraph_index_[t][i] = offset;
      for (std::size_t k = 0; k < u.segments(); ++k) {
        const std::size_t row = lp.AddRow(RowSense::kLessEqual, u.intercept(k));
        prog.rows_.push_back({RowKind::kEpigraph, t, i, k});
        lp.AddCoefficient(row, prog.utility_col(t, i), 1.0);
        lp.AddCoefficient(row, prog.consumption_col(t, i), -u.slope(k));
      }
      offset += u.segments();
    }
  }
  return prog;
}

MarketResponse MakeMarketResponse(const LowerLevelProgram& program, std::size_t num_buses,
                                  Vector primal, Vector duals, Vector reduced_costs) {
  const ProsumerFleet& fleet = program.fleet();
  const TradeGraph& trades = program.trades();
  MarketResponse r;
  r.gamma = program.gamma();
  r.injections.assign(program.horizon(), Vector(num_buses, 0.0));
  for (std::size_t t = 0; t < program.horizon(); ++t) {
    for (std::size_t p = 0; p < trades.pairs.size(); ++p) {
      const double v = primal[program.trade_col(t, p)];
      r.distance_volume += program.pair_distances()[p] * v;
      r.total_transaction += v * fleet.period_hours;
      r.injections[t][fleet.prosumers[trades.pairs[p].seller].bus] += v;
      r.injections[t][fleet.prosumers[trades.pairs[p].buyer].bus] -= v;
    }
    for (std::size_t i = 0; i < fleet.size(); ++i) {
      const PeriodData& d = fleet.prosumers[i].periods[t];
      const double consumption = primal[program.consumption_col(t, i)];
      r.total_utility += d.utility.Value(std::clamp(consumption, d.demand_min(), d.demand_max()));
      double used = consumption - primal[program.discharge_col(t, i)] +
                    primal[program.charge_col(t, i)];
      for (std::size_t p : program.purchases(i)) used -= primal[program.trade_col(t, p)];
      for (std::size_t p : program.sales(i)) used += primal[program.trade_col(t, p)];
      r.curtailment += std::max(0.0, d.renewable - used) * fleet.period_hours;
    }
  }
  r.prosumer_profit = r.total_utility - r.gamma * r.distance_volume;
  r.primal = std::move(primal);
  r.duals = std::move(duals);
  r.reduced_costs = std::move(reduced_costs);
  return r;
}

MarketResponse SolveMarket(const LowerLevelProgram& program, std::size_t num_buses,
                           const SolverOptions& opts) {
  LpSolution sol = GetBackend(opts.backend).Solve(program.lp(), opts);
  if (sol.status != SolveStatus::kOptimal) {
    throw NumericalBreakdown("prosumer problem reported " + ToString(sol.status) +
                             " at gamma " + std::to_string(program.gamma()));
  }
  return MakeMarketResponse(program, num_buses, std::move(sol.primal), std::move(sol.duals),
                            std::move(sol.reduced_costs));
}

MarketMetrics ComputeMarketMetrics(const MarketResponse& response, const BusNetwork& network,
                                   double rho) {
  MarketMetrics m;
  const FlowState flow = network.SolveDcFlow(response.injections);
  m.gamma = response.gamma;
  m.network_charge = response.gamma * response.distance_volume;
  m.transmission_loss = network.TransmissionLoss(flow, rho);
  m.grid_profit = m.network_charge - m.transmission_loss;
  m.prosumer_profit = response.prosumer_profit;
  m.total_transaction_kwh = response.total_transaction;
  m.total_utility = response.total_utility;
  m.social_profit = response.total_utility - m.transmission_loss;
  m.distance_volume = response.distance_volume;
  m.curtailment = response.curtailment;
  m.violations = flow.violations;
  return m;
}

}  // namespace gridcharge
