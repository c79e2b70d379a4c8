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

#ifndef GRIDCHARGE_MARKET_H_
#define GRIDCHARGE_MARKET_H_

#include <cstddef>
#include <string>
#include <vector>

#include "gridcharge/linear_program.h"
#include "gridcharge/matrix.h"
#include "gridcharge/network.h"
#include "gridcharge/utility.h"

namespace gridcharge {

struct Battery {
  double energy_min = 0.0;       // kWh
  double energy_max = 0.0;       // kWh
  double charge_max = 0.0;       // kW
  double discharge_max = 0.0;    // kW
  double efficiency = 0.9;       // in (0, 1)
  double initial_energy = 0.0;   // kWh, energy at the start of period 0
};

struct PeriodData {
  double renewable = 0.0;  // kW
  // Its breakpoints span [demand_min, demand_max].
  PwlUtility utility;
  double demand_min() const { return utility.min_consumption(); }
  double demand_max() const { return utility.max_consumption(); }
};

struct Prosumer {
  std::string id;
  std::size_t bus = 0;
  std::vector<PeriodData> periods;
  Battery battery;
};

struct ProsumerFleet {
  std::vector<Prosumer> prosumers;
  std::size_t horizon = 0;
  double period_hours = 1.0;

  std::size_t size() const { return prosumers.size(); }
  // Throws InputError when a prosumer breaks its invariants or the horizon.
  void Validate(std::size_t num_buses) const;
};

// Directed trade p_{buyer,seller}: power the buyer receives from the seller.
struct TradePair {
  std::size_t buyer = 0;
  std::size_t seller = 0;
  double cap = 0.0;  // kW
};

// Both directions of every trading relation, with equal caps.
struct TradeGraph {
  std::vector<TradePair> pairs;

  static TradeGraph AllPairs(std::size_t prosumers, double cap);
  // Throws InputError when a direction is missing, caps differ, a pair is a
  // self trade, or an index is out of range.
  void Validate(std::size_t prosumers) const;
};

// Disables storage: zero capacities and energy fixed at zero.
void DisableStorage(ProsumerFleet& fleet);

// True when some prosumer can charge or discharge.
bool HasStorage(const ProsumerFleet& fleet);

enum class ColumnKind { kTrade, kConsumption, kCharge, kDischarge, kEnergy, kUtility };
enum class RowKind { kBalance, kDynamics, kEpigraph };

// kEnergy at period t is the stored energy at the end of t.
struct ColumnKey {
  ColumnKind kind;
  std::size_t period;
  std::size_t index;  // trade pair for kTrade, prosumer otherwise
};

struct RowKey {
  RowKind kind;
  std::size_t period;
  std::size_t prosumer;
  std::size_t segment;  // kEpigraph only
};

// The prosumers' joint profit-maximization LP at a fixed network-charge price:
//   max  sum u - gamma * sum d p
//   s.t. balance:   P - dis + ch - bought + sold <= renewable
//        dynamics:  e_t - e_{t-1} - eta ch + dis / eta = 0
//        epigraph:  u - slope_k P <= intercept_k
// with trade caps, demand range, charge/discharge limits and energy range
// as variable bounds.
class LowerLevelProgram {
 public:
  const LinearProgram& lp() const { return lp_; }
  double gamma() const { return gamma_; }
  const ProsumerFleet& fleet() const { return *fleet_; }
  const TradeGraph& trades() const { return *trades_; }
  std::size_t horizon() const { return fleet_->horizon; }

  const std::vector<ColumnKey>& columns() const { return columns_; }
  const std::vector<RowKey>& rows() const { return rows_; }
  // Distance charged per unit of each trade pair (same order as trades()).
  const Vector& pair_distances() const { return pair_distances_; }

  std::size_t trade_col(std::size_t t, std::size_t pair) const;
  std::size_t consumption_col(std::size_t t, std::size_t i) const;
  std::size_t charge_col(std::size_t t, std::size_t i) const { return consumption_col(t, i) + 1; }
  std::size_t discharge_col(std::size_t t, std::size_t i) const { return consumption_col(t, i) + 2; }
  std::size_t energy_col(std::size_t t, std::size_t i) const { return consumption_col(t, i) + 3; }
  std::size_t utility_col(std::size_t t, std::size_t i) const { return consumption_col(t, i) + 4; }
  std::size_t balance_row(std::size_t t, std::size_t i) const;
  std::size_t dynamics_row(std::size_t t, std::size_t i) const;
  std::size_t epigraph_row(std::size_t t, std::size_t i, std::size_t k) const;

  // Pairs in which prosumer i buys / sells.
  const std::vector<std::size_t>& purchases(std::size_t i) const { return purchases_[i]; }
  const std::vector<std::size_t>& sales(std::size_t i) const { return sales_[i]; }

 private:
  friend LowerLevelProgram BuildLowerLp(const ProsumerFleet&, const TradeGraph&,
                                        const DenseMatrix&, double);
  const ProsumerFleet* fleet_ = nullptr;
  const TradeGraph* trades_ = nullptr;
  double gamma_ = 0.0;
  LinearProgram lp_;
  std::vector<ColumnKey> columns_;
  std::vector<RowKey> rows_;
  Vector pair_distances_;
  std::size_t period_columns_ = 0;
  std::vector<std::size_t> period_row_start_;
  std::vector<std::size_t> epigraph_offset_;  // per period: first epigraph row
  std::vector<std::vector<std::size_t>> epigraph_index_;  // [t][i] offset within period
  std::vector<std::vector<std::size_t>> purchases_;
  std::vector<std::vector<std::size_t>> sales_;
};

// `bus_distances` is the network distance matrix. The fleet and trade graph
// must outlive the returned program. Throws MissingDistance when a prosumer
// bus has no distance entry and InputError when gamma < 0.
LowerLevelProgram BuildLowerLp(const ProsumerFleet& fleet, const TradeGraph& trades,
                               const DenseMatrix& bus_distances, double gamma);
// The program keeps references, so temporaries are rejected.
LowerLevelProgram BuildLowerLp(ProsumerFleet&&, const TradeGraph&, const DenseMatrix&,
                               double) = delete;
LowerLevelProgram BuildLowerLp(const ProsumerFleet&, TradeGraph&&, const DenseMatrix&,
                               double) = delete;
LowerLevelProgram BuildLowerLp(ProsumerFleet&&, TradeGraph&&, const DenseMatrix&,
                               double) = delete;

struct MarketResponse {
  double gamma = 0.0;
  Vector primal;
  Vector duals;
  Vector reduced_costs;
  // Lower-level objective: total utility minus network charges.
  double prosumer_profit = 0.0;
  // Sum over periods and pairs of d * p (kW km).
  double distance_volume = 0.0;
  // Sum of all trades (kWh).
  double total_transaction = 0.0;
  // Sum of U(P) evaluated on the consumption levels.
  double total_utility = 0.0;
  // Renewable energy left unused (kWh).
  double curtailment = 0.0;
  // [period][bus]: energy sold minus energy bought.
  std::vector<Vector> injections;
};

// Builds the response record for a given primal/dual pair of `program`.
MarketResponse MakeMarketResponse(const LowerLevelProgram& program, std::size_t num_buses,
                                  Vector primal, Vector duals, Vector reduced_costs);

// Solves the LP with the backend named in opts. Throws NumericalBreakdown if
// the LP is not solved to optimality, which cannot happen for valid data.
MarketResponse SolveMarket(const LowerLevelProgram& program, std::size_t num_buses,
                           const SolverOptions& opts = {});

struct MarketMetrics {
  double gamma = 0.0;
  double network_charge = 0.0;     // gamma * Z
  double transmission_loss = 0.0;  // rho * loss
  double grid_profit = 0.0;
  double prosumer_profit = 0.0;
  double total_transaction_kwh = 0.0;
  double social_profit = 0.0;
  double total_utility = 0.0;
  double distance_volume = 0.0;
  double curtailment = 0.0;
  std::vector<LimitViolation> violations;
};

// Grid-side accounting: each ordered trade is charged once at gamma * d.
MarketMetrics ComputeMarketMetrics(const MarketResponse& response, const BusNetwork& network,
                                   double rho);

}  // namespace gridcharge

#endif  // GRIDCHARGE_MARKET_H_
