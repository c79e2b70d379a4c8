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

#ifndef GRIDCHARGE_BILEVEL_H_
#define GRIDCHARGE_BILEVEL_H_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gridcharge/linear_program.h"
#include "gridcharge/market.h"
#include "gridcharge/network.h"
#include "gridcharge/quadratic_program.h"
#include "gridcharge/scenario.h"

namespace gridcharge {

// Evenly spaced network-charge prices gamma_min, ..., gamma_max.
class PriceGrid {
 public:
  // Throws InputError unless 0 <= gamma_min <= gamma_max, levels >= 1, and
  // levels == 1 exactly when gamma_min == gamma_max.
  PriceGrid(double gamma_min, double gamma_max, std::size_t levels);
  // Number of levels is round((max - min) / step) + 1; the step must divide
  // the range to within 1e-9 relative.
  static PriceGrid FromStep(double gamma_min, double gamma_max, double step);

  double gamma_min() const { return gamma_min_; }
  double gamma_max() const { return gamma_max_; }
  std::size_t levels() const { return levels_; }
  double step() const;
  double level(std::size_t k) const;

 private:
  double gamma_min_;
  double gamma_max_;
  std::size_t levels_;
};

// Upper bound on the distance-weighted trade volume Z (and hence on every
// price-level product), with a 1.01 safety factor. Throws InfiniteCap when a
// trade cap is unbounded.
double BigMBound(const ProsumerFleet& fleet, const TradeGraph& trades,
                 const DenseMatrix& bus_distances);

struct LevelRecord {
  std::size_t level = 0;
  double gamma = 0.0;
  bool feasible = false;
  // Solver failure message; empty when the level was solved.
  std::string error;
  // Optimal lower-level value at this price.
  double lower_value = 0.0;
  MarketMetrics metrics;
};

// The grid-favouring prosumer-optimal response at one price level.
struct LevelSolution {
  bool feasible = false;
  double lower_value = 0.0;
  MarketResponse response;
  MarketMetrics metrics;
  FlowState flow;
  // Dual solution of the prosumer LP (certifies the response as optimal).
  Vector lp_duals;
  Vector lp_reduced_costs;
};

// Solves the prosumer LP at gamma, then among its optimal solutions maximizes
// gamma * Z - rho * loss subject to the DC network (line limits and optional
// injection bounds). Infeasible when no optimal response respects the
// network.
LevelSolution SolveLevel(const Scenario& scenario, double gamma, double rho,
                         const SolverOptions& opts);

// Index of the feasible record with the largest grid profit; among records
// within 1e-9 (1 + |best|) of the best, the lowest price wins.
std::optional<std::size_t> SelectBestLevel(const std::vector<LevelRecord>& records);

struct SweepResult {
  PriceGrid grid{0.0, 0.0, 1};
  std::vector<LevelRecord> records;
  std::optional<std::size_t> best;
  // Lowest level with nonnegative grid profit.
  std::optional<std::size_t> lower_price;
  // Lowest level at which no trade happens.
  std::optional<std::size_t> upper_price;
};

// Evaluates every level independently on up to `threads` workers. Solver
// errors are recorded in the affected record. The output does not depend on
// the thread count.
SweepResult SweepPrices(const Scenario& scenario, const PriceGrid& grid, double rho,
                        const SolverOptions& opts, std::size_t threads = 1);

struct EquilibriumResult {
  SweepResult sweep;
  std::size_t level = 0;
  double gamma = 0.0;
  LevelSolution solution;
  double big_m = 0.0;
};

// Exact solution of the discretized single-level problem by enumerating the
// price levels. Throws NumericalBreakdown if any level failed numerically and
// AllLevelsInfeasible when no level admits a network-feasible response.
EquilibriumResult SolveEquilibrium(const Scenario& scenario, const PriceGrid& grid, double rho,
                                   const SolverOptions& opts, std::size_t threads = 1);

// Centralized benchmark: maximize total utility minus loss cost subject to
// the prosumer and network constraints. Network charge is zero and the grid
// profit is minus the loss cost. `feasible` is false when the network admits
// no solution.
LevelSolution SocialOptimum(const Scenario& scenario, double rho, const SolverOptions& opts);

// The four market designs compared side by side.
enum class MarketKind { kNoP2P, kFreeP2P, kSocialP2P, kOptimalP2P };

inline constexpr double kFreeTradePrice = 1e-7;

struct MarketConfig {
  MarketKind kind = MarketKind::kOptimalP2P;
  bool storage = true;
  std::string name() const;
};

struct ConfigResult {
  MarketConfig config;
  bool feasible = false;
  // Price used (absent for the centralized benchmark).
  std::optional<double> gamma;
  MarketMetrics metrics;
};

ConfigResult EvaluateConfig(const Scenario& scenario, const MarketConfig& config,
                            const PriceGrid& grid, double rho, const SolverOptions& opts,
                            std::size_t threads = 1);

}  // namespace gridcharge

#endif  // GRIDCHARGE_BILEVEL_H_
