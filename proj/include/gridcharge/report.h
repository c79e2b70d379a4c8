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

#ifndef GRIDCHARGE_REPORT_H_
#define GRIDCHARGE_REPORT_H_

#include <string>
#include <vector>

#include "gridcharge/bilevel.h"
#include "gridcharge/scenario.h"

namespace gridcharge {

// All report numbers are rendered with printf "%.6g". Values are never
// rescaled or otherwise transformed; the JSON emitters carry the same
// doubles at full precision.
std::string FormatNumber(double value);

// One row per configuration with columns market, transmission_loss,
// network_charge, grid_profit, prosumer_profit, total_transaction_kwh,
// social_profit. The centralized benchmark internalizes the charge, so its
// network_charge and grid_profit cells read "--" (null in JSON). Rows of
// infeasible configurations read "infeasible".
std::string ComparisonCsv(const std::vector<ConfigResult>& results);
std::string ComparisonJson(const std::vector<ConfigResult>& results);

// Per-level sweep table: level, gamma, feasible, distance_volume,
// total_transaction_kwh, network_charge, transmission_loss, grid_profit,
// prosumer_profit, social_profit, error.
std::string SweepCsv(const SweepResult& sweep);
std::string SweepJson(const SweepResult& sweep);
// Grid profit against price with the lowest nonnegative-profit, optimal and
// no-trade levels marked.
std::string SweepSvg(const SweepResult& sweep);

// Equilibrium summary with per-period injections, line flows and trades.
std::string EquilibriumJson(const Scenario& scenario, const EquilibriumResult& result);

// Energy traded over the horizon, [buyer][seller] in kWh.
std::vector<std::vector<double>> TradeMatrix(const Scenario& scenario,
                                             const MarketResponse& response);
// Heat map of TradeMatrix.
std::string TradeMatrixSvg(const Scenario& scenario, const MarketResponse& response);

// Throws IoError.
void WriteTextFile(const std::string& path, const std::string& text);

}  // namespace gridcharge

#endif  // GRIDCHARGE_REPORT_H_
