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

#ifndef GRIDCHARGE_SCENARIO_H_
#define GRIDCHARGE_SCENARIO_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gridcharge/market.h"
#include "gridcharge/matrix.h"
#include "gridcharge/network.h"

namespace gridcharge {

inline constexpr int kScenarioSchemaVersion = 1;

struct MarketParams {
  double gamma_min = 0.0;
  double gamma_max = 1.0;
  std::size_t levels = 51;
  double rho = 0.01;
};

struct Provenance {
  std::string generator;
  std::string template_name;
  std::uint64_t seed = 0;
  bool storage = true;
};

// A loaded and validated case: network, prosumers, trading relations and
// market parameters. Bus and prosumer indices are 0-based in memory and
// 1-based in files.
struct Scenario {
  std::string name;
  std::size_t num_buses = 0;
  std::size_t reference_bus = 0;
  // Lines as given in the file, before parallel lines are merged.
  std::vector<LineSpec> lines;
  std::shared_ptr<const BusNetwork> network;
  ProsumerFleet fleet;
  TradeGraph trades;
  // "all" trade mode with this cap, or an explicit pair list.
  bool all_pairs = true;
  double default_cap = 100.0;
  // Optional per-bus injection bounds (kW); infinite when absent.
  Vector injection_min;
  Vector injection_max;
  MarketParams market;
  Provenance provenance;

  const BusNetwork& grid() const { return *network; }
};

// Returns a copy with storage disabled (zero capacities).
Scenario WithoutStorage(const Scenario& scenario);
// Returns a copy with an empty trade graph.
Scenario WithoutTrading(const Scenario& scenario);

}  // namespace gridcharge

#endif  // GRIDCHARGE_SCENARIO_H_
