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

#ifndef GRIDCHARGE_SCENARIO_IO_H_
#define GRIDCHARGE_SCENARIO_IO_H_

#include <cstdint>
#include <string>
#include <vector>

#include "gridcharge/scenario.h"

namespace gridcharge {

// Parses and validates a scenario document (schema in docs/schema.md).
// Throws ParseError on malformed JSON, ValidationError (with a JSON pointer
// to the offending field) on schema or invariant violations, and
// DisconnectedNetwork when the lines do not connect all buses.
Scenario ParseScenario(const std::string& text);
Scenario LoadScenario(const std::string& path);

// Canonical serialization: fixed key order, two-space indentation, shortest
// round-trip number formatting. Parsing the output and serializing again
// reproduces it byte for byte.
std::string SerializeScenario(const Scenario& scenario);
// Throws IoError.
void SaveScenario(const Scenario& scenario, const std::string& path);

// Overrides per-period values from a CSV file with header
// `period,prosumer_id,kind,value` (period 1-based, kind demand_max or
// renewable). A new demand maximum rescales the utility breakpoints
// proportionally over [demand_min, demand_max].
void ApplyProfileCsv(Scenario& scenario, const std::string& path);

// Bundled bus templates.
std::vector<std::string> TemplateNames();
// Directory holding the template files; GRIDCHARGE_DATA_DIR overrides the
// build-time location.
std::string DataDirectory();

struct GeneratorOptions {
  double trade_cap = 100.0;
  // Templates with more buses than this restrict trading to the nearest
  // electrical neighbours.
  std::size_t all_pairs_limit = 12;
  std::size_t neighbours = 4;
  std::size_t horizon = 24;
};

// Deterministic synthetic scenario on a bundled template: one prosumer per
// bus, seeded piecewise-linear utilities with 2 or 3 segments and slopes in
// [0, 1], synthetic demand, solar and wind shapes, and storage when enabled.
// Throws UnknownTemplate.
Scenario GenerateScenario(const std::string& template_name, std::uint64_t seed, bool storage,
                          const GeneratorOptions& options = {});

}  // namespace gridcharge

#endif  // GRIDCHARGE_SCENARIO_IO_H_
