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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "gridcharge/bilevel.h"
#include "gridcharge/errors.h"
#include "gridcharge/report.h"
#include "gridcharge/scenario_io.h"
#include "json.hpp"

namespace gridcharge {
namespace {

std::string DataFile(const std::string& name) { return std::string(GRIDCHARGE_DATA_DIR) + "/" + name; }

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string TempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("gridcharge_test_" + name)).string();
}

nlohmann::ordered_json TriangleJson() {
  return nlohmann::ordered_json::parse(Slurp(DataFile("triangle.json")));
}

std::string ValidationPath(const nlohmann::ordered_json& doc) {
  try {
    ParseScenario(doc.dump());
  } catch (const ValidationError& e) {
    return e.path();
  }
  return "<none>";
}

TEST_CASE("bundled triangle scenario") {
  const Scenario s = LoadScenario(DataFile("triangle.json"));
  CHECK(s.num_buses == 3);
  CHECK(s.lines.size() == 3);
  CHECK(s.reference_bus == 2);
  CHECK(std::abs(s.grid().distance(0, 1) - 4.0 / 3.0) <= 1e-9);
  CHECK(s.fleet.size() == 3);
  CHECK(s.trades.pairs.size() == 6);
}

TEST_CASE("bundled 9-bus scenarios") {
  const Scenario es = LoadScenario(DataFile("ieee9_seed42.json"));
  CHECK(es.fleet.size() == 9);
  CHECK(es.fleet.horizon == 24);
  CHECK(es.fleet.prosumers[0].battery.energy_max == 60.0);
  const Scenario noes = LoadScenario(DataFile("ieee9_seed42_noes.json"));
  CHECK(noes.fleet.prosumers[0].battery.energy_max == 0.0);
  // The bundled files are exactly what the generator produces.
  CHECK(Slurp(DataFile("ieee9_seed42.json")) ==
        SerializeScenario(GenerateScenario("ieee9", 42, true)));
  CHECK(Slurp(DataFile("ieee9_seed42_noes.json")) ==
        SerializeScenario(GenerateScenario("ieee9", 42, false)));
}

TEST_CASE("validation errors carry a JSON pointer") {
  auto doc = TriangleJson();
  doc["network"]["lines"][0]["x"] = 0.0;
  CHECK(ValidationPath(doc) == "/network/lines/0/x");

  doc = TriangleJson();
  doc["network"]["lines"][1].erase("limit");
  CHECK(ValidationPath(doc) == "/network/lines/1/limit");

  doc = TriangleJson();
  doc["prosumers"][2]["bus"] = 7;
  CHECK(ValidationPath(doc) == "/prosumers/2/bus");

  doc = TriangleJson();
  doc["prosumers"][0]["periods"][1]["utility"]["slopes"] = {0.1, 0.5};
  CHECK(ValidationPath(doc) == "/prosumers/0/periods/1/utility/slopes/1");

  doc = TriangleJson();
  doc["prosumers"][1]["periods"].erase(1);
  CHECK(ValidationPath(doc) == "/prosumers/1/periods");

  doc = TriangleJson();
  doc["prosumers"][0]["battery"]["efficiency"] = 1.0;
  CHECK(ValidationPath(doc) == "/prosumers/0/battery/efficiency");

  doc = TriangleJson();
  doc["schema"] = 2;
  CHECK(ValidationPath(doc) == "/schema");

  doc = TriangleJson();
  doc["trades"] = {{"mode", "pairs"}, {"pairs", {{{"between", {"A", "Z"}}, {"cap", 1.0}}}}};
  CHECK(ValidationPath(doc) == "/trades/pairs/0/between/1");
}

TEST_CASE("structural load errors") {
  CHECK_THROWS_AS(ParseScenario("{ not json"), ParseError);
  CHECK_THROWS_AS(LoadScenario(TempPath("missing.json")), ParseError);
  auto doc = TriangleJson();
  doc["network"]["buses"] = 4;
  CHECK_THROWS_AS(ParseScenario(doc.dump()), DisconnectedNetwork);
}

TEST_CASE("explicit trade pairs and optional fields") {
  auto doc = TriangleJson();
  doc["trades"] = {{"mode", "pairs"}, {"pairs", {{{"between", {"A", "C"}}, {"cap", 7.5}}}}};
  doc["prosumers"][0]["battery"].erase("initial_energy");
  doc["network"]["injection_bounds"] = {{{"bus", 2}, {"min", -5.0}, {"max", 5.0}}};
  const Scenario s = ParseScenario(doc.dump());
  REQUIRE(s.trades.pairs.size() == 2);
  CHECK(s.trades.pairs[0].buyer == 0);
  CHECK(s.trades.pairs[0].seller == 2);
  CHECK(s.trades.pairs[1].cap == 7.5);
  CHECK(s.fleet.prosumers[0].battery.initial_energy == 0.0);
  CHECK(s.injection_max[1] == 5.0);
  CHECK(std::isinf(s.injection_max[0]));
  // Canonical text is a fixed point of parse and serialize.
  const std::string text = SerializeScenario(s);
  CHECK(SerializeScenario(ParseScenario(text)) == text);
}

TEST_CASE("generator: determinism, utility shape, storage switch") {
  const std::string a = SerializeScenario(GenerateScenario("ieee9", 7, true));
  const std::string b = SerializeScenario(GenerateScenario("ieee9", 7, true));
  CHECK(a == b);
  CHECK(a != SerializeScenario(GenerateScenario("ieee9", 8, true)));
  CHECK(SerializeScenario(ParseScenario(a)) == a);

  const Scenario s = GenerateScenario("ieee9", 7, true);
  std::size_t two = 0, three = 0;
  for (const Prosumer& p : s.fleet.prosumers) {
    for (const PeriodData& d : p.periods) {
      const std::size_t k = d.utility.segments();
      two += k == 2;
      three += k == 3;
      CHECK(d.utility.alpha() == 0.0);
      CHECK(d.demand_min() == 0.0);
      for (std::size_t i = 0; i < k; ++i) {
        CHECK(d.utility.slope(i) >= 0.0);
        CHECK(d.utility.slope(i) <= 1.0);
        if (i > 0) CHECK(d.utility.slope(i) <= d.utility.slope(i - 1));
      }
    }
  }
  CHECK(two + three == 9 * 24);
  CHECK(two > 0);
  CHECK(three > 0);

  const Scenario off = GenerateScenario("ieee9", 7, false);
  for (const Prosumer& p : off.fleet.prosumers) {
    CHECK(p.battery.energy_max == 0.0);
    CHECK(p.battery.charge_max == 0.0);
    CHECK(p.battery.discharge_max == 0.0);
  }
  CHECK_THROWS_AS(GenerateScenario("ieee14", 1, true), UnknownTemplate);
}

TEST_CASE("every bundled template loads with symmetric distances") {
  for (const std::string& name : TemplateNames()) {
    CAPTURE(name);
    const Scenario s = GenerateScenario(name, 1, true);
    const std::string text = SerializeScenario(s);
    const Scenario back = ParseScenario(text);
    CHECK(SerializeScenario(back) == text);
    const DenseMatrix& d = back.grid().distances();
    for (std::size_t i = 0; i < back.num_buses; ++i) {
      CHECK(d(i, i) == 0.0);
      for (std::size_t j = 0; j < i; ++j) {
        CHECK(d(i, j) == d(j, i));
        CHECK(d(i, j) >= 0.0);
      }
    }
  }
}

TEST_CASE("profile CSV overrides renewables and rescales demand") {
  Scenario s = LoadScenario(DataFile("triangle.json"));
  const std::string path = TempPath("profiles.csv");
  {
    std::ofstream out(path);
    out << "period,prosumer_id,kind,value\n2,B,renewable,12.5\n1,C,demand_max,70\n";
  }
  const std::vector<double> before = s.fleet.prosumers[2].periods[0].utility.breakpoints();
  ApplyProfileCsv(s, path);
  CHECK(s.fleet.prosumers[1].periods[1].renewable == 12.5);
  const auto& after = s.fleet.prosumers[2].periods[0].utility.breakpoints();
  CHECK(after.back() == 70.0);
  CHECK(after[1] == doctest::Approx(before[1] * 2.0));
  {
    std::ofstream out(path);
    out << "period,prosumer_id,kind,value\n3,B,renewable,1\n";
  }
  CHECK_THROWS_AS(ApplyProfileCsv(s, path), ValidationError);
  {
    std::ofstream out(path);
    out << "period,prosumer_id,kind,value\n1,B,wind,1\n";
  }
  CHECK_THROWS_AS(ApplyProfileCsv(s, path), ValidationError);
  std::remove(path.c_str());
}

TEST_CASE("comparison report layout") {
  const Scenario s = LoadScenario(DataFile("triangle.json"));
  const PriceGrid grid(0.0, 1.0, 11);
  std::vector<ConfigResult> rows;
  for (MarketKind kind : {MarketKind::kNoP2P, MarketKind::kFreeP2P, MarketKind::kSocialP2P,
                          MarketKind::kOptimalP2P}) {
    rows.push_back(EvaluateConfig(s, {kind, true}, grid, 0.01, {}));
  }
  const std::string csv = ComparisonCsv(rows);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line ==
        "market,transmission_loss,network_charge,grid_profit,prosumer_profit,"
        "total_transaction_kwh,social_profit");
  std::vector<std::vector<std::string>> cells;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell);
    cells.push_back(row);
  }
  REQUIRE(cells.size() == 4);
  CHECK(cells[0][0] == "No P2P (ES)");
  CHECK(cells[0][1] == "0");
  CHECK(cells[0][2] == "0");
  CHECK(cells[0][3] == "0");
  CHECK(cells[2][2] == "--");
  CHECK(cells[2][3] == "--");

  // The JSON rows carry the same values the CSV renders.
  const auto doc = nlohmann::json::parse(ComparisonJson(rows));
  const char* keys[] = {"transmission_loss", "network_charge",        "grid_profit",
                        "prosumer_profit",   "total_transaction_kwh", "social_profit"};
  for (std::size_t r = 0; r < 4; ++r) {
    CHECK(doc["rows"][r]["market"] == cells[r][0]);
    for (std::size_t c = 0; c < 6; ++c) {
      const auto& v = doc["rows"][r]["metrics"][keys[c]];
      CHECK((v.is_null() ? std::string("--") : FormatNumber(v.get<double>())) == cells[r][c + 1]);
    }
  }
}

TEST_CASE("number rendering") {
  CHECK(FormatNumber(0.0) == "0");
  CHECK(FormatNumber(-0.0) == "0");
  CHECK(FormatNumber(1234567.0) == "1.23457e+06");
  CHECK(FormatNumber(-1.17) == "-1.17");
}

}  // namespace
}  // namespace gridcharge
