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

#include "gridcharge/scenario_io.h"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gridcharge/errors.h"
#include "json.hpp"

namespace gridcharge {
namespace {

using Json = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Typed accessors that report failures with a JSON pointer.
class Reader {
 public:
  static const Json& Field(const Json& obj, const std::string& path, const char* key) {
    if (!obj.is_object()) throw ValidationError(path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) throw ValidationError(path + "/" + key, "missing required field");
    return *it;
  }

  static const Json* Optional(const Json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }

  static double Number(const Json& v, const std::string& path) {
    if (!v.is_number()) throw ValidationError(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ValidationError(path, "expected a finite number");
    return x;
  }

  static double Nonnegative(const Json& v, const std::string& path) {
    const double x = Number(v, path);
    if (x < 0.0) throw ValidationError(path, "must be nonnegative");
    return x;
  }

  static std::uint64_t Unsigned(const Json& v, const std::string& path) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                   v.get<std::int64_t>() < 0)) {
      throw ValidationError(path, "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }

  // 1-based index in [1, count], returned 0-based.
  static std::size_t Index(const Json& v, const std::string& path, std::size_t count) {
    const std::uint64_t k = Unsigned(v, path);
    if (k < 1 || k > count) {
      throw ValidationError(path, "index " + std::to_string(k) + " outside 1.." +
                                      std::to_string(count));
    }
    return static_cast<std::size_t>(k - 1);
  }

  static std::string String(const Json& v, const std::string& path) {
    if (!v.is_string()) throw ValidationError(path, "expected a string");
    return v.get<std::string>();
  }

  static bool Bool(const Json& v, const std::string& path) {
    if (!v.is_boolean()) throw ValidationError(path, "expected a boolean");
    return v.get<bool>();
  }

  static const Json& Array(const Json& v, const std::string& path) {
    if (!v.is_array()) throw ValidationError(path, "expected an array");
    return v;
  }

  static std::vector<double> Numbers(const Json& v, const std::string& path) {
    Array(v, path);
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) {
      out.push_back(Number(v[k], path + "/" + std::to_string(k)));
    }
    return out;
  }
};

std::string At(const std::string& path, std::size_t k) { return path + "/" + std::to_string(k); }

void ParseNetwork(const Json& doc, Scenario& s) {
  const std::string path = "/network";
  const Json& net = Reader::Field(doc, "", "network");
  const std::uint64_t buses = Reader::Unsigned(Reader::Field(net, path, "buses"), path + "/buses");
  if (buses < 1) throw ValidationError(path + "/buses", "at least one bus required");
  s.num_buses = static_cast<std::size_t>(buses);
  s.reference_bus = s.num_buses - 1;
  if (const Json* ref = Reader::Optional(net, "reference_bus")) {
    s.reference_bus = Reader::Index(*ref, path + "/reference_bus", s.num_buses);
  }
  const std::string lines_path = path + "/lines";
  const Json& lines = Reader::Array(Reader::Field(net, path, "lines"), lines_path);
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const std::string lp = At(lines_path, l);
    LineSpec line;
    line.from = Reader::Index(Reader::Field(lines[l], lp, "from"), lp + "/from", s.num_buses);
    line.to = Reader::Index(Reader::Field(lines[l], lp, "to"), lp + "/to", s.num_buses);
    if (line.from == line.to) throw ValidationError(lp + "/to", "self loop");
    line.reactance = Reader::Number(Reader::Field(lines[l], lp, "x"), lp + "/x");
    if (!(line.reactance > 0.0)) throw ValidationError(lp + "/x", "reactance must be positive");
    line.flow_limit = Reader::Nonnegative(Reader::Field(lines[l], lp, "limit"), lp + "/limit");
    s.lines.push_back(line);
  }
  if (const Json* bounds = Reader::Optional(net, "injection_bounds")) {
    const std::string bp = path + "/injection_bounds";
    Reader::Array(*bounds, bp);
    s.injection_min = Vector(s.num_buses, -kInf);
    s.injection_max = Vector(s.num_buses, kInf);
    for (std::size_t k = 0; k < bounds->size(); ++k) {
      const std::string ep = At(bp, k);
      const Json& e = (*bounds)[k];
      const std::size_t bus = Reader::Index(Reader::Field(e, ep, "bus"), ep + "/bus", s.num_buses);
      const double lo = Reader::Number(Reader::Field(e, ep, "min"), ep + "/min");
      const double hi = Reader::Number(Reader::Field(e, ep, "max"), ep + "/max");
      if (lo > hi) throw ValidationError(ep + "/max", "max below min");
      s.injection_min[bus] = lo;
      s.injection_max[bus] = hi;
    }
  }
}

void ParseMarket(const Json& doc, Scenario& s) {
  const std::string path = "/market";
  const Json& m = Reader::Field(doc, "", "market");
  s.market.gamma_min =
      Reader::Nonnegative(Reader::Field(m, path, "gamma_min"), path + "/gamma_min");
  s.market.gamma_max =
      Reader::Nonnegative(Reader::Field(m, path, "gamma_max"), path + "/gamma_max");
  if (s.market.gamma_max < s.market.gamma_min) {
    throw ValidationError(path + "/gamma_max", "below gamma_min");
  }
  s.market.levels = Reader::Unsigned(Reader::Field(m, path, "levels"), path + "/levels");
  if (s.market.levels < 1) throw ValidationError(path + "/levels", "at least one level");
  if ((s.market.levels == 1) != (s.market.gamma_min == s.market.gamma_max)) {
    throw ValidationError(path + "/levels", "a single level requires gamma_min == gamma_max");
  }
  s.market.rho = Reader::Nonnegative(Reader::Field(m, path, "rho"), path + "/rho");
  s.fleet.horizon = Reader::Unsigned(Reader::Field(m, path, "horizon"), path + "/horizon");
  if (s.fleet.horizon < 1) throw ValidationError(path + "/horizon", "at least one period");
  s.fleet.period_hours =
      Reader::Number(Reader::Field(m, path, "period_hours"), path + "/period_hours");
  if (!(s.fleet.period_hours > 0.0)) {
    throw ValidationError(path + "/period_hours", "must be positive");
  }
}

Battery ParseBattery(const Json& b, const std::string& path) {
  Battery out;
  out.energy_min = Reader::Nonnegative(Reader::Field(b, path, "energy_min"), path + "/energy_min");
  out.energy_max = Reader::Nonnegative(Reader::Field(b, path, "energy_max"), path + "/energy_max");
  if (out.energy_max < out.energy_min) {
    throw ValidationError(path + "/energy_max", "below energy_min");
  }
  out.charge_max = Reader::Nonnegative(Reader::Field(b, path, "charge_max"), path + "/charge_max");
  out.discharge_max =
      Reader::Nonnegative(Reader::Field(b, path, "discharge_max"), path + "/discharge_max");
  out.efficiency = Reader::Number(Reader::Field(b, path, "efficiency"), path + "/efficiency");
  if (!(out.efficiency > 0.0 && out.efficiency < 1.0)) {
    throw ValidationError(path + "/efficiency", "must lie in (0, 1)");
  }
  out.initial_energy = out.energy_min;
  if (const Json* v = Reader::Optional(b, "initial_energy")) {
    out.initial_energy = Reader::Number(*v, path + "/initial_energy");
  }
  if (out.initial_energy < out.energy_min || out.initial_energy > out.energy_max) {
    throw ValidationError(path + "/initial_energy", "outside [energy_min, energy_max]");
  }
  return out;
}

PwlUtility ParseUtility(const Json& u, const std::string& path) {
  const double alpha = Reader::Number(Reader::Field(u, path, "alpha"), path + "/alpha");
  std::vector<double> breakpoints =
      Reader::Numbers(Reader::Field(u, path, "breakpoints"), path + "/breakpoints");
  std::vector<double> slopes = Reader::Numbers(Reader::Field(u, path, "slopes"), path + "/slopes");
  if (slopes.empty()) throw ValidationError(path + "/slopes", "at least one segment");
  if (breakpoints.size() != slopes.size() + 1) {
    throw ValidationError(path + "/breakpoints", "needs exactly one more entry than slopes");
  }
  if (breakpoints.front() < 0.0) {
    throw ValidationError(path + "/breakpoints/0", "consumption must be nonnegative");
  }
  for (std::size_t k = 1; k < breakpoints.size(); ++k) {
    if (!(breakpoints[k] > breakpoints[k - 1])) {
      throw ValidationError(At(path + "/breakpoints", k), "breakpoints must strictly increase");
    }
  }
  for (std::size_t k = 1; k < slopes.size(); ++k) {
    if (slopes[k] > slopes[k - 1]) {
      throw ValidationError(At(path + "/slopes", k), "slopes must not increase (concavity)");
    }
  }
  return PwlUtility(alpha, std::move(breakpoints), std::move(slopes));
}

std::map<std::string, std::size_t> ParseProsumers(const Json& doc, Scenario& s) {
  const std::string path = "/prosumers";
  const Json& list = Reader::Array(Reader::Field(doc, "", "prosumers"), path);
  std::map<std::string, std::size_t> ids;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string pp = At(path, i);
    const Json& pj = list[i];
    Prosumer p;
    p.id = Reader::String(Reader::Field(pj, pp, "id"), pp + "/id");
    if (p.id.empty()) throw ValidationError(pp + "/id", "must not be empty");
    if (!ids.emplace(p.id, i).second) throw ValidationError(pp + "/id", "duplicate id " + p.id);
    p.bus = Reader::Index(Reader::Field(pj, pp, "bus"), pp + "/bus", s.num_buses);
    p.battery = ParseBattery(Reader::Field(pj, pp, "battery"), pp + "/battery");
    const std::string periods_path = pp + "/periods";
    const Json& periods = Reader::Array(Reader::Field(pj, pp, "periods"), periods_path);
    if (periods.size() != s.fleet.horizon) {
      throw ValidationError(periods_path, "has " + std::to_string(periods.size()) +
                                              " entries, horizon is " +
                                              std::to_string(s.fleet.horizon));
    }
    for (std::size_t t = 0; t < periods.size(); ++t) {
      const std::string tp = At(periods_path, t);
      PeriodData d;
      d.renewable =
          Reader::Nonnegative(Reader::Field(periods[t], tp, "renewable"), tp + "/renewable");
      d.utility = ParseUtility(Reader::Field(periods[t], tp, "utility"), tp + "/utility");
      p.periods.push_back(std::move(d));
    }
    s.fleet.prosumers.push_back(std::move(p));
  }
  return ids;
}

void ParseTrades(const Json& doc, const std::map<std::string, std::size_t>& ids, Scenario& s) {
  const std::string path = "/trades";
  const Json& tr = Reader::Field(doc, "", "trades");
  const std::string mode = Reader::String(Reader::Field(tr, path, "mode"), path + "/mode");
  if (mode == "all") {
    s.all_pairs = true;
    s.default_cap = Reader::Nonnegative(Reader::Field(tr, path, "cap"), path + "/cap");
    s.trades = TradeGraph::AllPairs(s.fleet.size(), s.default_cap);
    return;
  }
  if (mode != "pairs") throw ValidationError(path + "/mode", "expected \"all\" or \"pairs\"");
  s.all_pairs = false;
  const std::string list_path = path + "/pairs";
  const Json& pairs = Reader::Array(Reader::Field(tr, path, "pairs"), list_path);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> seen;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const std::string ep = At(list_path, k);
    const Json& between = Reader::Array(Reader::Field(pairs[k], ep, "between"), ep + "/between");
    if (between.size() != 2) throw ValidationError(ep + "/between", "expected two prosumer ids");
    std::size_t ends[2];
    for (std::size_t e = 0; e < 2; ++e) {
      const std::string id = Reader::String(between[e], At(ep + "/between", e));
      const auto it = ids.find(id);
      if (it == ids.end()) throw ValidationError(At(ep + "/between", e), "unknown prosumer " + id);
      ends[e] = it->second;
    }
    if (ends[0] == ends[1]) throw ValidationError(ep + "/between", "self trade");
    const auto key = std::minmax(ends[0], ends[1]);
    if (!seen.emplace(key, k).second) throw ValidationError(ep + "/between", "duplicate pair");
    const double cap = Reader::Nonnegative(Reader::Field(pairs[k], ep, "cap"), ep + "/cap");
    s.trades.pairs.push_back({ends[0], ends[1], cap});
    s.trades.pairs.push_back({ends[1], ends[0], cap});
  }
}

void ParseProvenance(const Json& doc, Scenario& s) {
  const Json* pj = Reader::Optional(doc, "provenance");
  if (pj == nullptr) return;
  const std::string path = "/provenance";
  if (!pj->is_object()) throw ValidationError(path, "expected an object");
  if (const Json* v = Reader::Optional(*pj, "generator")) {
    s.provenance.generator = Reader::String(*v, path + "/generator");
  }
  if (const Json* v = Reader::Optional(*pj, "template")) {
    s.provenance.template_name = Reader::String(*v, path + "/template");
  }
  if (const Json* v = Reader::Optional(*pj, "seed")) {
    s.provenance.seed = Reader::Unsigned(*v, path + "/seed");
  }
  if (const Json* v = Reader::Optional(*pj, "storage")) {
    s.provenance.storage = Reader::Bool(*v, path + "/storage");
  }
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

// Rounds to `digits` decimals so generated files stay readable.
double Round(double v, int digits = 4) {
  const double scale = std::pow(10.0, digits);
  const double r = std::round(v * scale) / scale;
  return r == 0.0 ? 0.0 : r;
}

}  // namespace

Scenario ParseScenario(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("malformed scenario JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("", "document must be an object");
  const Json& schema = Reader::Field(doc, "", "schema");
  if (!schema.is_number_integer() || schema.get<std::int64_t>() != kScenarioSchemaVersion) {
    throw ValidationError("/schema", "unsupported schema version (expected " +
                                         std::to_string(kScenarioSchemaVersion) + ")");
  }
  Scenario s;
  if (const Json* name = Reader::Optional(doc, "name")) s.name = Reader::String(*name, "/name");
  ParseProvenance(doc, s);
  ParseNetwork(doc, s);
  ParseMarket(doc, s);
  const auto ids = ParseProsumers(doc, s);
  ParseTrades(doc, ids, s);
  // Field-level checks above cover these; kept as a safety net for the
  // structural invariants owned by the market types.
  s.fleet.Validate(s.num_buses);
  s.trades.Validate(s.fleet.size());
  s.network = std::make_shared<const BusNetwork>(s.num_buses, s.lines, s.reference_bus);
  return s;
}

Scenario LoadScenario(const std::string& path) { return ParseScenario(ReadFile(path)); }

std::string SerializeScenario(const Scenario& s) {
  Json doc;
  doc["schema"] = kScenarioSchemaVersion;
  doc["name"] = s.name;
  Json prov;
  prov["generator"] = s.provenance.generator;
  prov["template"] = s.provenance.template_name;
  prov["seed"] = s.provenance.seed;
  prov["storage"] = s.provenance.storage;
  doc["provenance"] = prov;

  Json net;
  net["buses"] = s.num_buses;
  net["reference_bus"] = s.reference_bus + 1;
  Json lines = Json::array();
  for (const LineSpec& l : s.lines) {
    Json lj;
    lj["from"] = l.from + 1;
    lj["to"] = l.to + 1;
    lj["x"] = l.reactance;
    lj["limit"] = l.flow_limit;
    lines.push_back(lj);
  }
  net["lines"] = lines;
  if (!s.injection_min.empty()) {
    Json bounds = Json::array();
    for (std::size_t b = 0; b < s.num_buses; ++b) {
      if (std::isinf(s.injection_min[b]) && std::isinf(s.injection_max[b])) continue;
      Json e;
      e["bus"] = b + 1;
      e["min"] = s.injection_min[b];
      e["max"] = s.injection_max[b];
      bounds.push_back(e);
    }
    net["injection_bounds"] = bounds;
  }
  doc["network"] = net;

  Json market;
  market["gamma_min"] = s.market.gamma_min;
  market["gamma_max"] = s.market.gamma_max;
  market["levels"] = s.market.levels;
  market["rho"] = s.market.rho;
  market["horizon"] = s.fleet.horizon;
  market["period_hours"] = s.fleet.period_hours;
  doc["market"] = market;

  Json trades;
  if (s.all_pairs) {
    trades["mode"] = "all";
    trades["cap"] = s.default_cap;
  } else {
    trades["mode"] = "pairs";
    Json pairs = Json::array();
    for (const TradePair& p : s.trades.pairs) {
      if (p.buyer > p.seller) continue;
      Json e;
      e["between"] = {s.fleet.prosumers[p.buyer].id, s.fleet.prosumers[p.seller].id};
      e["cap"] = p.cap;
      pairs.push_back(e);
    }
    trades["pairs"] = pairs;
  }
  doc["trades"] = trades;

  Json prosumers = Json::array();
  for (const Prosumer& p : s.fleet.prosumers) {
    Json pj;
    pj["id"] = p.id;
    pj["bus"] = p.bus + 1;
    Json bj;
    bj["energy_min"] = p.battery.energy_min;
    bj["energy_max"] = p.battery.energy_max;
    bj["charge_max"] = p.battery.charge_max;
    bj["discharge_max"] = p.battery.discharge_max;
    bj["efficiency"] = p.battery.efficiency;
    bj["initial_energy"] = p.battery.initial_energy;
    pj["battery"] = bj;
    Json periods = Json::array();
    for (const PeriodData& d : p.periods) {
      Json uj;
      uj["alpha"] = d.utility.alpha();
      uj["breakpoints"] = d.utility.breakpoints();
      uj["slopes"] = d.utility.slopes();
      Json dj;
      dj["renewable"] = d.renewable;
      dj["utility"] = uj;
      periods.push_back(dj);
    }
    pj["periods"] = periods;
    prosumers.push_back(pj);
  }
  doc["prosumers"] = prosumers;
  return doc.dump(2) + "\n";
}

void SaveScenario(const Scenario& scenario, const std::string& path) {
  WriteFile(path, SerializeScenario(scenario));
}

void ApplyProfileCsv(Scenario& scenario, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::map<std::string, std::size_t> ids;
  for (std::size_t i = 0; i < scenario.fleet.size(); ++i) ids[scenario.fleet.prosumers[i].id] = i;

  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw ValidationError(path + ":" + std::to_string(line_no), msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line_no == 1) {
      if (cells != std::vector<std::string>{"period", "prosumer_id", "kind", "value"}) {
        fail("expected header period,prosumer_id,kind,value");
      }
      continue;
    }
    if (cells.size() != 4) fail("expected 4 columns");
    char* end = nullptr;
    const unsigned long long period = std::strtoull(cells[0].c_str(), &end, 10);
    if (cells[0].empty() || *end != '\0' || period < 1 || period > scenario.fleet.horizon) {
      fail("period must be an integer in 1.." + std::to_string(scenario.fleet.horizon));
    }
    const auto it = ids.find(cells[1]);
    if (it == ids.end()) fail("unknown prosumer " + cells[1]);
    const double value = std::strtod(cells[3].c_str(), &end);
    if (cells[3].empty() || *end != '\0' || !std::isfinite(value) || value < 0.0) {
      fail("value must be a finite nonnegative number");
    }
    PeriodData& d = scenario.fleet.prosumers[it->second].periods[period - 1];
    if (cells[2] == "renewable") {
      d.renewable = value;
    } else if (cells[2] == "demand_max") {
      const double lo = d.demand_min();
      if (!(value > lo)) fail("demand_max must exceed the demand minimum");
      const double scale = (value - lo) / (d.demand_max() - lo);
      std::vector<double> bp = d.utility.breakpoints();
      for (double& b : bp) b = lo + (b - lo) * scale;
      bp.back() = value;
      d.utility = PwlUtility(d.utility.alpha(), std::move(bp), d.utility.slopes());
    } else {
      fail("kind must be demand_max or renewable");
    }
  }
}

Scenario WithoutStorage(const Scenario& scenario) {
  Scenario s = scenario;
  DisableStorage(s.fleet);
  s.provenance.storage = false;
  return s;
}

Scenario WithoutTrading(const Scenario& scenario) {
  Scenario s = scenario;
  s.trades.pairs.clear();
  s.all_pairs = false;
  return s;
}

std::vector<std::string> TemplateNames() { return {"ieee9", "ieee39", "ieee57", "ieee118"}; }

std::string DataDirectory() {
  if (const char* env = std::getenv("GRIDCHARGE_DATA_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return GRIDCHARGE_DATA_DIR;
}

namespace {

// Synthetic 24-hour shapes, normalized to a peak of 1 and sampled at the
// start of each hour. Longer or shorter horizons wrap or truncate.
constexpr double kDemandShape[24] = {0.45, 0.40, 0.38, 0.37, 0.38, 0.45, 0.60, 0.75,
                                     0.80, 0.72, 0.66, 0.64, 0.65, 0.63, 0.62, 0.66,
                                     0.75, 0.90, 1.00, 0.98, 0.90, 0.78, 0.64, 0.52};
constexpr double kSolarShape[24] = {0.00, 0.00, 0.00, 0.00, 0.00, 0.02, 0.10, 0.25,
                                    0.45, 0.65, 0.82, 0.95, 1.00, 0.96, 0.85, 0.68,
                                    0.47, 0.26, 0.09, 0.01, 0.00, 0.00, 0.00, 0.00};
constexpr double kWindShape[24] = {0.85, 0.90, 0.95, 1.00, 0.96, 0.88, 0.76, 0.62,
                                   0.50, 0.42, 0.36, 0.32, 0.30, 0.31, 0.34, 0.40,
                                   0.48, 0.56, 0.62, 0.68, 0.72, 0.76, 0.80, 0.83};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  // Uniform on [0, 1) from the top 53 bits, identical on every platform.
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace

Scenario GenerateScenario(const std::string& template_name, std::uint64_t seed, bool storage,
                          const GeneratorOptions& options) {
  const auto names = TemplateNames();
  if (std::find(names.begin(), names.end(), template_name) == names.end()) {
    throw UnknownTemplate("unknown bus template '" + template_name + "'");
  }
  const std::string path = DataDirectory() + "/templates/" + template_name + ".json";
  Json tpl;
  try {
    tpl = Json::parse(ReadFile(path));
  } catch (const Json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }

  Scenario s;
  s.name = template_name + "_seed" + std::to_string(seed) + (storage ? "" : "_noes");
  s.provenance = {"gridcharge generate", template_name, seed, storage};
  s.num_buses = tpl.at("buses").get<std::size_t>();
  s.reference_bus = s.num_buses - 1;
  for (const Json& l : tpl.at("lines")) {
    s.lines.push_back({l.at("from").get<std::size_t>() - 1, l.at("to").get<std::size_t>() - 1,
                       l.at("x").get<double>(), l.at("rate").get<double>()});
  }
  s.fleet.horizon = options.horizon;
  s.fleet.period_hours = 1.0;

  Rng rng(seed);
  for (std::size_t i = 0; i < s.num_buses; ++i) {
    Prosumer p;
    p.id = "P" + std::to_string(i + 1);
    p.bus = i;
    // Per-prosumer scale and mix of the shared shapes.
    const double peak_demand = rng.Uniform(20.0, 60.0);
    const double solar_peak = rng.Uniform(0.0, 70.0);
    const double wind_peak = rng.Uniform(0.0, 40.0);
    const double phase = rng.Uniform();
    for (std::size_t t = 0; t < s.fleet.horizon; ++t) {
      const std::size_t h = t % 24;
      const double noise = 0.9 + 0.2 * rng.Uniform();
      const double demand = Round(peak_demand * kDemandShape[h] * noise);
      const double wind_h = kWindShape[(h + static_cast<std::size_t>(phase * 24.0)) % 24];
      PeriodData d;
      d.renewable = Round(solar_peak * kSolarShape[h] + wind_peak * wind_h * rng.Uniform(0.7, 1.0));
      const std::size_t segments = rng.Uniform() < 0.5 ? 2 : 3;
      std::vector<double> slopes(segments);
      for (double& b : slopes) b = Round(rng.Uniform());
      std::sort(slopes.begin(), slopes.end(), std::greater<>());
      const double top = Round(demand + 30.0);
      std::vector<double> breakpoints(segments + 1);
      for (std::size_t k = 0; k <= segments; ++k) {
        breakpoints[k] = Round(top * static_cast<double>(k) / static_cast<double>(segments));
      }
      breakpoints.back() = top;
      d.utility = PwlUtility(0.0, std::move(breakpoints), std::move(slopes));
      p.periods.push_back(std::move(d));
    }
    if (storage) p.battery = {0.0, 60.0, 50.0, 50.0, 0.9, 0.0};
    s.fleet.prosumers.push_back(std::move(p));
  }

  s.network = std::make_shared<const BusNetwork>(s.num_buses, s.lines, s.reference_bus);
  s.default_cap = options.trade_cap;
  if (s.num_buses <= options.all_pairs_limit) {
    s.all_pairs = true;
    s.trades = TradeGraph::AllPairs(s.fleet.size(), options.trade_cap);
  } else {
    // Each prosumer trades with its nearest electrical neighbours; the
    // relation is symmetrized.
    s.all_pairs = false;
    const std::size_t n = s.fleet.size();
    std::vector<std::vector<bool>> linked(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::size_t> order;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) order.push_back(j);
      }
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return s.grid().distance(i, a) < s.grid().distance(i, b);
      });
      for (std::size_t k = 0; k < std::min(options.neighbours, order.size()); ++k) {
        linked[i][order[k]] = linked[order[k]][i] = true;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!linked[i][j]) continue;
        s.trades.pairs.push_back({i, j, options.trade_cap});
        s.trades.pairs.push_back({j, i, options.trade_cap});
      }
    }
  }
  s.market = MarketParams{};
  s.fleet.Validate(s.num_buses);
  s.trades.Validate(s.fleet.size());
  return s;
}

}  // namespace gridcharge
