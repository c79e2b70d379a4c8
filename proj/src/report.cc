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

#include "gridcharge/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gridcharge/errors.h"
#include "gridcharge/market.h"
#include "json.hpp"

namespace gridcharge {
namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kComparisonHeader =
    "market,transmission_loss,network_charge,grid_profit,prosumer_profit,"
    "total_transaction_kwh,social_profit";

bool Internalized(const ConfigResult& r) { return r.config.kind == MarketKind::kSocialP2P; }

Json OptionalLevel(const SweepResult& sweep, const std::optional<std::size_t>& level) {
  if (!level) return nullptr;
  Json j;
  j["level"] = *level;
  j["gamma"] = sweep.records[*level].gamma;
  return j;
}

Json MetricsJson(const MarketMetrics& m) {
  Json j;
  j["gamma"] = m.gamma;
  j["transmission_loss"] = m.transmission_loss;
  j["network_charge"] = m.network_charge;
  j["grid_profit"] = m.grid_profit;
  j["prosumer_profit"] = m.prosumer_profit;
  j["total_transaction_kwh"] = m.total_transaction_kwh;
  j["social_profit"] = m.social_profit;
  j["total_utility"] = m.total_utility;
  j["distance_volume"] = m.distance_volume;
  j["curtailment"] = m.curtailment;
  return j;
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string FormatNumber(double value) {
  if (value == 0.0) value = 0.0;  // drop negative zero
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

std::string ComparisonCsv(const std::vector<ConfigResult>& results) {
  std::ostringstream out;
  out << kComparisonHeader << "\n";
  for (const ConfigResult& r : results) {
    out << r.config.name();
    if (!r.feasible) {
      for (int k = 0; k < 6; ++k) out << ",infeasible";
      out << "\n";
      continue;
    }
    const MarketMetrics& m = r.metrics;
    const bool internal = Internalized(r);
    out << "," << FormatNumber(m.transmission_loss) << ","
        << (internal ? "--" : FormatNumber(m.network_charge)) << ","
        << (internal ? "--" : FormatNumber(m.grid_profit)) << ","
        << FormatNumber(m.prosumer_profit) << "," << FormatNumber(m.total_transaction_kwh) << ","
        << FormatNumber(m.social_profit) << "\n";
  }
  return out.str();
}

std::string ComparisonJson(const std::vector<ConfigResult>& results) {
  Json rows = Json::array();
  for (const ConfigResult& r : results) {
    Json j;
    j["market"] = r.config.name();
    j["storage"] = r.config.storage;
    j["feasible"] = r.feasible;
    j["gamma"] = r.gamma ? Json(*r.gamma) : Json(nullptr);
    if (r.feasible) {
      Json m = MetricsJson(r.metrics);
      if (Internalized(r)) {
        m["network_charge"] = nullptr;
        m["grid_profit"] = nullptr;
      }
      j["metrics"] = m;
    } else {
      j["metrics"] = nullptr;
    }
    rows.push_back(j);
  }
  Json doc;
  doc["rows"] = rows;
  return doc.dump(2) + "\n";
}

std::string SweepCsv(const SweepResult& sweep) {
  std::ostringstream out;
  out << "level,gamma,feasible,distance_volume,total_transaction_kwh,network_charge,"
         "transmission_loss,grid_profit,prosumer_profit,social_profit,error\n";
  for (const LevelRecord& r : sweep.records) {
    const MarketMetrics& m = r.metrics;
    out << r.level << "," << FormatNumber(r.gamma) << "," << (r.feasible ? 1 : 0);
    if (r.error.empty()) {
      out << "," << FormatNumber(m.distance_volume) << "," << FormatNumber(m.total_transaction_kwh)
          << "," << FormatNumber(m.network_charge) << "," << FormatNumber(m.transmission_loss)
          << "," << FormatNumber(m.grid_profit) << "," << FormatNumber(m.prosumer_profit) << ","
          << FormatNumber(m.social_profit) << ",";
    } else {
      std::string msg = r.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      out << ",,,,,,,," << msg;
    }
    out << "\n";
  }
  return out.str();
}

std::string SweepJson(const SweepResult& sweep) {
  Json doc;
  Json grid;
  grid["gamma_min"] = sweep.grid.gamma_min();
  grid["gamma_max"] = sweep.grid.gamma_max();
  grid["levels"] = sweep.grid.levels();
  grid["step"] = sweep.grid.step();
  doc["grid"] = grid;
  doc["best"] = OptionalLevel(sweep, sweep.best);
  doc["lower_price"] = OptionalLevel(sweep, sweep.lower_price);
  doc["upper_price"] = OptionalLevel(sweep, sweep.upper_price);
  Json levels = Json::array();
  for (const LevelRecord& r : sweep.records) {
    Json j;
    j["level"] = r.level;
    j["gamma"] = r.gamma;
    j["feasible"] = r.feasible;
    j["error"] = r.error;
    j["lower_value"] = r.lower_value;
    j["metrics"] = r.error.empty() ? MetricsJson(r.metrics) : Json(nullptr);
    levels.push_back(j);
  }
  doc["levels"] = levels;
  return doc.dump(2) + "\n";
}

std::string SweepSvg(const SweepResult& sweep) {
  constexpr double kWidth = 640, kHeight = 400, kLeft = 70, kRight = 20, kTop = 30, kBottom = 50;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  double lo = 0.0, hi = 0.0;
  for (const LevelRecord& r : sweep.records) {
    if (!r.feasible) continue;
    lo = std::min(lo, r.metrics.grid_profit);
    hi = std::max(hi, r.metrics.grid_profit);
  }
  if (hi - lo < 1e-12) hi = lo + 1.0;
  const double g0 = sweep.grid.gamma_min();
  const double g1 = sweep.grid.gamma_max() > g0 ? sweep.grid.gamma_max() : g0 + 1.0;
  auto sx = [&](double g) { return kLeft + plot_w * (g - g0) / (g1 - g0); };
  auto sy = [&](double v) { return kTop + plot_h * (hi - v) / (hi - lo); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << sy(0.0) << "\" x2=\"" << kLeft + plot_w
      << "\" y2=\"" << sy(0.0) << "\" stroke=\"#999\"/>\n";
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\""
      << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (const LevelRecord& r : sweep.records) {
    if (r.feasible) out << sx(r.gamma) << "," << sy(r.metrics.grid_profit) << " ";
  }
  out << "\"/>\n";
  for (const LevelRecord& r : sweep.records) {
    if (!r.feasible) {
      out << "<circle cx=\"" << sx(r.gamma) << "\" cy=\"" << sy(0.0)
          << "\" r=\"3\" fill=\"#d62728\"><title>infeasible</title></circle>\n";
    }
  }
  struct Marker {
    const std::optional<std::size_t>& level;
    const char* label;
    const char* color;
  };
  const Marker markers[] = {{sweep.lower_price, "gamma_L", "#2ca02c"},
                            {sweep.best, "gamma_opt", "#d62728"},
                            {sweep.upper_price, "gamma_U", "#9467bd"}};
  for (const Marker& m : markers) {
    if (!m.level) continue;
    const double x = sx(sweep.records[*m.level].gamma);
    out << "<line x1=\"" << x << "\" y1=\"" << kTop << "\" x2=\"" << x << "\" y2=\""
        << kTop + plot_h << "\" stroke=\"" << m.color << "\" stroke-dasharray=\"4,3\"/>\n";
    out << "<text x=\"" << x + 3 << "\" y=\"" << kTop - 8 << "\" fill=\"" << m.color << "\">"
        << m.label << "=" << FormatNumber(sweep.records[*m.level].gamma) << "</text>\n";
  }
  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\">network charge price</text>\n";
  out << "<text x=\"" << kLeft << "\" y=\"" << kHeight - 30 << "\">" << FormatNumber(g0)
      << "</text>\n";
  out << "<text x=\"" << kLeft + plot_w << "\" y=\"" << kHeight - 30
      << "\" text-anchor=\"end\">" << FormatNumber(g1) << "</text>\n";
  out << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + 4 << "\" text-anchor=\"end\">"
      << FormatNumber(hi) << "</text>\n";
  out << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + plot_h << "\" text-anchor=\"end\">"
      << FormatNumber(lo) << "</text>\n";
  out << "<text transform=\"translate(16," << kTop + plot_h / 2
      << ") rotate(-90)\" text-anchor=\"middle\">grid profit</text>\n";
  out << "</svg>\n";
  return out.str();
}

std::vector<std::vector<double>> TradeMatrix(const Scenario& scenario,
                                             const MarketResponse& response) {
  const std::size_t n = scenario.fleet.size();
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  const LowerLevelProgram program = BuildLowerLp(scenario.fleet, scenario.trades,
                                                 scenario.grid().distances(), response.gamma);
  if (response.primal.size() != program.lp().num_variables()) {
    throw InputError("response does not match the scenario's trade graph");
  }
  for (std::size_t t = 0; t < program.horizon(); ++t) {
    for (std::size_t k = 0; k < scenario.trades.pairs.size(); ++k) {
      const TradePair& p = scenario.trades.pairs[k];
      m[p.buyer][p.seller] += response.primal[program.trade_col(t, k)] * scenario.fleet.period_hours;
    }
  }
  return m;
}

std::string TradeMatrixSvg(const Scenario& scenario, const MarketResponse& response) {
  const auto m = TradeMatrix(scenario, response);
  const std::size_t n = m.size();
  double peak = 0.0;
  for (const auto& row : m) {
    for (double v : row) peak = std::max(peak, v);
  }
  const double cell = n > 20 ? 8.0 : 28.0;
  const double margin = 60.0;
  const double size = margin + cell * static_cast<double>(n) + 20.0;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
      << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << margin << "\" y=\"14\">energy bought (row) from seller (column), kWh; "
      << "max " << FormatNumber(peak) << "</text>\n";
  for (std::size_t i = 0; i < n; ++i) {
    if (n <= 20) {
      const std::string id = Escape(scenario.fleet.prosumers[i].id);
      out << "<text x=\"" << margin - 4 << "\" y=\"" << margin + cell * (i + 0.6)
          << "\" text-anchor=\"end\">" << id << "</text>\n";
      out << "<text x=\"" << margin + cell * (i + 0.5) << "\" y=\"" << margin - 6
          << "\" text-anchor=\"middle\">" << id << "</text>\n";
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double share = peak > 0.0 ? m[i][j] / peak : 0.0;
      const int shade = static_cast<int>(std::lround(255.0 * (1.0 - share)));
      out << "<rect x=\"" << margin + cell * j << "\" y=\"" << margin + cell * i << "\" width=\""
          << cell << "\" height=\"" << cell << "\" fill=\"rgb(" << shade << "," << shade
          << ",255)\" stroke=\"#ddd\"><title>" << FormatNumber(m[i][j]) << "</title></rect>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

std::string EquilibriumJson(const Scenario& scenario, const EquilibriumResult& result) {
  Json doc;
  doc["scenario"] = scenario.name;
  doc["level"] = result.level;
  doc["gamma"] = result.gamma;
  doc["big_m"] = result.big_m;
  doc["lower_value"] = result.solution.lower_value;
  doc["metrics"] = MetricsJson(result.solution.metrics);
  const auto trades = TradeMatrix(scenario, result.solution.response);
  doc["trade_matrix_kwh"] = trades;
  Json periods = Json::array();
  const FlowState& flow = result.solution.flow;
  for (std::size_t t = 0; t < flow.injections.size(); ++t) {
    Json p;
    p["period"] = t + 1;
    p["injections"] = flow.injections[t];
    p["flows"] = flow.flows[t];
    periods.push_back(p);
  }
  doc["periods"] = periods;
  return doc.dump(2) + "\n";
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace gridcharge
