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

// Command-line driver: distances, price sweeps, equilibrium, market
// comparison and scenario generation.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gridcharge/backend.h"
#include "gridcharge/bilevel.h"
#include "gridcharge/errors.h"
#include "gridcharge/report.h"
#include "gridcharge/scenario.h"
#include "gridcharge/scenario_io.h"
#include "json.hpp"

namespace gridcharge {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumerical = 4;

struct RunOptions {
  std::string command;
  std::string scenario_path;
  std::optional<double> gamma_min;
  std::optional<double> gamma_max;
  std::optional<double> dgamma;
  std::optional<std::size_t> levels;
  std::optional<double> rho;
  std::uint64_t seed = 42;
  bool no_es = false;
  std::string out_dir = "gridcharge_out";
  std::vector<std::string> formats;
  std::size_t parallel = 1;
  std::string solver;
  std::string profiles;
  std::string csv_path;
  std::string template_name = "ieee9";
};

void Log(const std::string& msg) { std::fprintf(stderr, "[gridcharge] %s\n", msg.c_str()); }

std::string ResolveSolver(const RunOptions& run) {
  std::string name = run.solver;
  if (name.empty()) {
    const char* env = std::getenv("GRIDCHARGE_SOLVER");
    name = (env != nullptr && *env != '\0') ? env : "internal";
  }
  GetBackend(name);  // validates
  return name;
}

Scenario Load(const RunOptions& run) {
  Scenario s = LoadScenario(run.scenario_path);
  if (!run.profiles.empty()) {
    ApplyProfileCsv(s, run.profiles);
    s.fleet.Validate(s.num_buses);
  }
  if (run.no_es) s = WithoutStorage(s);
  Log("loaded " + run.scenario_path + ": " + std::to_string(s.num_buses) + " buses, " +
      std::to_string(s.fleet.size()) + " prosumers, horizon " + std::to_string(s.fleet.horizon));
  return s;
}

PriceGrid ResolveGrid(const RunOptions& run, const Scenario& s) {
  const double lo = run.gamma_min.value_or(s.market.gamma_min);
  const double hi = run.gamma_max.value_or(s.market.gamma_max);
  if (run.dgamma && run.levels) throw InputError("--dgamma and --levels are mutually exclusive");
  if (run.dgamma) return PriceGrid::FromStep(lo, hi, *run.dgamma);
  if (run.levels) return PriceGrid(lo, hi, *run.levels);
  if (run.gamma_min || run.gamma_max) {
    // Keep the scenario's step when only the range changes.
    if (s.market.levels > 1) {
      const double step = (s.market.gamma_max - s.market.gamma_min) /
                          static_cast<double>(s.market.levels - 1);
      return PriceGrid::FromStep(lo, hi, step);
    }
  }
  return PriceGrid(lo, hi, lo == hi ? 1 : s.market.levels);
}

bool Wants(const RunOptions& run, const std::string& format) {
  if (run.formats.empty()) return true;
  for (const std::string& f : run.formats) {
    if (f == format) return true;
  }
  return false;
}

std::string OutPath(const RunOptions& run, const std::string& file) {
  return (std::filesystem::path(run.out_dir) / file).string();
}

void PrepareOutDir(const RunOptions& run) {
  std::error_code ec;
  std::filesystem::create_directories(run.out_dir, ec);
  if (ec) throw IoError("cannot create " + run.out_dir + ": " + ec.message());
}

void WriteManifest(const RunOptions& run, const std::optional<PriceGrid>& grid, double rho,
                   const std::string& solver) {
  nlohmann::ordered_json m;
  m["command"] = run.command;
  m["scenario"] = run.scenario_path;
  if (grid) {
    m["price_grid"] = {{"gamma_min", grid->gamma_min()},
                       {"gamma_max", grid->gamma_max()},
                       {"levels", grid->levels()},
                       {"step", grid->step()}};
  } else {
    m["price_grid"] = nullptr;
  }
  m["rho"] = rho;
  m["seed"] = run.seed;
  m["no_es"] = run.no_es;
  m["profiles"] = run.profiles;
  m["output_directory"] = run.out_dir;
  m["solver"] = solver;
  m["parallel"] = run.parallel;
  m["formats"] = run.formats;
  WriteTextFile(OutPath(run, "manifest.json"), m.dump(2) + "\n");
}

SolverOptions Options(const std::string& solver) {
  SolverOptions opts;
  opts.backend = solver;
  return opts;
}

void PrintLevel(const char* label, const SweepResult& sweep,
                const std::optional<std::size_t>& level) {
  if (level) {
    std::printf("%s = %s (level %zu)\n", label, FormatNumber(sweep.records[*level].gamma).c_str(),
                *level);
  } else {
    std::printf("%s = none\n", label);
  }
}

int RunDistances(const RunOptions& run) {
  const Scenario s = Load(run);
  const DenseMatrix& d = s.grid().distances();
  std::ostringstream csv;
  csv << "bus";
  for (std::size_t j = 0; j < s.num_buses; ++j) csv << "," << j + 1;
  csv << "\n";
  for (std::size_t i = 0; i < s.num_buses; ++i) {
    std::printf("%4zu", i + 1);
    csv << i + 1;
    for (std::size_t j = 0; j < s.num_buses; ++j) {
      std::printf(" %10.6f", d(i, j));
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", d(i, j));
      csv << "," << buf;
    }
    std::printf("\n");
    csv << "\n";
  }
  if (!run.csv_path.empty()) WriteTextFile(run.csv_path, csv.str());
  return kExitOk;
}

int RunSweep(const RunOptions& run) {
  const std::string solver = ResolveSolver(run);
  const Scenario s = Load(run);
  const PriceGrid grid = ResolveGrid(run, s);
  const double rho = run.rho.value_or(s.market.rho);
  PrepareOutDir(run);
  WriteManifest(run, grid, rho, solver);
  Log("sweeping " + std::to_string(grid.levels()) + " price levels on " +
      std::to_string(run.parallel) + " worker(s)");
  const SweepResult sweep = SweepPrices(s, grid, rho, Options(solver), run.parallel);
  if (Wants(run, "csv")) WriteTextFile(OutPath(run, "sweep.csv"), SweepCsv(sweep));
  if (Wants(run, "json")) WriteTextFile(OutPath(run, "sweep.json"), SweepJson(sweep));
  if (Wants(run, "svg")) WriteTextFile(OutPath(run, "sweep.svg"), SweepSvg(sweep));
  PrintLevel("gamma_L", sweep, sweep.lower_price);
  PrintLevel("gamma_opt", sweep, sweep.best);
  PrintLevel("gamma_U", sweep, sweep.upper_price);
  for (const LevelRecord& r : sweep.records) {
    if (!r.error.empty()) {
      Log("level " + std::to_string(r.level) + " failed: " + r.error);
      return kExitNumerical;
    }
  }
  if (!sweep.best) {
    Log("no price level admits a network-feasible response");
    return kExitInfeasible;
  }
  return kExitOk;
}

int RunEquilibrium(const RunOptions& run) {
  const std::string solver = ResolveSolver(run);
  const Scenario s = Load(run);
  const PriceGrid grid = ResolveGrid(run, s);
  const double rho = run.rho.value_or(s.market.rho);
  PrepareOutDir(run);
  WriteManifest(run, grid, rho, solver);
  const EquilibriumResult eq = SolveEquilibrium(s, grid, rho, Options(solver), run.parallel);
  ConfigResult row;
  row.config = {MarketKind::kOptimalP2P, HasStorage(s.fleet)};
  row.feasible = true;
  row.gamma = eq.gamma;
  row.metrics = eq.solution.metrics;
  const std::string table = ComparisonCsv({row});
  if (Wants(run, "csv")) {
    WriteTextFile(OutPath(run, "equilibrium.csv"), table);
    WriteTextFile(OutPath(run, "sweep.csv"), SweepCsv(eq.sweep));
  }
  if (Wants(run, "json")) {
    WriteTextFile(OutPath(run, "equilibrium.json"), EquilibriumJson(s, eq));
  }
  if (Wants(run, "svg")) {
    WriteTextFile(OutPath(run, "sweep.svg"), SweepSvg(eq.sweep));
    WriteTextFile(OutPath(run, "trades.svg"), TradeMatrixSvg(s, eq.solution.response));
  }
  std::printf("gamma* = %s (level %zu of %zu)\n", FormatNumber(eq.gamma).c_str(), eq.level,
              grid.levels());
  std::printf("%s", table.c_str());
  return kExitOk;
}

int RunCompare(const RunOptions& run) {
  const std::string solver = ResolveSolver(run);
  RunOptions base_run = run;
  base_run.no_es = false;
  const Scenario s = Load(base_run);
  if (!HasStorage(s.fleet)) Log("scenario has no storage; the ES rows repeat the No ES rows");
  const PriceGrid grid = ResolveGrid(run, s);
  const double rho = run.rho.value_or(s.market.rho);
  PrepareOutDir(run);
  WriteManifest(run, grid, rho, solver);
  std::vector<ConfigResult> rows;
  for (bool storage : {false, true}) {
    for (MarketKind kind : {MarketKind::kNoP2P, MarketKind::kFreeP2P, MarketKind::kSocialP2P,
                            MarketKind::kOptimalP2P}) {
      const MarketConfig config{kind, storage};
      Log("evaluating " + config.name());
      rows.push_back(EvaluateConfig(s, config, grid, rho, Options(solver), run.parallel));
    }
  }
  const std::string table = ComparisonCsv(rows);
  if (Wants(run, "csv")) WriteTextFile(OutPath(run, "compare.csv"), table);
  if (Wants(run, "json")) WriteTextFile(OutPath(run, "compare.json"), ComparisonJson(rows));
  std::printf("%s", table.c_str());
  for (std::size_t block = 0; block < 2; ++block) {
    const ConfigResult& social = rows[block * 4 + 2];
    const ConfigResult& optimal = rows[block * 4 + 3];
    if (social.feasible && optimal.feasible && social.metrics.social_profit != 0.0) {
      const double gap = (social.metrics.social_profit - optimal.metrics.social_profit) /
                         std::abs(social.metrics.social_profit);
      std::printf("social welfare gap %s: %.2f%%\n", block == 0 ? "(No ES)" : "(ES)",
                  100.0 * gap);
    }
  }
  return kExitOk;
}

int RunGenerate(const RunOptions& run) {
  const Scenario s = GenerateScenario(run.template_name, run.seed, !run.no_es);
  const std::string text = SerializeScenario(s);
  if (run.scenario_path.empty() || run.scenario_path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
  } else {
    WriteTextFile(run.scenario_path, text);
    Log("wrote " + run.scenario_path);
  }
  return kExitOk;
}

void AddGridFlags(CLI::App* cmd, RunOptions& run) {
  cmd->add_option("scenario", run.scenario_path, "Scenario JSON file")->required();
  cmd->add_option("--gamma-min", run.gamma_min, "Lowest network charge price");
  cmd->add_option("--gamma-max", run.gamma_max, "Highest network charge price");
  cmd->add_option("--dgamma", run.dgamma, "Price step");
  cmd->add_option("--levels", run.levels, "Number of price levels");
  cmd->add_option("--rho", run.rho, "Transmission loss cost coefficient");
  cmd->add_option("--seed", run.seed, "Seed recorded in the manifest");
  cmd->add_flag("--no-es", run.no_es, "Disable energy storage");
  cmd->add_option("--out", run.out_dir, "Output directory");
  cmd->add_option("--format", run.formats, "Output formats (csv, json, svg); default all")
      ->check(CLI::IsMember({"csv", "json", "svg"}))
      ->delimiter(',');
  cmd->add_option("--parallel", run.parallel, "Worker threads for the price sweep")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--solver", run.solver, "Solver backend (default $GRIDCHARGE_SOLVER or internal)");
  cmd->add_option("--profiles", run.profiles, "Profile CSV overriding per-period values");
}

int Main(int argc, char** argv) {
  CLI::App app{"Network charge pricing for peer-to-peer energy markets"};
  app.require_subcommand(1);
  RunOptions run;

  CLI::App* distances = app.add_subcommand("distances", "Print the electrical distance matrix");
  distances->add_option("scenario", run.scenario_path, "Scenario JSON file")->required();
  distances->add_option("--csv", run.csv_path, "Also write the matrix as CSV");
  distances->add_option("--profiles", run.profiles, "Profile CSV overriding per-period values");

  CLI::App* sweep = app.add_subcommand("sweep", "Evaluate every price level");
  AddGridFlags(sweep, run);
  CLI::App* equilibrium = app.add_subcommand("equilibrium", "Solve for the optimal price");
  AddGridFlags(equilibrium, run);
  CLI::App* compare = app.add_subcommand("compare", "Compare the four market designs");
  AddGridFlags(compare, run);

  CLI::App* generate = app.add_subcommand("generate", "Write a synthetic scenario");
  generate->add_option("--template", run.template_name, "ieee9, ieee39, ieee57 or ieee118");
  generate->add_option("--seed", run.seed, "Generator seed");
  generate->add_flag("--no-es", run.no_es, "Generate without storage");
  generate->add_option("--out", run.scenario_path, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (distances->parsed()) {
      run.command = "distances";
      return RunDistances(run);
    }
    if (sweep->parsed()) {
      run.command = "sweep";
      return RunSweep(run);
    }
    if (equilibrium->parsed()) {
      run.command = "equilibrium";
      return RunEquilibrium(run);
    }
    if (compare->parsed()) {
      run.command = "compare";
      return RunCompare(run);
    }
    run.command = "generate";
    return RunGenerate(run);
  } catch (const AllLevelsInfeasible& e) {
    Log(std::string("infeasible: ") + e.what());
    return kExitInfeasible;
  } catch (const InputError& e) {
    Log(std::string("input error: ") + e.what());
    return kExitInput;
  } catch (const NumericalError& e) {
    Log(std::string("numerical breakdown: ") + e.what());
    return kExitNumerical;
  } catch (const Error& e) {
    Log(std::string("error: ") + e.what());
    return kExitNumerical;
  }
}

}  // namespace
}  // namespace gridcharge

int main(int argc, char** argv) { return gridcharge::Main(argc, argv); }
