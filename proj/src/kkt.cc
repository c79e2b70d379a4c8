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

#include "gridcharge/kkt.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "gridcharge/errors.h"

namespace gridcharge {

KktSystem AssembleKkt(const LowerLevelProgram& program) {
  const LinearProgram& lp = program.lp();
  const std::size_t n = lp.num_variables();
  const std::size_t m = lp.num_rows();
  if (program.columns().size() != n || program.rows().size() != m) {
    throw IncompleteIndexMap("index map covers " + std::to_string(program.columns().size()) +
                             " of " + std::to_string(n) + " columns and " +
                             std::to_string(program.rows().size()) + " of " +
                             std::to_string(m) + " rows");
  }
  // Each key must map back to its own position.
  for (std::size_t j = 0; j < n; ++j) {
    const ColumnKey& key = program.columns()[j];
    std::size_t back = 0;
    switch (key.kind) {
      case ColumnKind::kTrade:
        back = program.trade_col(key.period, key.index);
        break;
      case ColumnKind::kConsumption:
        back = program.consumption_col(key.period, key.index);
        break;
      case ColumnKind::kCharge:
        back = program.charge_col(key.period, key.index);
        break;
      case ColumnKind::kDischarge:
        back = program.discharge_col(key.period, key.index);
        break;
      case ColumnKind::kEnergy:
        back = program.energy_col(key.period, key.index);
        break;
      case ColumnKind::kUtility:
        back = program.utility_col(key.period, key.index);
        break;
    }
    if (back != j) throw IncompleteIndexMap("column " + std::to_string(j) + " is not mapped");
  }
  for (std::size_t i = 0; i < m; ++i) {
    const RowKey& key = program.rows()[i];
    std::size_t back = 0;
    switch (key.kind) {
      case RowKind::kBalance:
        back = program.balance_row(key.period, key.prosumer);
        break;
      case RowKind::kDynamics:
        back = program.dynamics_row(key.period, key.prosumer);
        break;
      case RowKind::kEpigraph:
        back = program.epigraph_row(key.period, key.prosumer, key.segment);
        break;
    }
    if (back != i) throw IncompleteIndexMap("row " + std::to_string(i) + " is not mapped");
  }

  KktSystem kkt;
  kkt.program = &program;
  for (std::size_t i = 0; i < m; ++i) kkt.duals.push_back({DualVariable::Kind::kRow, i});
  kkt.lower_dual.assign(n, -1);
  kkt.upper_dual.assign(n, -1);
  for (std::size_t j = 0; j < n; ++j) {
    if (std::isfinite(lp.lower()[j])) {
      kkt.lower_dual[j] = static_cast<std::ptrdiff_t>(kkt.duals.size());
      kkt.duals.push_back({DualVariable::Kind::kLower, j});
    }
    if (std::isfinite(lp.upper()[j])) {
      kkt.upper_dual[j] = static_cast<std::ptrdiff_t>(kkt.duals.size());
      kkt.duals.push_back({DualVariable::Kind::kUpper, j});
    }
  }
  kkt.stationarity.assign(n, {});
  kkt.constants.resize(n);
  for (const Triplet& t : lp.coefficients()) {
    kkt.stationarity[t.col].emplace_back(t.row, t.value);
  }
  for (std::size_t j = 0; j < n; ++j) {
    // Merge duplicate (row, column) entries.
    auto& entries = kkt.stationarity[j];
    std::sort(entries.begin(), entries.end());
    std::vector<std::pair<std::size_t, double>> merged;
    for (const auto& e : entries) {
      if (!merged.empty() && merged.back().first == e.first) {
        merged.back().second += e.second;
      } else {
        merged.push_back(e);
      }
    }
    entries = std::move(merged);
    if (kkt.lower_dual[j] >= 0) entries.emplace_back(kkt.lower_dual[j], -1.0);
    if (kkt.upper_dual[j] >= 0) entries.emplace_back(kkt.upper_dual[j], 1.0);
    kkt.constants[j] = -lp.objective()[j];
  }
  return kkt;
}

Vector CollectDuals(const KktSystem& kkt, std::span<const double> row_duals,
                    std::span<const double> reduced_costs) {
  Vector z(kkt.duals.size());
  for (std::size_t k = 0; k < kkt.duals.size(); ++k) {
    const DualVariable& d = kkt.duals[k];
    switch (d.kind) {
      case DualVariable::Kind::kRow:
        z[k] = row_duals[d.index];
        break;
      case DualVariable::Kind::kLower:
        z[k] = std::max(0.0, -reduced_costs[d.index]);
        break;
      case DualVariable::Kind::kUpper:
        z[k] = std::max(0.0, reduced_costs[d.index]);
        break;
    }
  }
  return z;
}

Vector StrongDualityCoefficients(const KktSystem& kkt) {
  const LinearProgram& lp = kkt.program->lp();
  Vector coef(kkt.duals.size());
  for (std::size_t k = 0; k < kkt.duals.size(); ++k) {
    const DualVariable& d = kkt.duals[k];
    switch (d.kind) {
      case DualVariable::Kind::kRow:
        coef[k] = -lp.rhs()[d.index];
        break;
      case DualVariable::Kind::kLower:
        coef[k] = lp.lower()[d.index];
        break;
      case DualVariable::Kind::kUpper:
        coef[k] = -lp.upper()[d.index];
        break;
    }
  }
  return coef;
}

double StrongDualityResidual(const KktSystem& kkt, std::span<const double> primal,
                             std::span<const double> duals) {
  const Vector coef = StrongDualityCoefficients(kkt);
  double residual = kkt.program->lp().Evaluate(primal);
  for (std::size_t k = 0; k < coef.size(); ++k) residual += coef[k] * duals[k];
  return residual;
}

KktResiduals EvaluateKkt(const KktSystem& kkt, std::span<const double> primal,
                         std::span<const double> duals) {
  const LinearProgram& lp = kkt.program->lp();
  KktResiduals res;
  for (std::size_t j = 0; j < kkt.stationarity.size(); ++j) {
    double v = kkt.constants[j];
    for (const auto& [k, a] : kkt.stationarity[j]) v += a * duals[k];
    res.stationarity = std::max(res.stationarity, std::abs(v));
  }
  Vector activity(lp.num_rows(), 0.0);
  for (const Triplet& t : lp.coefficients()) activity[t.row] += t.value * primal[t.col];
  for (std::size_t k = 0; k < kkt.duals.size(); ++k) {
    const DualVariable& d = kkt.duals[k];
    double slack = 0.0;
    bool sign_free = false;
    double sign = 1.0;
    switch (d.kind) {
      case DualVariable::Kind::kRow: {
        const double b = lp.rhs()[d.index];
        const RowSense sense = lp.senses()[d.index];
        slack = b - activity[d.index];
        if (sense == RowSense::kEqual) {
          sign_free = true;
          res.primal = std::max(res.primal, std::abs(slack));
        } else {
          if (sense == RowSense::kGreaterEqual) {
            slack = -slack;
            sign = -1.0;
          }
          res.primal = std::max(res.primal, std::max(0.0, -slack));
        }
        break;
      }
      case DualVariable::Kind::kLower:
        slack = primal[d.index] - lp.lower()[d.index];
        res.primal = std::max(res.primal, std::max(0.0, -slack));
        break;
      case DualVariable::Kind::kUpper:
        slack = lp.upper()[d.index] - primal[d.index];
        res.primal = std::max(res.primal, std::max(0.0, -slack));
        break;
    }
    if (sign_free) continue;
    res.dual_sign = std::max(res.dual_sign, std::max(0.0, -sign * duals[k]));
    res.complementarity = std::max(res.complementarity, std::abs(duals[k] * slack));
  }
  res.strong_duality = std::abs(StrongDualityResidual(kkt, primal, duals));
  return res;
}

}  // namespace gridcharge
