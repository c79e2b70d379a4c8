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

#include "gridcharge/linear_program.h"

#include <algorithm>
#include <cmath>

#include "gridcharge/errors.h"

namespace gridcharge {

std::size_t LinearProgram::AddVariable(double lower, double upper, double objective) {
  objective_.push_back(objective);
  lower_.push_back(lower);
  upper_.push_back(upper);
  return objective_.size() - 1;
}

std::size_t LinearProgram::AddRow(RowSense sense, double rhs) {
  senses_.push_back(sense);
  rhs_.push_back(rhs);
  return rhs_.size() - 1;
}

void LinearProgram::AddCoefficient(std::size_t row, std::size_t col, double value) {
  if (row >= num_rows() || col >= num_variables()) {
    throw InputError("coefficient index out of range");
  }
  if (value != 0.0) coefficients_.push_back({row, col, value});
}

void LinearProgram::SetBounds(std::size_t col, double lower, double upper) {
  lower_[col] = lower;
  upper_[col] = upper;
}

void LinearProgram::SetRow(std::size_t row, RowSense sense, double rhs) {
  senses_[row] = sense;
  rhs_[row] = rhs;
}

SparseMatrix LinearProgram::BuildMatrix() const {
  return SparseMatrix(num_rows(), num_variables(), coefficients_);
}

void LinearProgram::Validate() const {
  const std::size_t n = num_variables();
  if (lower_.size() != n || upper_.size() != n) throw InputError("bound vectors mismatch");
  if (senses_.size() != rhs_.size()) throw InputError("row sense/rhs mismatch");
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(objective_[j])) throw InputError("non-finite objective coefficient");
    if (std::isnan(lower_[j]) || std::isnan(upper_[j]) || lower_[j] > upper_[j] ||
        lower_[j] == kInfinity || upper_[j] == -kInfinity) {
      throw InputError("invalid bounds on variable " + std::to_string(j));
    }
  }
  for (double b : rhs_) {
    if (!std::isfinite(b)) throw InputError("non-finite right-hand side");
  }
  for (const Triplet& t : coefficients_) {
    if (t.row >= num_rows() || t.col >= n || !std::isfinite(t.value)) {
      throw InputError("invalid constraint coefficient");
    }
  }
}

double LinearProgram::Evaluate(std::span<const double> x) const {
  double v = offset_;
  for (std::size_t j = 0; j < objective_.size(); ++j) v += objective_[j] * x[j];
  return v;
}

std::string ToString(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kUnbounded:
      return "unbounded";
  }
  return "unknown";
}

Vector ReducedCosts(const LinearProgram& lp, std::span<const double> duals) {
  Vector d = lp.objective();
  for (const Triplet& t : lp.coefficients()) d[t.col] -= t.value * duals[t.row];
  return d;
}

double DualObjective(const LinearProgram& lp, std::span<const double> duals,
                     std::span<const double> reduced_costs) {
  double v = lp.objective_offset();
  for (std::size_t i = 0; i < lp.num_rows(); ++i) v += lp.rhs()[i] * duals[i];
  for (std::size_t j = 0; j < lp.num_variables(); ++j) {
    const double d = reduced_costs[j];
    if (d > 0.0 && std::isfinite(lp.upper()[j])) v += d * lp.upper()[j];
    if (d < 0.0 && std::isfinite(lp.lower()[j])) v += d * lp.lower()[j];
  }
  return v;
}

Residuals ComputeResiduals(const LinearProgram& lp, std::span<const double> primal,
                           std::span<const double> duals,
                           std::span<const double> reduced_costs, double objective,
                           double dual_objective) {
  Residuals res;
  Vector activity(lp.num_rows(), 0.0);
  for (const Triplet& t : lp.coefficients()) activity[t.row] += t.value * primal[t.col];
  const double obj_scale = 1.0 + std::abs(objective);
  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    const double b = lp.rhs()[i];
    const double slack = b - activity[i];
    double violation = 0.0;
    double sign_violation = 0.0;
    switch (lp.senses()[i]) {
      case RowSense::kLessEqual:
        violation = std::max(0.0, -slack);
        sign_violation = std::max(0.0, -duals[i]);
        break;
      case RowSense::kGreaterEqual:
        violation = std::max(0.0, slack);
        sign_violation = std::max(0.0, duals[i]);
        break;
      case RowSense::kEqual:
        violation = std::abs(slack);
        break;
    }
    res.primal = std::max(res.primal, violation / (1.0 + std::abs(b)));
    res.dual = std::max(res.dual, sign_violation);
    if (lp.senses()[i] != RowSense::kEqual) {
      res.complementarity =
          std::max(res.complementarity, std::abs(duals[i] * slack) / obj_scale);
    }
  }
  for (std::size_t j = 0; j < lp.num_variables(); ++j) {
    const double x = primal[j];
    const double lo = lp.lower()[j];
    const double hi = lp.upper()[j];
    if (x < lo) res.primal = std::max(res.primal, (lo - x) / (1.0 + std::abs(lo)));
    if (x > hi) res.primal = std::max(res.primal, (x - hi) / (1.0 + std::abs(hi)));
    const double d = reduced_costs[j];
    if (d > 0.0) {
      if (!std::isfinite(hi)) {
        res.dual = std::max(res.dual, d);
      } else {
        res.complementarity = std::max(res.complementarity, d * std::abs(hi - x) / obj_scale);
      }
    } else if (d < 0.0) {
      if (!std::isfinite(lo)) {
        res.dual = std::max(res.dual, -d);
      } else {
        res.complementarity = std::max(res.complementarity, -d * std::abs(x - lo) / obj_scale);
      }
    }
  }
  res.dual /= 1.0 + InfinityNorm(lp.objective());
  res.gap = std::abs(objective - dual_objective) / obj_scale;
  return res;
}

double FarkasSupremum(const LinearProgram& lp, std::span<const double> y) {
  Vector d(lp.num_variables(), 0.0);
  for (const Triplet& t : lp.coefficients()) d[t.col] -= t.value * y[t.row];
  // Cancellation noise on unbounded columns would otherwise make every
  // certificate useless.
  const double noise = 1e-11 * (1.0 + InfinityNorm(y));
  double sup = 0.0;
  auto add = [&sup, noise](double coef, double lo, double hi) {
    if (std::abs(coef) <= noise) coef = 0.0;
    if (coef > 0.0) sup += coef * hi;
    if (coef < 0.0) sup += coef * lo;
  };
  for (std::size_t j = 0; j < lp.num_variables(); ++j) add(d[j], lp.lower()[j], lp.upper()[j]);
  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    const double b = lp.rhs()[i];
    switch (lp.senses()[i]) {
      case RowSense::kLessEqual:
        add(y[i], -kInfinity, b);
        break;
      case RowSense::kGreaterEqual:
        add(y[i], b, kInfinity);
        break;
      case RowSense::kEqual:
        add(y[i], b, b);
        break;
    }
  }
  return std::isnan(sup) ? kInfinity : sup;
}

}  // namespace gridcharge
