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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "basis_factor.h"
#include "gridcharge/errors.h"
#include "gridcharge/linear_program.h"

namespace gridcharge {
namespace {

using internal::BasisColumns;
using internal::BasisFactor;

constexpr double kHarrisTolerance = 1e-9;
constexpr double kPivotTolerance = 1e-9;
constexpr double kDegenerateStep = 1e-12;

enum class State : unsigned char { kBasic, kAtLower, kAtUpper, kFree };

// Bounded revised simplex over [A  -I  art] z = 0, where the logical s = A x
// carries the row sense as bounds and artificials cover rows whose logical
// starts outside its range.
class SimplexCore {
 public:
  SimplexCore(const LinearProgram& lp, const SolverOptions& opts)
      : lp_(lp), opts_(opts), a_(lp.BuildMatrix()), m_(lp.num_rows()), n_(lp.num_variables()) {}

  LpSolution Run();

 private:
  enum class Outcome { kOptimal, kUnbounded };

  template <typename F>
  void ForColumn(std::size_t j, F&& f) const {
    if (j < n_) {
      const auto rows = a_.col_rows(j);
      const auto vals = a_.col_values(j);
      for (std::size_t k = 0; k < rows.size(); ++k) f(rows[k], vals[k]);
    } else if (j < n_ + m_) {
      f(j - n_, -1.0);
    } else {
      const std::size_t k = j - n_ - m_;
      f(art_row_[k], art_sign_[k]);
    }
  }
  double ColumnDot(std::size_t j, const Vector& y) const {
    double v = 0.0;
    ForColumn(j, [&](std::size_t i, double a) { v += a * y[i]; });
    return v;
  }

  void Initialize();
  void Refactor();
  void RecomputeBasics();
  void ComputeDuals(const Vector& cost, Vector& y) const;
  Outcome Iterate(const Vector& cost);
  void MakeNonbasic(std::size_t j);
  Vector StructuralRay() const;
  bool VerifyRay(const Vector& ray) const;

  const LinearProgram& lp_;
  const SolverOptions& opts_;
  SparseMatrix a_;
  std::size_t m_;
  std::size_t n_;
  std::size_t total_ = 0;
  std::vector<std::size_t> art_row_;
  std::vector<double> art_sign_;
  Vector lo_, hi_, x_;
  std::vector<State> state_;
  std::vector<std::size_t> basis_;
  std::vector<std::ptrdiff_t> position_;
  BasisFactor factor_;
  BasisColumns columns_;
  std::size_t iterations_ = 0;
  std::size_t max_iterations_ = 0;
  std::size_t degenerate_run_ = 0;
  bool bland_ = false;
  bool stale_ = true;
  Vector alpha_;
  std::size_t ray_column_ = 0;
  int ray_direction_ = 0;
};

void SimplexCore::Initialize() {
  const Vector& lower = lp_.lower();
  const Vector& upper = lp_.upper();
  lo_.assign(n_ + m_, 0.0);
  hi_.assign(n_ + m_, 0.0);
  x_.assign(n_ + m_, 0.0);
  state_.assign(n_ + m_, State::kAtLower);
  for (std::size_t j = 0; j < n_; ++j) {
    lo_[j] = lower[j];
    hi_[j] = upper[j];
    if (std::isfinite(lower[j])) {
      x_[j] = lower[j];
    } else if (std::isfinite(upper[j])) {
      x_[j] = upper[j];
      state_[j] = State::kAtUpper;
    } else {
      state_[j] = State::kFree;
    }
  }
  Vector activity(m_, 0.0);
  for (std::size_t j = 0; j < n_; ++j) {
    if (x_[j] == 0.0) continue;
    ForColumn(j, [&](std::size_t i, double a) { activity[i] += a * x_[j]; });
  }
  basis_.assign(m_, 0);
  for (std::size_t i = 0; i < m_; ++i) {
    const std::size_t s = n_ + i;
    const double b = lp_.rhs()[i];
    switch (lp_.senses()[i]) {
      case RowSense::kLessEqual:
        lo_[s] = -kInfinity;
        hi_[s] = b;
        break;
      case RowSense::kGreaterEqual:
        lo_[s] = b;
        hi_[s] = kInfinity;
        break;
      case RowSense::kEqual:
        lo_[s] = b;
        hi_[s] = b;
        break;
    }
    const double r = activity[i];
    if (r >= lo_[s] && r <= hi_[s]) {
      x_[s] = r;
      state_[s] = State::kBasic;
      basis_[i] = s;
      continue;
    }
    const bool below = r < lo_[s];
    const double v = below ? lo_[s] : hi_[s];
    x_[s] = v;
    state_[s] = below ? State::kAtLower : State::kAtUpper;
    // A x - s + sign * art = 0 with art = |v - r| >= 0.
    art_row_.push_back(i);
    art_sign_.push_back(v > r ? 1.0 : -1.0);
    const std::size_t art = n_ + m_ + art_row_.size() - 1;
    lo_.push_back(0.0);
    hi_.push_back(kInfinity);
    x_.push_back(std::abs(v - r));
    state_.push_back(State::kBasic);
    basis_[i] = art;
  }
  total_ = x_.size();
  position_.assign(total_, -1);
  for (std::size_t p = 0; p < m_; ++p) position_[basis_[p]] = static_cast<std::ptrdiff_t>(p);
  max_iterations_ = opts_.max_iterations != 0 ? opts_.max_iterations
                                              : std::max<std::size_t>(20000, 50 * (m_ + n_));
}

void SimplexCore::MakeNonbasic(std::size_t j) {
  position_[j] = -1;
  const bool has_lo = std::isfinite(lo_[j]);
  const bool has_hi = std::isfinite(hi_[j]);
  if (has_lo && (!has_hi || x_[j] - lo_[j] <= hi_[j] - x_[j])) {
    x_[j] = lo_[j];
    state_[j] = State::kAtLower;
  } else if (has_hi) {
    x_[j] = hi_[j];
    state_[j] = State::kAtUpper;
  } else {
    state_[j] = State::kFree;
  }
}

void SimplexCore::Refactor() {
  for (int attempt = 0;; ++attempt) {
    columns_.Clear();
    for (std::size_t p = 0; p < m_; ++p) {
      ForColumn(basis_[p], [&](std::size_t i, double a) { columns_.Push(i, a); });
      columns_.EndColumn();
    }
    const auto repairs = factor_.Factorize(m_, columns_, opts_.pivot_tol);
    if (repairs.empty()) break;
    if (attempt > 2) throw NumericalBreakdown("simplex basis could not be repaired");
    for (const auto& [p, row] : repairs) {
      MakeNonbasic(basis_[p]);
      const std::size_t logical = n_ + row;
      basis_[p] = logical;
      position_[logical] = static_cast<std::ptrdiff_t>(p);
      state_[logical] = State::kBasic;
    }
  }
  stale_ = true;
}

void SimplexCore::RecomputeBasics() {
  Vector rhs(m_, 0.0);
  for (std::size_t j = 0; j < total_; ++j) {
    if (state_[j] == State::kBasic || x_[j] == 0.0) continue;
    ForColumn(j, [&](std::size_t i, double a) { rhs[i] -= a * x_[j]; });
  }
  factor_.Ftran(rhs);
  for (std::size_t p = 0; p < m_; ++p) x_[basis_[p]] = rhs[p];
  stale_ = false;
}

void SimplexCore::ComputeDuals(const Vector& cost, Vector& y) const {
  y.assign(m_, 0.0);
  for (std::size_t p = 0; p < m_; ++p) y[p] = cost[basis_[p]];
  factor_.Btran(y);
}

SimplexCore::Outcome SimplexCore::Iterate(const Vector& cost) {
  const double dual_tol = 1e-9 * (1.0 + InfinityNorm(cost));
  Vector y;
  alpha_.assign(m_, 0.0);
  while (true) {
    if (factor_.eta_count() >= opts_.refactor_interval) {
      Refactor();
      RecomputeBasics();
    }
    ComputeDuals(cost, y);

    std::size_t entering = total_;
    int direction = 0;
    double best = 0.0;
    for (std::size_t j = 0; j < total_; ++j) {
      const State st = state_[j];
      if (st == State::kBasic || lo_[j] == hi_[j]) continue;
      const double d = cost[j] - ColumnDot(j, y);
      double score = 0.0;
      int dir = 0;
      if (d > dual_tol && st != State::kAtUpper) {
        score = d;
        dir = 1;
      } else if (d < -dual_tol && st != State::kAtLower) {
        score = -d;
        dir = -1;
      }
      if (dir == 0) continue;
      if (bland_) {
        entering = j;
        direction = dir;
        break;
      }
      if (score > best) {
        best = score;
        entering = j;
        direction = dir;
      }
    }
    if (entering == total_) {
      if (factor_.eta_count() > 0 || stale_) {
        Refactor();
        RecomputeBasics();
        if (factor_.eta_count() == 0) {
          // Re-price once with the fresh factors before declaring optimality.
          ComputeDuals(cost, y);
          bool improvable = false;
          for (std::size_t j = 0; j < total_ && !improvable; ++j) {
            if (state_[j] == State::kBasic || lo_[j] == hi_[j]) continue;
            const double d = cost[j] - ColumnDot(j, y);
            improvable = (d > dual_tol && state_[j] != State::kAtUpper) ||
                         (d < -dual_tol && state_[j] != State::kAtLower);
          }
          if (improvable) continue;
        }
      }
      return Outcome::kOptimal;
    }

    if (++iterations_ > max_iterations_) {
      throw NumericalBreakdown("simplex iteration limit reached (" +
                               std::to_string(max_iterations_) + ")");
    }

    std::fill(alpha_.begin(), alpha_.end(), 0.0);
    ForColumn(entering, [&](std::size_t i, double a) { alpha_[i] += a; });
    factor_.Ftran(alpha_);

    // Basic p moves at rate g_p = -direction * alpha_p per unit step.
    double theta_max = kInfinity;
    const double harris = bland_ ? 0.0 : kHarrisTolerance;
    for (std::size_t p = 0; p < m_; ++p) {
      if (std::abs(alpha_[p]) <= kPivotTolerance) continue;
      const std::size_t j = basis_[p];
      const double g = -direction * alpha_[p];
      if (g < 0.0 && std::isfinite(lo_[j])) {
        theta_max = std::min(theta_max, (x_[j] - lo_[j] + harris) / -g);
      } else if (g > 0.0 && std::isfinite(hi_[j])) {
        theta_max = std::min(theta_max, (hi_[j] - x_[j] + harris) / g);
      }
    }
    const double flip = hi_[entering] - lo_[entering];
    if (!std::isfinite(theta_max) && !std::isfinite(flip)) {
      if (stale_ || factor_.eta_count() > 0) {
        Refactor();
        RecomputeBasics();
        --iterations_;
        continue;
      }
      ray_column_ = entering;
      ray_direction_ = direction;
      return Outcome::kUnbounded;
    }

    double step = 0.0;
    std::size_t leave = m_;
    if (flip <= theta_max) {
      step = flip;
    } else {
      double best_alpha = 0.0;
      double best_ratio = kInfinity;
      for (std::size_t p = 0; p < m_; ++p) {
        if (std::abs(alpha_[p]) <= kPivotTolerance) continue;
        const std::size_t j = basis_[p];
        const double g = -direction * alpha_[p];
        double ratio;
        if (g < 0.0 && std::isfinite(lo_[j])) {
          ratio = std::max(0.0, (x_[j] - lo_[j]) / -g);
        } else if (g > 0.0 && std::isfinite(hi_[j])) {
          ratio = std::max(0.0, (hi_[j] - x_[j]) / g);
        } else {
          continue;
        }
        if (bland_) {
          if (ratio < best_ratio - 1e-12 ||
              (ratio <= best_ratio + 1e-12 && leave < m_ && j < basis_[leave])) {
            best_ratio = std::min(ratio, best_ratio);
            leave = p;
          }
        } else if (ratio <= theta_max && std::abs(alpha_[p]) > best_alpha) {
          best_alpha = std::abs(alpha_[p]);
          best_ratio = ratio;
          leave = p;
        }
      }
      if (leave == m_) throw NumericalBreakdown("simplex ratio test found no pivot");
      step = best_ratio;
    }

    for (std::size_t p = 0; p < m_; ++p) {
      if (alpha_[p] != 0.0) x_[basis_[p]] -= step * direction * alpha_[p];
    }
    x_[entering] += step * direction;
    stale_ = true;
    if (leave == m_) {
      const bool up = direction > 0;
      x_[entering] = up ? hi_[entering] : lo_[entering];
      state_[entering] = up ? State::kAtUpper : State::kAtLower;
    } else {
      const std::size_t leaving = basis_[leave];
      const bool to_lower = -direction * alpha_[leave] < 0.0;
      x_[leaving] = to_lower ? lo_[leaving] : hi_[leaving];
      state_[leaving] = to_lower ? State::kAtLower : State::kAtUpper;
      position_[leaving] = -1;
      basis_[leave] = entering;
      position_[entering] = static_cast<std::ptrdiff_t>(leave);
      state_[entering] = State::kBasic;
      factor_.AddEta(leave, alpha_);
    }
    if (step <= kDegenerateStep) {
      if (++degenerate_run_ > 5 * (m_ + n_)) bland_ = true;
    } else {
      degenerate_run_ = 0;
    }
  }
}

Vector SimplexCore::StructuralRay() const {
  Vector ray(n_, 0.0);
  if (ray_column_ < n_) ray[ray_column_] = ray_direction_;
  for (std::size_t p = 0; p < m_; ++p) {
    if (basis_[p] < n_) ray[basis_[p]] = -ray_direction_ * alpha_[p];
  }
  const double scale = InfinityNorm(ray);
  if (scale > 0.0) {
    for (double& r : ray) r /= scale;
  }
  return ray;
}

bool SimplexCore::VerifyRay(const Vector& ray) const {
  constexpr double kTol = 1e-9;
  double gain = 0.0;
  for (std::size_t j = 0; j < n_; ++j) {
    gain += lp_.objective()[j] * ray[j];
    if (ray[j] > kTol && std::isfinite(lp_.upper()[j])) return false;
    if (ray[j] < -kTol && std::isfinite(lp_.lower()[j])) return false;
  }
  if (gain <= kTol) return false;
  const Vector ar = a_.Multiply(ray);
  for (std::size_t i = 0; i < m_; ++i) {
    switch (lp_.senses()[i]) {
      case RowSense::kLessEqual:
        if (ar[i] > kTol) return false;
        break;
      case RowSense::kGreaterEqual:
        if (ar[i] < -kTol) return false;
        break;
      case RowSense::kEqual:
        if (std::abs(ar[i]) > kTol) return false;
        break;
    }
  }
  return true;
}

LpSolution SimplexCore::Run() {
  LpSolution sol;
  Initialize();
  Refactor();
  RecomputeBasics();

  if (!art_row_.empty()) {
    Vector phase1(total_, 0.0);
    for (std::size_t k = 0; k < art_row_.size(); ++k) phase1[n_ + m_ + k] = -1.0;
    if (Iterate(phase1) != Outcome::kOptimal) {
      throw NumericalBreakdown("simplex phase 1 reported an unbounded direction");
    }
    double infeasibility = 0.0;
    for (std::size_t k = 0; k < art_row_.size(); ++k) {
      const double b = lp_.rhs()[art_row_[k]];
      infeasibility = std::max(infeasibility, x_[n_ + m_ + k] / (1.0 + std::abs(b)));
    }
    if (infeasibility > opts_.feas_tol) {
      Vector y;
      ComputeDuals(phase1, y);
      if (!(FarkasSupremum(lp_, y) < 0.0)) {
        throw NumericalBreakdown("simplex infeasibility certificate failed verification");
      }
      sol.status = SolveStatus::kInfeasible;
      sol.certificate = std::move(y);
      sol.iterations = iterations_;
      return sol;
    }
    for (std::size_t k = 0; k < art_row_.size(); ++k) {
      const std::size_t j = n_ + m_ + k;
      hi_[j] = 0.0;
      if (state_[j] != State::kBasic) x_[j] = 0.0;
    }
    degenerate_run_ = 0;
    bland_ = false;
  }

  Vector cost(total_, 0.0);
  std::copy(lp_.objective().begin(), lp_.objective().end(), cost.begin());
  if (Iterate(cost) == Outcome::kUnbounded) {
    Vector ray = StructuralRay();
    if (!VerifyRay(ray)) throw NumericalBreakdown("simplex unbounded ray failed verification");
    sol.status = SolveStatus::kUnbounded;
    sol.certificate = std::move(ray);
    sol.iterations = iterations_;
    return sol;
  }

  sol.status = SolveStatus::kOptimal;
  sol.primal.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
  ComputeDuals(cost, sol.duals);
  sol.iterations = iterations_;
  return sol;
}

struct Component {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
};

std::size_t FindRoot(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

void Finalize(const LinearProgram& lp, const SolverOptions& opts, LpSolution& sol) {
  sol.reduced_costs = ReducedCosts(lp, sol.duals);
  sol.objective = lp.Evaluate(sol.primal);
  sol.dual_objective = DualObjective(lp, sol.duals, sol.reduced_costs);
  sol.residuals = ComputeResiduals(lp, sol.primal, sol.duals, sol.reduced_costs,
                                   sol.objective, sol.dual_objective);
  const Residuals& r = sol.residuals;
  if (r.primal > opts.feas_tol || r.dual > opts.kkt_tol || r.gap > opts.gap_tol) {
    throw NumericalBreakdown("simplex result failed residual checks (primal " +
                             std::to_string(r.primal) + ", dual " + std::to_string(r.dual) +
                             ", gap " + std::to_string(r.gap) + ")");
  }
}

}  // namespace

LpSolution SolveLp(const LinearProgram& lp, const SolverOptions& opts) {
  lp.Validate();
  const std::size_t m = lp.num_rows();
  const std::size_t n = lp.num_variables();
  const SparseMatrix a = lp.BuildMatrix();

  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t j = 0; j < n; ++j) {
    const auto rows = a.col_rows(j);
    for (std::size_t k = 1; k < rows.size(); ++k) {
      const std::size_t r0 = FindRoot(parent, rows[0]);
      const std::size_t r1 = FindRoot(parent, rows[k]);
      if (r0 != r1) parent[r1] = r0;
    }
  }
  std::vector<std::ptrdiff_t> component_of(m, -1);
  std::vector<Component> components;
  std::vector<std::size_t> row_cols(m, 0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t r : a.col_rows(j)) ++row_cols[r];
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (row_cols[i] == 0) continue;
    const std::size_t root = FindRoot(parent, i);
    if (component_of[root] < 0) {
      component_of[root] = static_cast<std::ptrdiff_t>(components.size());
      components.emplace_back();
    }
    components[component_of[root]].rows.push_back(i);
  }
  for (std::size_t j = 0; j < n; ++j) {
    const auto rows = a.col_rows(j);
    if (rows.empty()) continue;
    components[component_of[FindRoot(parent, rows[0])]].cols.push_back(j);
  }

  LpSolution sol;
  sol.primal.assign(n, 0.0);
  sol.duals.assign(m, 0.0);

  // Rows without variables are either trivially satisfied or infeasible.
  for (std::size_t i = 0; i < m; ++i) {
    if (row_cols[i] != 0) continue;
    const double b = lp.rhs()[i];
    const RowSense sense = lp.senses()[i];
    const bool ok = (sense == RowSense::kLessEqual && b >= 0.0) ||
                    (sense == RowSense::kGreaterEqual && b <= 0.0) ||
                    (sense == RowSense::kEqual && b == 0.0);
    if (!ok) {
      LpSolution bad;
      bad.status = SolveStatus::kInfeasible;
      bad.certificate.assign(m, 0.0);
      bad.certificate[i] = b < 0.0 ? 1.0 : -1.0;
      return bad;
    }
  }

  Vector ray;
  for (std::size_t j = 0; j < n; ++j) {
    if (!a.col_rows(j).empty()) continue;
    const double c = lp.objective()[j];
    const double lo = lp.lower()[j];
    const double hi = lp.upper()[j];
    if ((c > 0.0 && !std::isfinite(hi)) || (c < 0.0 && !std::isfinite(lo))) {
      if (ray.empty()) {
        ray.assign(n, 0.0);
        ray[j] = c > 0.0 ? 1.0 : -1.0;
      }
      continue;
    }
    if (c > 0.0) {
      sol.primal[j] = hi;
    } else if (c < 0.0) {
      sol.primal[j] = lo;
    } else {
      sol.primal[j] = std::isfinite(lo) ? lo : (std::isfinite(hi) ? hi : 0.0);
    }
  }

  for (const Component& comp : components) {
    LinearProgram sub;
    std::vector<std::size_t> local_row(m, 0);
    for (std::size_t k = 0; k < comp.rows.size(); ++k) {
      local_row[comp.rows[k]] = k;
      sub.AddRow(lp.senses()[comp.rows[k]], lp.rhs()[comp.rows[k]]);
    }
    for (std::size_t j : comp.cols) {
      const std::size_t lj = sub.AddVariable(lp.lower()[j], lp.upper()[j], lp.objective()[j]);
      const auto rows = a.col_rows(j);
      const auto vals = a.col_values(j);
      for (std::size_t k = 0; k < rows.size(); ++k) {
        sub.AddCoefficient(local_row[rows[k]], lj, vals[k]);
      }
    }
    SimplexCore core(sub, opts);
    LpSolution part = core.Run();
    sol.iterations += part.iterations;
    if (part.status == SolveStatus::kInfeasible) {
      LpSolution bad;
      bad.status = SolveStatus::kInfeasible;
      bad.certificate.assign(m, 0.0);
      for (std::size_t k = 0; k < comp.rows.size(); ++k) {
        bad.certificate[comp.rows[k]] = part.certificate[k];
      }
      bad.iterations = sol.iterations;
      return bad;
    }
    if (part.status == SolveStatus::kUnbounded) {
      if (ray.empty()) {
        ray.assign(n, 0.0);
        for (std::size_t k = 0; k < comp.cols.size(); ++k) ray[comp.cols[k]] = part.certificate[k];
      }
      continue;
    }
    for (std::size_t k = 0; k < comp.cols.size(); ++k) sol.primal[comp.cols[k]] = part.primal[k];
    for (std::size_t k = 0; k < comp.rows.size(); ++k) sol.duals[comp.rows[k]] = part.duals[k];
  }

  if (!ray.empty()) {
    LpSolution unbounded;
    unbounded.status = SolveStatus::kUnbounded;
    unbounded.certificate = std::move(ray);
    unbounded.iterations = sol.iterations;
    return unbounded;
  }
  sol.status = SolveStatus::kOptimal;
  Finalize(lp, opts, sol);
  return sol;
}

}  // namespace gridcharge
