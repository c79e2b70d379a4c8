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

#ifndef GRIDCHARGE_LINEAR_PROGRAM_H_
#define GRIDCHARGE_LINEAR_PROGRAM_H_

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gridcharge/matrix.h"

namespace gridcharge {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class RowSense { kLessEqual, kEqual, kGreaterEqual };

// maximize  c^T x + offset
// s.t.      a_i x  (<=, =, >=)  b_i
//           lower <= x <= upper   (either side may be infinite)
class LinearProgram {
 public:
  std::size_t AddVariable(double lower, double upper, double objective);
  std::size_t AddRow(RowSense sense, double rhs);
  // Accumulates into entry (row, col).
  void AddCoefficient(std::size_t row, std::size_t col, double value);

  void SetObjective(std::size_t col, double value) { objective_[col] = value; }
  void SetBounds(std::size_t col, double lower, double upper);
  void SetRow(std::size_t row, RowSense sense, double rhs);
  void set_objective_offset(double offset) { offset_ = offset; }

  std::size_t num_variables() const { return objective_.size(); }
  std::size_t num_rows() const { return rhs_.size(); }
  const Vector& objective() const { return objective_; }
  double objective_offset() const { return offset_; }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  const std::vector<RowSense>& senses() const { return senses_; }
  const Vector& rhs() const { return rhs_; }
  const std::vector<Triplet>& coefficients() const { return coefficients_; }

  SparseMatrix BuildMatrix() const;

  // Throws InputError on dimension mismatches, NaNs, or lower > upper.
  void Validate() const;

  double Evaluate(std::span<const double> x) const;

 private:
  Vector objective_;
  Vector lower_;
  Vector upper_;
  std::vector<RowSense> senses_;
  Vector rhs_;
  std::vector<Triplet> coefficients_;
  double offset_ = 0.0;
};

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded };

std::string ToString(SolveStatus status);

struct SolverOptions {
  double feas_tol = 1e-7;
  double gap_tol = 1e-6;
  double kkt_tol = 1e-7;
  double pivot_tol = 1e-12;
  // 0 selects a size-dependent cap.
  std::size_t max_iterations = 0;
  std::size_t refactor_interval = 64;
  // Value of the `solver.backend` configuration key.
  std::string backend = "internal";
};

// Scaled residuals of a primal-dual pair. Each is relative: row violations
// are divided by (1 + |b_i|), stationarity by (1 + ||c||_inf), gap and
// complementarity by (1 + |objective|).
struct Residuals {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double complementarity = 0.0;
};

// Sign convention (maximization): duals of <= rows are >= 0, of >= rows are
// <= 0. reduced_costs[j] = c_j + (Q x)_j - a_j^T y; positive values pair with
// an active upper bound, negative with an active lower bound.
struct LpSolution {
  SolveStatus status = SolveStatus::kOptimal;
  Vector primal;
  Vector duals;
  Vector reduced_costs;
  double objective = 0.0;
  double dual_objective = 0.0;
  // Infeasible: row multipliers of a Farkas certificate. Unbounded: a primal
  // ray. Empty otherwise.
  Vector certificate;
  std::size_t iterations = 0;
  Residuals residuals;
};

// Dual objective b^T y + sum_j (max(d_j,0) u_j - max(-d_j,0) l_j) + offset.
// Infinite bounds paired with a nonzero reduced cost contribute nothing; the
// dual residual reports them instead.
double DualObjective(const LinearProgram& lp, std::span<const double> duals,
                     std::span<const double> reduced_costs);

// Reduced costs c - A^T y (LP case).
Vector ReducedCosts(const LinearProgram& lp, std::span<const double> duals);

// Recomputes residuals for `solution` against `lp`. `objective` is the primal
// objective used for scaling the gap.
Residuals ComputeResiduals(const LinearProgram& lp, std::span<const double> primal,
                           std::span<const double> duals,
                           std::span<const double> reduced_costs, double objective,
                           double dual_objective);

// Supremum of y^T (s - A x) over the variable bounds and the row ranges
// s_i in {<= b_i, = b_i, >= b_i}. A negative value proves that no feasible
// point exists. Returns +inf when the supremum is unbounded. Coefficients
// below 1e-11 (1 + ||y||_inf) count as zero.
double FarkasSupremum(const LinearProgram& lp, std::span<const double> y);

// Two-phase bounded revised simplex. Optimal results satisfy the residual
// invariants at opts.feas_tol / opts.gap_tol; infeasible and unbounded
// results carry a certificate that was checked before returning.
LpSolution SolveLp(const LinearProgram& lp, const SolverOptions& opts = {});

}  // namespace gridcharge

#endif  // GRIDCHARGE_LINEAR_PROGRAM_H_
