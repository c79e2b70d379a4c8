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

#ifndef GRIDCHARGE_QUADRATIC_PROGRAM_H_
#define GRIDCHARGE_QUADRATIC_PROGRAM_H_

#include <cstddef>
#include <span>
#include <vector>

#include "gridcharge/linear_program.h"
#include "gridcharge/matrix.h"

namespace gridcharge {

// maximize  c^T x + 1/2 x^T Q x + offset   with Q symmetric negative
// semidefinite, subject to the constraints of `linear()`.
class QuadraticProgram {
 public:
  LinearProgram& linear() { return lp_; }
  const LinearProgram& linear() const { return lp_; }

  // Adds v to Q(i, j) and, when i != j, also to Q(j, i).
  void AddQuadratic(std::size_t i, std::size_t j, double v);
  // Full symmetric entry list (both triangles).
  const std::vector<Triplet>& quadratic() const { return quadratic_; }
  bool diagonal() const;

  Vector QuadraticProduct(std::span<const double> x) const;
  double Evaluate(std::span<const double> x) const;

 private:
  LinearProgram lp_;
  std::vector<Triplet> quadratic_;
};

using QpSolution = LpSolution;

// Primal-dual interior point method (Mehrotra predictor-corrector).
// Optimal results satisfy the same residual invariants as SolveLp; the
// reduced costs include the Q x term. Infeasible problems are confirmed by a
// simplex phase-1 run and carry its Farkas certificate. Throws InputError
// when Q is not negative semidefinite and NumericalBreakdown when the
// iteration fails to converge on a feasible problem.
QpSolution SolveQp(const QuadraticProgram& qp, const SolverOptions& opts = {});

}  // namespace gridcharge

#endif  // GRIDCHARGE_QUADRATIC_PROGRAM_H_
