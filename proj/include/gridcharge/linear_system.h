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

#ifndef GRIDCHARGE_LINEAR_SYSTEM_H_
#define GRIDCHARGE_LINEAR_SYSTEM_H_

#include <span>
#include <vector>

#include "gridcharge/matrix.h"

namespace gridcharge {

inline constexpr double kDefaultPivotThreshold = 1e-12;

// Dense LU factorization with partial (row) pivoting, P A = L U.
class LuFactorization {
 public:
  // Throws SingularMatrix when the largest available pivot magnitude in some
  // column does not exceed `pivot_threshold`.
  explicit LuFactorization(const DenseMatrix& a,
                           double pivot_threshold = kDefaultPivotThreshold);

  std::size_t size() const { return lu_.rows(); }
  Vector Solve(std::span<const double> b) const;
  double smallest_pivot() const { return smallest_pivot_; }

 private:
  DenseMatrix lu_;
  std::vector<std::size_t> perm_;
  double smallest_pivot_ = 0.0;
};

// Solves A x = b. Postcondition: ||A x - b||_inf <= 1e-9 (1 + ||b||_inf) for
// reasonably conditioned A; one step of iterative refinement is applied.
Vector SolveLinearSystem(const DenseMatrix& a, std::span<const double> b,
                         double pivot_threshold = kDefaultPivotThreshold);

DenseMatrix Invert(const DenseMatrix& a, double pivot_threshold = kDefaultPivotThreshold);

}  // namespace gridcharge

#endif  // GRIDCHARGE_LINEAR_SYSTEM_H_
