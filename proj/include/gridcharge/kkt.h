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

#ifndef GRIDCHARGE_KKT_H_
#define GRIDCHARGE_KKT_H_

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "gridcharge/market.h"
#include "gridcharge/matrix.h"

namespace gridcharge {

// A dual variable of the prosumer LP: a row multiplier, or the multiplier of
// a finite lower/upper variable bound. All are >= 0 except multipliers of
// equality rows, which are free.
struct DualVariable {
  enum class Kind { kRow, kLower, kUpper };
  Kind kind;
  std::size_t index;  // row for kRow, column otherwise
};

// Stationarity conditions of the prosumer LP written as
//   sum_i a_ij y_i - lower_j + upper_j - c_j = 0     for every column j,
// so that the consumption row reads mu - lower + upper - sum delta * slope,
// the utility row reads -1 + sum delta, and so on.
struct KktSystem {
  const LowerLevelProgram* program = nullptr;
  std::vector<DualVariable> duals;
  // stationarity[j]: (dual position, coefficient) pairs.
  std::vector<std::vector<std::pair<std::size_t, double>>> stationarity;
  Vector constants;  // -c_j
  std::vector<std::ptrdiff_t> lower_dual;  // column -> dual position or -1
  std::vector<std::ptrdiff_t> upper_dual;

  std::size_t num_duals() const { return duals.size(); }
};

// Throws IncompleteIndexMap when the program's index map does not cover every
// column and row exactly once.
KktSystem AssembleKkt(const LowerLevelProgram& program);

// Dual vector in KktSystem order from solver row duals and reduced costs
// (upper = max(d, 0), lower = max(-d, 0)).
Vector CollectDuals(const KktSystem& kkt, std::span<const double> row_duals,
                    std::span<const double> reduced_costs);

struct KktResiduals {
  double stationarity = 0.0;  // max |row|
  double primal = 0.0;        // max row/bound violation
  double dual_sign = 0.0;     // max sign violation
  double strong_duality = 0.0;
  double complementarity = 0.0;  // max |dual * slack|
};

// Primal objective minus dual objective, i.e. the left side minus the right
// side of the strong-duality equation written with the dual terms on the
// left. Includes the initial battery energy term of the dynamics rows.
double StrongDualityResidual(const KktSystem& kkt, std::span<const double> primal,
                             std::span<const double> duals);

// Coefficient of each dual variable in StrongDualityResidual (negated
// right-hand side or bound).
Vector StrongDualityCoefficients(const KktSystem& kkt);

KktResiduals EvaluateKkt(const KktSystem& kkt, std::span<const double> primal,
                         std::span<const double> duals);

}  // namespace gridcharge

#endif  // GRIDCHARGE_KKT_H_
