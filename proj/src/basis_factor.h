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

#ifndef GRIDCHARGE_SRC_BASIS_FACTOR_H_
#define GRIDCHARGE_SRC_BASIS_FACTOR_H_

#include <cstddef>
#include <utility>
#include <vector>

#include "gridcharge/matrix.h"

namespace gridcharge::internal {

// Column-compressed list of basis columns, one per basis position.
struct BasisColumns {
  std::vector<std::size_t> start{0};
  std::vector<std::size_t> index;
  std::vector<double> value;

  void Clear() {
    start.assign(1, 0);
    index.clear();
    value.clear();
  }
  void Push(std::size_t row, double v) {
    index.push_back(row);
    value.push_back(v);
  }
  void EndColumn() { start.push_back(index.size()); }
};

// LU factors of a simplex basis kept in dense working storage while
// factorizing; the resulting L and U are stored sparsely. Subsequent basis
// changes are appended as product-form eta vectors.
class BasisFactor {
 public:
  // Returns the basis positions whose columns had no acceptable pivot, paired
  // with a row left uncovered. Empty means the factorization succeeded.
  std::vector<std::pair<std::size_t, std::size_t>> Factorize(
      std::size_t m, const BasisColumns& columns, double pivot_tol);

  // x: right-hand side indexed by row; on return indexed by basis position.
  void Ftran(Vector& x) const;
  // x: indexed by basis position; on return indexed by row.
  void Btran(Vector& x) const;

  // Records a pivot at basis `position`; alpha is the FTRAN of the entering
  // column (indexed by position).
  void AddEta(std::size_t position, const Vector& alpha);
  std::size_t eta_count() const { return eta_position_.size(); }

 private:
  std::size_t m_ = 0;
  std::vector<std::size_t> order_;      // step -> basis position
  std::vector<std::size_t> pivot_row_;  // step -> row
  std::vector<double> diag_;
  std::vector<std::size_t> l_start_, l_index_;
  std::vector<double> l_value_;
  std::vector<std::size_t> u_start_, u_index_;  // u_index_ holds later steps
  std::vector<double> u_value_;
  std::vector<double> work_;
  mutable Vector scratch_;

  std::vector<std::size_t> eta_position_;
  std::vector<double> eta_pivot_;
  std::vector<std::size_t> eta_start_{0}, eta_index_;
  std::vector<double> eta_value_;
};

}  // namespace gridcharge::internal

#endif  // GRIDCHARGE_SRC_BASIS_FACTOR_H_
