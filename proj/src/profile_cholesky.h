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

#ifndef GRIDCHARGE_SRC_PROFILE_CHOLESKY_H_
#define GRIDCHARGE_SRC_PROFILE_CHOLESKY_H_

#include <cstddef>
#include <vector>

#include "gridcharge/matrix.h"

namespace gridcharge::internal {

// Reverse Cuthill-McKee ordering of a symmetric pattern given as adjacency
// lists (no self loops needed). Nodes with degree above `dense_degree` are
// left out of the search and appended at the end. Returns order[k] = node.
std::vector<std::size_t> ReverseCuthillMcKee(
    const std::vector<std::vector<std::size_t>>& adjacency, std::size_t dense_degree);

// Envelope (skyline) Cholesky factorization of a symmetric positive
// semidefinite matrix with a fixed sparsity pattern. Pivots that collapse to
// roughly zero are replaced by a huge value, which drives the matching
// solution component to zero instead of failing.
class ProfileCholesky {
 public:
  // Symbolic phase: computes the ordering and envelope.
  void Analyze(const std::vector<std::vector<std::size_t>>& adjacency);

  std::size_t size() const { return order_.size(); }
  void ClearValues();
  // Adds v to entry (i, j) and (j, i); indices are original node numbers.
  // Entries outside the analyzed pattern are rejected.
  void Add(std::size_t i, std::size_t j, double v);
  void AddDiagonal(std::size_t i, double v) { Add(i, i, v); }

  // Returns the number of pivots that were replaced.
  std::size_t Factor();
  // In-place solve, original indexing.
  void Solve(Vector& b) const;

 private:
  double& At(std::size_t pi, std::size_t pj) { return values_[row_ptr_[pi] + pj - first_[pi]]; }

  std::vector<std::size_t> order_;  // position -> node
  std::vector<std::size_t> where_;  // node -> position
  std::vector<std::size_t> first_;
  std::vector<std::size_t> row_ptr_;
  std::vector<double> values_;
  mutable Vector work_;
};

}  // namespace gridcharge::internal

#endif  // GRIDCHARGE_SRC_PROFILE_CHOLESKY_H_
