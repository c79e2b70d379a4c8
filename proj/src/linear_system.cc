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

#include "gridcharge/linear_system.h"

#include <cmath>
#include <numeric>
#include <utility>

#include "gridcharge/errors.h"

namespace gridcharge {

LuFactorization::LuFactorization(const DenseMatrix& a, double pivot_threshold)
    : lu_(a), perm_(a.rows()) {
  if (!a.square()) throw InputError("LU factorization needs a square matrix");
  a.CheckFinite("matrix");
  const std::size_t n = a.rows();
  std::iota(perm_.begin(), perm_.end(), 0);
  smallest_pivot_ = n == 0 ? 0.0 : INFINITY;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(lu_(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(lu_(i, k)) > best) {
        best = std::abs(lu_(i, k));
        p = i;
      }
    }
    if (!(best > pivot_threshold)) {
      throw SingularMatrix("pivot " + std::to_string(k) + " below threshold");
    }
    smallest_pivot_ = std::min(smallest_pivot_, best);
    if (p != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(lu_(k, c), lu_(p, c));
      std::swap(perm_[k], perm_[p]);
    }
    const double pivot = lu_(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = lu_(i, k) / pivot;
      lu_(i, k) = f;
      if (f == 0.0) continue;
      for (std::size_t c = k + 1; c < n; ++c) lu_(i, c) -= f * lu_(k, c);
    }
  }
}

Vector LuFactorization::Solve(std::span<const double> b) const {
  const std::size_t n = size();
  if (b.size() != n) throw InputError("right-hand side size mismatch");
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
  for (std::size_t i = 0; i < n; ++i) {
    double s = x[i];
    for (std::size_t c = 0; c < i; ++c) s -= lu_(i, c) * x[c];
    x[i] = s;
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= lu_(i, c) * x[c];
    x[i] = s / lu_(i, i);
  }
  return x;
}

Vector SolveLinearSystem(const DenseMatrix& a, std::span<const double> b,
                         double pivot_threshold) {
  if (!a.square() || b.size() != a.rows()) {
    throw InputError("linear system dimensions do not match");
  }
  const LuFactorization lu(a, pivot_threshold);
  Vector x = lu.Solve(b);
  Vector r = a.Multiply(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  const Vector dx = lu.Solve(r);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += dx[i];
  return x;
}

DenseMatrix Invert(const DenseMatrix& a, double pivot_threshold) {
  const LuFactorization lu(a, pivot_threshold);
  const std::size_t n = a.rows();
  DenseMatrix inv(n, n);
  Vector e(n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    e[c] = 1.0;
    const Vector col = lu.Solve(e);
    e[c] = 0.0;
    for (std::size_t r = 0; r < n; ++r) inv(r, c) = col[r];
  }
  return inv;
}

}  // namespace gridcharge
