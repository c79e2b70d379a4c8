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

#include "gridcharge/matrix.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "gridcharge/errors.h"

namespace gridcharge {

DenseMatrix DenseMatrix::Identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::FromRows(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  DenseMatrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw InputError("ragged matrix rows");
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

Vector DenseMatrix::Multiply(std::span<const double> x) const {
  if (x.size() != cols_) throw InputError("matrix-vector size mismatch");
  Vector y(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    const double* a = data_.data() + r * cols_;
    double sum = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) sum += a[c] * x[c];
    y[r] = sum;
  }
  return y;
}

DenseMatrix DenseMatrix::Multiply(const DenseMatrix& other) const {
  if (other.rows_ != cols_) throw InputError("matrix-matrix size mismatch");
  DenseMatrix out(rows_, other.cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = 0; k < cols_; ++k) {
      const double a = (*this)(r, k);
      if (a == 0.0) continue;
      for (std::size_t c = 0; c < other.cols_; ++c) out(r, c) += a * other(k, c);
    }
  }
  return out;
}

DenseMatrix DenseMatrix::Transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

void DenseMatrix::CheckFinite(const char* what) const {
  for (double v : data_) {
    if (!std::isfinite(v)) throw InputError(std::string(what) + " has a non-finite entry");
  }
}

bool DenseMatrix::IsSymmetric(double tol) const {
  if (!square()) return false;
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = r + 1; c < cols_; ++c) {
      if (std::abs((*this)(r, c) - (*this)(c, r)) > tol) return false;
    }
  }
  return true;
}

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols,
                           std::vector<Triplet> entries)
    : rows_(rows), cols_(cols) {
  for (const Triplet& t : entries) {
    if (t.row >= rows || t.col >= cols) throw InputError("sparse entry out of range");
    if (!std::isfinite(t.value)) throw InputError("sparse entry is not finite");
  }
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  // Merge duplicates.
  std::vector<Triplet> merged;
  merged.reserve(entries.size());
  for (const Triplet& t : entries) {
    if (!merged.empty() && merged.back().row == t.row && merged.back().col == t.col) {
      merged.back().value += t.value;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const Triplet& t) { return t.value == 0.0; });

  row_start_.assign(rows + 1, 0);
  col_start_.assign(cols + 1, 0);
  for (const Triplet& t : merged) {
    ++row_start_[t.row + 1];
    ++col_start_[t.col + 1];
  }
  for (std::size_t r = 0; r < rows; ++r) row_start_[r + 1] += row_start_[r];
  for (std::size_t c = 0; c < cols; ++c) col_start_[c + 1] += col_start_[c];
  row_cols_.resize(merged.size());
  row_values_.resize(merged.size());
  col_rows_.resize(merged.size());
  col_values_.resize(merged.size());
  std::vector<std::size_t> col_fill(col_start_.begin(), col_start_.end() - 1);
  for (std::size_t k = 0; k < merged.size(); ++k) {
    row_cols_[k] = merged[k].col;
    row_values_[k] = merged[k].value;
    const std::size_t slot = col_fill[merged[k].col]++;
    col_rows_[slot] = merged[k].row;
    col_values_[slot] = merged[k].value;
  }
}

Vector SparseMatrix::Multiply(std::span<const double> x) const {
  Vector y(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    double sum = 0.0;
    for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) {
      sum += row_values_[k] * x[row_cols_[k]];
    }
    y[r] = sum;
  }
  return y;
}

Vector SparseMatrix::MultiplyTransposed(std::span<const double> x) const {
  Vector y(cols_, 0.0);
  for (std::size_t c = 0; c < cols_; ++c) {
    double sum = 0.0;
    for (std::size_t k = col_start_[c]; k < col_start_[c + 1]; ++k) {
      sum += col_values_[k] * x[col_rows_[k]];
    }
    y[c] = sum;
  }
  return y;
}

DenseMatrix SparseMatrix::ToDense() const {
  DenseMatrix d(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) {
      d(r, row_cols_[k]) = row_values_[k];
    }
  }
  return d;
}

double InfinityNorm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace gridcharge
