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

#ifndef GRIDCHARGE_MATRIX_H_
#define GRIDCHARGE_MATRIX_H_

#include <cstddef>
#include <span>
#include <vector>

namespace gridcharge {

using Vector = std::vector<double>;

// Row-major dense matrix. Entries must stay finite; CheckFinite() enforces it
// at module boundaries rather than on every write.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseMatrix Identity(std::size_t n);
  static DenseMatrix FromRows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> data() const { return data_; }

  Vector Multiply(std::span<const double> x) const;
  DenseMatrix Multiply(const DenseMatrix& other) const;
  DenseMatrix Transpose() const;

  // Throws InputError naming `what` when an entry is NaN or infinite.
  void CheckFinite(const char* what) const;
  bool IsSymmetric(double tol) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

// Compressed sparse matrix holding both row-wise and column-wise views.
// Duplicate triplets are summed; explicit zeros are dropped.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> entries);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nonzeros() const { return row_values_.size(); }

  // Row r occupies [row_start(r), row_start(r + 1)) of row_cols/row_values.
  std::size_t row_start(std::size_t r) const { return row_start_[r]; }
  std::span<const std::size_t> row_cols(std::size_t r) const {
    return {row_cols_.data() + row_start_[r], row_start_[r + 1] - row_start_[r]};
  }
  std::span<const double> row_values(std::size_t r) const {
    return {row_values_.data() + row_start_[r], row_start_[r + 1] - row_start_[r]};
  }
  std::span<const std::size_t> col_rows(std::size_t c) const {
    return {col_rows_.data() + col_start_[c], col_start_[c + 1] - col_start_[c]};
  }
  std::span<const double> col_values(std::size_t c) const {
    return {col_values_.data() + col_start_[c], col_start_[c + 1] - col_start_[c]};
  }

  // y = A x
  Vector Multiply(std::span<const double> x) const;
  // y = A^T x
  Vector MultiplyTransposed(std::span<const double> x) const;
  DenseMatrix ToDense() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_start_{0};
  std::vector<std::size_t> row_cols_;
  std::vector<double> row_values_;
  std::vector<std::size_t> col_start_{0};
  std::vector<std::size_t> col_rows_;
  std::vector<double> col_values_;
};

double InfinityNorm(std::span<const double> v);

}  // namespace gridcharge

#endif  // GRIDCHARGE_MATRIX_H_
