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

#include "basis_factor.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gridcharge::internal {

std::vector<std::pair<std::size_t, std::size_t>> BasisFactor::Factorize(
    std::size_t m, const BasisColumns& columns, double pivot_tol) {
  m_ = m;
  eta_position_.clear();
  eta_pivot_.clear();
  eta_start_.assign(1, 0);
  eta_index_.clear();
  eta_value_.clear();

  // Order columns by their first row so that period-blocked problems stay
  // close to banded and elimination touches few entries.
  std::vector<std::size_t> first_row(m, m), count(m, 0);
  for (std::size_t p = 0; p < m; ++p) {
    for (std::size_t k = columns.start[p]; k < columns.start[p + 1]; ++k) {
      first_row[p] = std::min(first_row[p], columns.index[k]);
    }
    count[p] = columns.start[p + 1] - columns.start[p];
  }
  order_.resize(m);
  std::iota(order_.begin(), order_.end(), 0);
  std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
    return first_row[a] != first_row[b] ? first_row[a] < first_row[b] : count[a] < count[b];
  });

  work_.assign(m * m, 0.0);
  std::vector<double> col_scale(m, 0.0);
  for (std::size_t s = 0; s < m; ++s) {
    const std::size_t p = order_[s];
    double* col = work_.data() + s * m;
    for (std::size_t k = columns.start[p]; k < columns.start[p + 1]; ++k) {
      col[columns.index[k]] += columns.value[k];
      col_scale[s] = std::max(col_scale[s], std::abs(columns.value[k]));
    }
  }

  pivot_row_.assign(m, m);
  diag_.assign(m, 0.0);
  l_start_.assign(1, 0);
  l_index_.clear();
  l_value_.clear();
  std::vector<char> pivoted(m, 0);
  std::vector<std::size_t> rejected;
  std::vector<std::size_t> mult_rows;
  std::vector<double> mult_vals;
  std::vector<std::pair<std::size_t, double>> pivot_row_entries;

  for (std::size_t s = 0; s < m; ++s) {
    double* col = work_.data() + s * m;
    std::size_t r = m;
    double best = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (!pivoted[i] && std::abs(col[i]) > best) {
        best = std::abs(col[i]);
        r = i;
      }
    }
    if (r == m || best <= pivot_tol * std::max(1.0, col_scale[s])) {
      rejected.push_back(s);
      l_start_.push_back(l_index_.size());
      continue;
    }
    pivoted[r] = 1;
    pivot_row_[s] = r;
    const double pivot = col[r];
    diag_[s] = pivot;
    mult_rows.clear();
    mult_vals.clear();
    for (std::size_t i = 0; i < m; ++i) {
      if (!pivoted[i] && col[i] != 0.0) {
        mult_rows.push_back(i);
        mult_vals.push_back(col[i] / pivot);
      }
    }
    l_index_.insert(l_index_.end(), mult_rows.begin(), mult_rows.end());
    l_value_.insert(l_value_.end(), mult_vals.begin(), mult_vals.end());
    l_start_.push_back(l_index_.size());
    if (mult_rows.empty()) continue;
    pivot_row_entries.clear();
    for (std::size_t j = s + 1; j < m; ++j) {
      const double v = work_[j * m + r];
      if (v != 0.0) pivot_row_entries.emplace_back(j, v);
    }
    for (const auto& [j, v] : pivot_row_entries) {
      double* cj = work_.data() + j * m;
      for (std::size_t k = 0; k < mult_rows.size(); ++k) cj[mult_rows[k]] -= mult_vals[k] * v;
    }
  }

  if (!rejected.empty()) {
    std::vector<std::pair<std::size_t, std::size_t>> repairs;
    std::size_t next_row = 0;
    for (std::size_t s : rejected) {
      while (next_row < m && pivoted[next_row]) ++next_row;
      repairs.emplace_back(order_[s], next_row);
      ++next_row;
    }
    return repairs;
  }

  u_start_.assign(1, 0);
  u_index_.clear();
  u_value_.clear();
  for (std::size_t s = 0; s < m; ++s) {
    const std::size_t r = pivot_row_[s];
    for (std::size_t j = s + 1; j < m; ++j) {
      const double v = work_[j * m + r];
      if (v != 0.0) {
        u_index_.push_back(j);
        u_value_.push_back(v);
      }
    }
    u_start_.push_back(u_index_.size());
  }
  scratch_.assign(m, 0.0);
  return {};
}

void BasisFactor::Ftran(Vector& x) const {
  const std::size_t m = m_;
  for (std::size_t s = 0; s < m; ++s) {
    const double xr = x[pivot_row_[s]];
    if (xr == 0.0) continue;
    for (std::size_t k = l_start_[s]; k < l_start_[s + 1]; ++k) {
      x[l_index_[k]] -= l_value_[k] * xr;
    }
  }
  Vector& z = scratch_;
  for (std::size_t s = m; s-- > 0;) {
    double v = x[pivot_row_[s]];
    for (std::size_t k = u_start_[s]; k < u_start_[s + 1]; ++k) v -= u_value_[k] * z[u_index_[k]];
    z[s] = v / diag_[s];
  }
  for (std::size_t s = 0; s < m; ++s) x[order_[s]] = z[s];
  for (std::size_t e = 0; e < eta_position_.size(); ++e) {
    const std::size_t p = eta_position_[e];
    const double zp = x[p] / eta_pivot_[e];
    x[p] = zp;
    if (zp == 0.0) continue;
    for (std::size_t k = eta_start_[e]; k < eta_start_[e + 1]; ++k) {
      x[eta_index_[k]] -= eta_value_[k] * zp;
    }
  }
}

void BasisFactor::Btran(Vector& x) const {
  const std::size_t m = m_;
  for (std::size_t e = eta_position_.size(); e-- > 0;) {
    const std::size_t p = eta_position_[e];
    double v = x[p];
    for (std::size_t k = eta_start_[e]; k < eta_start_[e + 1]; ++k) {
      v -= eta_value_[k] * x[eta_index_[k]];
    }
    x[p] = v / eta_pivot_[e];
  }
  Vector& c = scratch_;
  for (std::size_t s = 0; s < m; ++s) c[s] = x[order_[s]];
  for (std::size_t s = 0; s < m; ++s) {
    const double v = c[s] / diag_[s];
    c[s] = v;
    if (v == 0.0) continue;
    for (std::size_t k = u_start_[s]; k < u_start_[s + 1]; ++k) c[u_index_[k]] -= u_value_[k] * v;
  }
  for (std::size_t s = 0; s < m; ++s) x[pivot_row_[s]] = c[s];
  for (std::size_t s = m; s-- > 0;) {
    const std::size_t r = pivot_row_[s];
    double v = x[r];
    for (std::size_t k = l_start_[s]; k < l_start_[s + 1]; ++k) v -= l_value_[k] * x[l_index_[k]];
    x[r] = v;
  }
}

void BasisFactor::AddEta(std::size_t position, const Vector& alpha) {
  eta_position_.push_back(position);
  eta_pivot_.push_back(alpha[position]);
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (i != position && alpha[i] != 0.0) {
      eta_index_.push_back(i);
      eta_value_.push_back(alpha[i]);
    }
  }
  eta_start_.push_back(eta_index_.size());
}

}  // namespace gridcharge::internal
