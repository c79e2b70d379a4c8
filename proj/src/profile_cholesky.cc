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

#include "profile_cholesky.h"

#include <algorithm>
#include <cmath>
#include <deque>

#include "gridcharge/errors.h"

namespace gridcharge::internal {
namespace {

// Breadth-first levels from `start`, restricted to nodes with active[v].
// Returns the visit order and the last node of the deepest level.
std::vector<std::size_t> Bfs(const std::vector<std::vector<std::size_t>>& adj,
                             const std::vector<char>& active, std::size_t start,
                             std::vector<char>& seen, std::size_t& deepest, std::size_t& depth) {
  std::vector<std::size_t> visit{start};
  std::vector<std::size_t> level{0};
  seen[start] = 1;
  for (std::size_t k = 0; k < visit.size(); ++k) {
    const std::size_t v = visit[k];
    std::vector<std::size_t> next;
    for (std::size_t w : adj[v]) {
      if (active[w] && !seen[w]) {
        seen[w] = 1;
        next.push_back(w);
      }
    }
    std::sort(next.begin(), next.end(),
              [&](std::size_t a, std::size_t b) { return adj[a].size() < adj[b].size(); });
    for (std::size_t w : next) {
      visit.push_back(w);
      level.push_back(level[k] + 1);
    }
  }
  depth = level.back();
  deepest = visit.back();
  // Prefer the minimum-degree node of the last level as the next start.
  for (std::size_t k = visit.size(); k-- > 0 && level[k] == depth;) {
    if (adj[visit[k]].size() < adj[deepest].size()) deepest = visit[k];
  }
  return visit;
}

}  // namespace

std::vector<std::size_t> ReverseCuthillMcKee(
    const std::vector<std::vector<std::size_t>>& adjacency, std::size_t dense_degree) {
  const std::size_t n = adjacency.size();
  std::vector<char> active(n, 1);
  std::vector<std::size_t> dense;
  for (std::size_t v = 0; v < n; ++v) {
    if (adjacency[v].size() > dense_degree) {
      active[v] = 0;
      dense.push_back(v);
    }
  }
  std::vector<char> placed(n, 0);
  std::vector<std::size_t> order;
  order.reserve(n);
  while (true) {
    std::size_t start = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (active[v] && !placed[v] &&
          (start == n || adjacency[v].size() < adjacency[start].size())) {
        start = v;
      }
    }
    if (start == n) break;
    // A few sweeps towards a pseudo-peripheral node.
    std::size_t depth = 0;
    for (int sweep = 0; sweep < 4; ++sweep) {
      std::vector<char> seen = placed;
      std::size_t deepest = start, new_depth = 0;
      Bfs(adjacency, active, start, seen, deepest, new_depth);
      if (sweep > 0 && new_depth <= depth) break;
      depth = new_depth;
      start = deepest;
    }
    std::size_t unused_node = 0, unused_depth = 0;
    const auto visit = Bfs(adjacency, active, start, placed, unused_node, unused_depth);
    order.insert(order.end(), visit.rbegin(), visit.rend());
  }
  order.insert(order.end(), dense.begin(), dense.end());
  return order;
}

void ProfileCholesky::Analyze(const std::vector<std::vector<std::size_t>>& adjacency) {
  const std::size_t n = adjacency.size();
  std::size_t total = 0;
  for (const auto& a : adjacency) total += a.size();
  const std::size_t average = n == 0 ? 0 : total / n;
  order_ = ReverseCuthillMcKee(adjacency, std::max<std::size_t>(50, 10 * average));
  where_.assign(n, 0);
  for (std::size_t k = 0; k < n; ++k) where_[order_[k]] = k;
  first_.assign(n, 0);
  row_ptr_.assign(n + 1, 0);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t f = k;
    for (std::size_t w : adjacency[order_[k]]) f = std::min(f, where_[w]);
    first_[k] = f;
    row_ptr_[k + 1] = row_ptr_[k] + (k - f + 1);
  }
  values_.assign(row_ptr_[n], 0.0);
  work_.assign(n, 0.0);
}

void ProfileCholesky::ClearValues() { std::fill(values_.begin(), values_.end(), 0.0); }

void ProfileCholesky::Add(std::size_t i, std::size_t j, double v) {
  std::size_t pi = where_[i], pj = where_[j];
  if (pi < pj) std::swap(pi, pj);
  if (pj < first_[pi]) throw NumericalBreakdown("profile Cholesky entry outside pattern");
  At(pi, pj) += v;
}

std::size_t ProfileCholesky::Factor() {
  const std::size_t n = order_.size();
  double max_diag = 0.0;
  for (std::size_t k = 0; k < n; ++k) max_diag = std::max(max_diag, std::abs(At(k, k)));
  const double tiny = 1e-30 * std::max(1.0, max_diag);
  std::size_t replaced = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t fi = first_[i];
    double* li = values_.data() + row_ptr_[i] - fi;  // li[j] = L(i, j)
    for (std::size_t j = fi; j < i; ++j) {
      const std::size_t fj = first_[j];
      const double* lj = values_.data() + row_ptr_[j] - fj;
      double s = li[j];
      for (std::size_t k = std::max(fi, fj); k < j; ++k) s -= li[k] * lj[k];
      li[j] = s / lj[j];
    }
    double d = li[i];
    for (std::size_t k = fi; k < i; ++k) d -= li[k] * li[k];
    if (!(d > tiny)) {
      d = 1e128;
      ++replaced;
    }
    li[i] = std::sqrt(d);
  }
  return replaced;
}

void ProfileCholesky::Solve(Vector& b) const {
  const std::size_t n = order_.size();
  Vector& z = work_;
  for (std::size_t k = 0; k < n; ++k) z[k] = b[order_[k]];
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t fi = first_[i];
    const double* li = values_.data() + row_ptr_[i] - fi;
    double s = z[i];
    for (std::size_t k = fi; k < i; ++k) s -= li[k] * z[k];
    z[i] = s / li[i];
  }
  for (std::size_t i = n; i-- > 0;) {
    const std::size_t fi = first_[i];
    const double* li = values_.data() + row_ptr_[i] - fi;
    const double zi = z[i] / li[i];
    z[i] = zi;
    for (std::size_t k = fi; k < i; ++k) z[k] -= li[k] * zi;
  }
  for (std::size_t k = 0; k < n; ++k) b[order_[k]] = z[k];
}

}  // namespace gridcharge::internal
