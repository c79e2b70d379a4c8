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

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "gridcharge/errors.h"
#include "gridcharge/linear_system.h"
#include "gridcharge/quadratic_program.h"
#include "profile_cholesky.h"

namespace gridcharge {

void QuadraticProgram::AddQuadratic(std::size_t i, std::size_t j, double v) {
  if (i >= lp_.num_variables() || j >= lp_.num_variables()) {
    throw InputError("quadratic index out of range");
  }
  if (v == 0.0) return;
  quadratic_.push_back({i, j, v});
  if (i != j) quadratic_.push_back({j, i, v});
}

bool QuadraticProgram::diagonal() const {
  return std::all_of(quadratic_.begin(), quadratic_.end(),
                     [](const Triplet& t) { return t.row == t.col; });
}

Vector QuadraticProgram::QuadraticProduct(std::span<const double> x) const {
  Vector qx(lp_.num_variables(), 0.0);
  for (const Triplet& t : quadratic_) qx[t.row] += t.value * x[t.col];
  return qx;
}

double QuadraticProgram::Evaluate(std::span<const double> x) const {
  const Vector qx = QuadraticProduct(x);
  double quad = 0.0;
  for (std::size_t j = 0; j < qx.size(); ++j) quad += x[j] * qx[j];
  return lp_.Evaluate(x) + 0.5 * quad;
}

namespace {

constexpr double kStepFraction = 0.995;
constexpr double kPrimalRegularization = 1e-10;
constexpr double kFreeRegularization = 1e-8;
constexpr double kDualRegularization = 1e-10;

void CheckConcave(const QuadraticProgram& qp) {
  const auto& q = qp.quadratic();
  if (q.empty()) return;
  double scale = 0.0;
  for (const Triplet& t : q) scale = std::max(scale, std::abs(t.value));
  if (qp.diagonal()) {
    for (const Triplet& t : q) {
      if (t.value > 1e-12 * scale) throw InputError("quadratic objective is not concave");
    }
    return;
  }
  std::vector<std::size_t> touched;
  for (const Triplet& t : q) touched.push_back(t.row);
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  const std::size_t k = touched.size();
  DenseMatrix h(k, k);
  for (const Triplet& t : q) {
    const auto i = std::lower_bound(touched.begin(), touched.end(), t.row) - touched.begin();
    const auto j = std::lower_bound(touched.begin(), touched.end(), t.col) - touched.begin();
    h(i, j) -= t.value;
  }
  if (!h.IsSymmetric(1e-12 * scale)) throw InputError("quadratic objective is not symmetric");
  for (std::size_t i = 0; i < k; ++i) h(i, i) += 1e-9 * scale;
  // Dense Cholesky of -Q + eps I.
  for (std::size_t j = 0; j < k; ++j) {
    double d = h(j, j);
    for (std::size_t p = 0; p < j; ++p) d -= h(j, p) * h(j, p);
    if (!(d > 0.0)) throw InputError("quadratic objective is not concave");
    d = std::sqrt(d);
    h(j, j) = d;
    for (std::size_t i = j + 1; i < k; ++i) {
      double s = h(i, j);
      for (std::size_t p = 0; p < j; ++p) s -= h(i, p) * h(j, p);
      h(i, j) = s / d;
    }
  }
}

// The problem after removing fixed variables, in minimization form
//   min 1/2 z^T H z + g^T z   s.t.  A z = b,  l <= z <= u,
// where inequality rows received a slack column with coefficient -1.
struct Reduced {
  std::size_t nx = 0;
  std::size_t nz = 0;
  std::vector<std::size_t> var_of;
  std::vector<std::size_t> row_of;
  std::vector<std::ptrdiff_t> slack_of_row;
  SparseMatrix a;
  Vector b, g, l, u;
  std::vector<Triplet> h;
  Vector h_diag;
  bool diagonal = true;
  bool trivially_infeasible = false;
};

Reduced Presolve(const QuadraticProgram& qp, double feas_tol) {
  const LinearProgram& lp = qp.linear();
  const std::size_t n = lp.num_variables();
  Reduced r;
  std::vector<std::ptrdiff_t> kept(n, -1);
  Vector fixed(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (lp.lower()[j] == lp.upper()[j]) {
      fixed[j] = lp.lower()[j];
    } else {
      kept[j] = static_cast<std::ptrdiff_t>(r.var_of.size());
      r.var_of.push_back(j);
    }
  }
  r.nx = r.var_of.size();
  r.l.resize(r.nx);
  r.u.resize(r.nx);
  r.g.resize(r.nx);
  for (std::size_t k = 0; k < r.nx; ++k) {
    const std::size_t j = r.var_of[k];
    r.l[k] = lp.lower()[j];
    r.u[k] = lp.upper()[j];
    r.g[k] = -lp.objective()[j];
  }
  for (const Triplet& t : qp.quadratic()) {
    const auto ki = kept[t.row];
    if (ki < 0) continue;
    const auto kj = kept[t.col];
    if (kj < 0) {
      r.g[ki] -= t.value * fixed[t.col];
    } else {
      r.h.push_back({static_cast<std::size_t>(ki), static_cast<std::size_t>(kj), -t.value});
      if (ki != kj) r.diagonal = false;
    }
  }
  r.h_diag.assign(r.nx, 0.0);
  for (const Triplet& t : r.h) {
    if (t.row == t.col) r.h_diag[t.row] += t.value;
  }

  const SparseMatrix a = lp.BuildMatrix();
  std::vector<Triplet> entries;
  r.slack_of_row.clear();
  std::size_t next_slack = r.nx;
  Vector slack_lo, slack_hi;
  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    double constant = 0.0;
    std::size_t live = 0;
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (kept[cols[k]] < 0) {
        constant += vals[k] * fixed[cols[k]];
      } else {
        ++live;
      }
    }
    const double rhs = lp.rhs()[i] - constant;
    const RowSense sense = lp.senses()[i];
    if (live == 0) {
      const double tol = feas_tol * (1.0 + std::abs(lp.rhs()[i]));
      const bool ok = (sense != RowSense::kGreaterEqual || rhs <= tol) &&
                      (sense != RowSense::kLessEqual || rhs >= -tol) &&
                      (sense != RowSense::kEqual || std::abs(rhs) <= tol);
      if (!ok) r.trivially_infeasible = true;
      continue;
    }
    const std::size_t row = r.row_of.size();
    r.row_of.push_back(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (kept[cols[k]] >= 0) {
        entries.push_back({row, static_cast<std::size_t>(kept[cols[k]]), vals[k]});
      }
    }
    if (sense == RowSense::kEqual) {
      r.b.push_back(rhs);
      r.slack_of_row.push_back(-1);
      continue;
    }
    r.b.push_back(0.0);
    r.slack_of_row.push_back(static_cast<std::ptrdiff_t>(next_slack));
    entries.push_back({row, next_slack, -1.0});
    ++next_slack;
    slack_lo.push_back(sense == RowSense::kLessEqual ? -kInfinity : rhs);
    slack_hi.push_back(sense == RowSense::kLessEqual ? rhs : kInfinity);
  }
  r.nz = next_slack;
  r.l.insert(r.l.end(), slack_lo.begin(), slack_lo.end());
  r.u.insert(r.u.end(), slack_hi.begin(), slack_hi.end());
  r.g.resize(r.nz, 0.0);
  r.h_diag.resize(r.nz, 0.0);
  r.a = SparseMatrix(r.row_of.size(), r.nz, std::move(entries));
  return r;
}

// Solves the regularized normal equations A K^-1 A^T dy = rhs for either a
// diagonal K (sparse profile Cholesky) or a general K (dense LU).
class NormalEquations {
 public:
  explicit NormalEquations(const Reduced& r) : r_(r) {
    if (r.diagonal) {
      const std::size_t m = r.a.rows();
      std::vector<std::vector<std::size_t>> adjacency(m);
      for (std::size_t k = 0; k < r.nz; ++k) {
        const auto rows = r.a.col_rows(k);
        for (std::size_t p = 0; p < rows.size(); ++p) {
          for (std::size_t q = 0; q < rows.size(); ++q) {
            if (p != q) adjacency[rows[p]].push_back(rows[q]);
          }
        }
      }
      for (auto& adj : adjacency) {
        std::sort(adj.begin(), adj.end());
        adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
      }
      cholesky_.Analyze(adjacency);
    }
  }

  // k_diag holds the diagonal of K = H + D + regularization.
  void Factor(const Vector& k_diag) {
    k_diag_ = k_diag;
    const std::size_t m = r_.a.rows();
    if (r_.diagonal) {
      cholesky_.ClearValues();
      for (std::size_t k = 0; k < r_.nz; ++k) {
        const auto rows = r_.a.col_rows(k);
        const auto vals = r_.a.col_values(k);
        const double w = 1.0 / k_diag[k];
        for (std::size_t p = 0; p < rows.size(); ++p) {
          for (std::size_t q = 0; q <= p; ++q) {
            cholesky_.Add(rows[p], rows[q], vals[p] * vals[q] * w);
          }
        }
      }
      for (std::size_t i = 0; i < m; ++i) cholesky_.AddDiagonal(i, kDualRegularization);
      cholesky_.Factor();
      return;
    }
    DenseMatrix k(r_.nz, r_.nz);
    for (const Triplet& t : r_.h) k(t.row, t.col) += t.value;
    for (std::size_t j = 0; j < r_.nz; ++j) k(j, j) += k_diag[j] - r_.h_diag[j];
    k_lu_ = std::make_unique<LuFactorization>(k, 0.0);
    DenseMatrix n(m, m);
    Vector col(r_.nz);
    for (std::size_t i = 0; i < m; ++i) {
      std::fill(col.begin(), col.end(), 0.0);
      const auto cols = r_.a.row_cols(i);
      const auto vals = r_.a.row_values(i);
      for (std::size_t p = 0; p < cols.size(); ++p) col[cols[p]] = vals[p];
      const Vector kc = k_lu_->Solve(col);
      const Vector akc = r_.a.Multiply(kc);
      for (std::size_t q = 0; q < m; ++q) n(q, i) = akc[q];
    }
    for (std::size_t i = 0; i < m; ++i) n(i, i) += kDualRegularization;
    n_lu_ = std::make_unique<LuFactorization>(n, 0.0);
  }

  Vector SolveK(const Vector& v) const {
    if (!r_.diagonal) return k_lu_->Solve(v);
    Vector out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) out[k] = v[k] / k_diag_[k];
    return out;
  }
  Vector SolveN(Vector v) const {
    if (!r_.diagonal) return n_lu_->Solve(v);
    cholesky_.Solve(v);
    return v;
  }

 private:
  const Reduced& r_;
  internal::ProfileCholesky cholesky_;
  Vector k_diag_;
  std::unique_ptr<LuFactorization> k_lu_;
  std::unique_ptr<LuFactorization> n_lu_;
};

double MaxStep(const Vector& v, const Vector& dv, const std::vector<char>& active) {
  double alpha = 1.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (active[k] && dv[k] < 0.0) alpha = std::min(alpha, -v[k] / dv[k]);
  }
  return alpha;
}

struct Iterate {
  Vector z, sl, su, tl, tu, y;
};

struct Direction {
  Vector dz, dy, dsl, dsu, dtl, dtu;
};

// Returns true when the iteration converged.
bool RunInteriorPoint(const Reduced& r, const SolverOptions& opts, Iterate& it,
                      std::size_t& iterations) {
  const std::size_t nz = r.nz;
  const std::size_t m = r.a.rows();
  std::vector<char> has_l(nz), has_u(nz);
  std::size_t bounded = 0;
  for (std::size_t k = 0; k < nz; ++k) {
    has_l[k] = std::isfinite(r.l[k]);
    has_u[k] = std::isfinite(r.u[k]);
    bounded += has_l[k] + has_u[k];
  }
  it.z.assign(nz, 0.0);
  it.sl.assign(nz, 0.0);
  it.su.assign(nz, 0.0);
  it.tl.assign(nz, 0.0);
  it.tu.assign(nz, 0.0);
  it.y.assign(m, 0.0);
  for (std::size_t k = 0; k < nz; ++k) {
    double z = 0.0;
    if (has_l[k] && has_u[k]) {
      z = 0.5 * (r.l[k] + r.u[k]);
    } else if (has_l[k]) {
      z = std::max(0.0, r.l[k] + 1.0);
    } else if (has_u[k]) {
      z = std::min(0.0, r.u[k] - 1.0);
    }
    it.z[k] = z;
    if (has_l[k]) {
      it.sl[k] = std::max(z - r.l[k], 1.0);
      it.tl[k] = 1.0;
    }
    if (has_u[k]) {
      it.su[k] = std::max(r.u[k] - z, 1.0);
      it.tu[k] = 1.0;
    }
  }

  const double b_scale = 1.0 + InfinityNorm(r.b);
  const double g_scale = 1.0 + InfinityNorm(r.g);
  double bound_scale = 1.0;
  for (std::size_t k = 0; k < nz; ++k) {
    if (has_l[k]) bound_scale = std::max(bound_scale, 1.0 + std::abs(r.l[k]));
    if (has_u[k]) bound_scale = std::max(bound_scale, 1.0 + std::abs(r.u[k]));
  }
  const double target = std::min({opts.feas_tol, opts.kkt_tol, opts.gap_tol}) * 1e-2;
  const std::size_t max_iter = opts.max_iterations != 0 ? opts.max_iterations : 200;

  NormalEquations normal(r);
  Vector rp(m), rd(nz), rl(nz), ru(nz), kd(nz), hz(nz);
  Direction aff, cor;

  auto solve = [&](const Vector& vl, const Vector& vu, Direction& d) {
    Vector xi(nz);
    for (std::size_t k = 0; k < nz; ++k) {
      double v = -rd[k];
      if (has_l[k]) v += (vl[k] + it.tl[k] * rl[k]) / it.sl[k];
      if (has_u[k]) v -= (vu[k] - it.tu[k] * ru[k]) / it.su[k];
      xi[k] = v;
    }
    const Vector kxi = normal.SolveK(xi);
    const Vector akxi = r.a.Multiply(kxi);
    Vector rhs(m);
    for (std::size_t i = 0; i < m; ++i) rhs[i] = rp[i] - akxi[i];
    d.dy = normal.SolveN(std::move(rhs));
    const Vector atdy = r.a.MultiplyTransposed(d.dy);
    for (std::size_t k = 0; k < nz; ++k) xi[k] += atdy[k];
    d.dz = normal.SolveK(xi);
    d.dsl.assign(nz, 0.0);
    d.dsu.assign(nz, 0.0);
    d.dtl.assign(nz, 0.0);
    d.dtu.assign(nz, 0.0);
    for (std::size_t k = 0; k < nz; ++k) {
      if (has_l[k]) {
        d.dsl[k] = d.dz[k] - rl[k];
        d.dtl[k] = (vl[k] - it.tl[k] * d.dsl[k]) / it.sl[k];
      }
      if (has_u[k]) {
        d.dsu[k] = ru[k] - d.dz[k];
        d.dtu[k] = (vu[k] - it.tu[k] * d.dsu[k]) / it.su[k];
      }
    }
  };

  for (iterations = 0; iterations < max_iter; ++iterations) {
    const Vector az = r.a.Multiply(it.z);
    std::fill(hz.begin(), hz.end(), 0.0);
    for (const Triplet& t : r.h) hz[t.row] += t.value * it.z[t.col];
    const Vector aty = r.a.MultiplyTransposed(it.y);
    double pres = 0.0, dres = 0.0, comp = 0.0, obj = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      rp[i] = r.b[i] - az[i];
      pres = std::max(pres, std::abs(rp[i]) / b_scale);
    }
    for (std::size_t k = 0; k < nz; ++k) {
      rd[k] = hz[k] + r.g[k] - aty[k] - it.tl[k] + it.tu[k];
      dres = std::max(dres, std::abs(rd[k]) / g_scale);
      rl[k] = has_l[k] ? r.l[k] - it.z[k] + it.sl[k] : 0.0;
      ru[k] = has_u[k] ? r.u[k] - it.z[k] - it.su[k] : 0.0;
      pres = std::max(pres, std::max(std::abs(rl[k]), std::abs(ru[k])) / bound_scale);
      comp += it.sl[k] * it.tl[k] + it.su[k] * it.tu[k];
      obj += r.g[k] * it.z[k] + 0.5 * hz[k] * it.z[k];
    }
    const double mu = bounded == 0 ? 0.0 : comp / static_cast<double>(bounded);
    if (pres <= target && dres <= target && comp / (1.0 + std::abs(obj)) <= target) return true;
    if (!std::isfinite(pres + dres + comp) || InfinityNorm(it.z) > 1e14 ||
        InfinityNorm(it.y) > 1e14) {
      return false;
    }

    for (std::size_t k = 0; k < nz; ++k) {
      double d = r.h_diag[k];
      if (has_l[k]) d += it.tl[k] / it.sl[k];
      if (has_u[k]) d += it.tu[k] / it.su[k];
      const bool free_flat = !has_l[k] && !has_u[k] && r.h_diag[k] == 0.0;
      kd[k] = d + (free_flat ? kFreeRegularization : kPrimalRegularization);
    }
    for (double v : kd) {
      if (!std::isfinite(v)) return false;
    }
    try {
      normal.Factor(kd);
    } catch (const SingularMatrix&) {
      return false;
    }

    Vector vl(nz, 0.0), vu(nz, 0.0);
    for (std::size_t k = 0; k < nz; ++k) {
      if (has_l[k]) vl[k] = -it.sl[k] * it.tl[k];
      if (has_u[k]) vu[k] = -it.su[k] * it.tu[k];
    }
    solve(vl, vu, aff);
    const double ap = std::min(MaxStep(it.sl, aff.dsl, has_l), MaxStep(it.su, aff.dsu, has_u));
    const double ad = std::min(MaxStep(it.tl, aff.dtl, has_l), MaxStep(it.tu, aff.dtu, has_u));
    double sigma = 0.0;
    if (bounded > 0 && mu > 0.0) {
      double comp_aff = 0.0;
      for (std::size_t k = 0; k < nz; ++k) {
        if (has_l[k]) comp_aff += (it.sl[k] + ap * aff.dsl[k]) * (it.tl[k] + ad * aff.dtl[k]);
        if (has_u[k]) comp_aff += (it.su[k] + ap * aff.dsu[k]) * (it.tu[k] + ad * aff.dtu[k]);
      }
      const double ratio = comp_aff / static_cast<double>(bounded) / mu;
      sigma = std::clamp(ratio * ratio * ratio, 0.0, 1.0);
    }
    for (std::size_t k = 0; k < nz; ++k) {
      if (has_l[k]) vl[k] = sigma * mu - it.sl[k] * it.tl[k] - aff.dsl[k] * aff.dtl[k];
      if (has_u[k]) vu[k] = sigma * mu - it.su[k] * it.tu[k] - aff.dsu[k] * aff.dtu[k];
    }
    solve(vl, vu, cor);
    const double cp = std::min(MaxStep(it.sl, cor.dsl, has_l), MaxStep(it.su, cor.dsu, has_u));
    const double cd = std::min(MaxStep(it.tl, cor.dtl, has_l), MaxStep(it.tu, cor.dtu, has_u));
    const double alpha = std::min(1.0, kStepFraction * std::min(cp, cd));
    for (std::size_t k = 0; k < nz; ++k) {
      it.z[k] += alpha * cor.dz[k];
      if (has_l[k]) {
        it.sl[k] += alpha * cor.dsl[k];
        it.tl[k] += alpha * cor.dtl[k];
      }
      if (has_u[k]) {
        it.su[k] += alpha * cor.dsu[k];
        it.tu[k] += alpha * cor.dtu[k];
      }
    }
    for (std::size_t i = 0; i < m; ++i) it.y[i] += alpha * cor.dy[i];
  }
  return false;
}

QpSolution ConfirmInfeasible(const QuadraticProgram& qp, const SolverOptions& opts,
                             const std::string& reason) {
  LinearProgram feas = qp.linear();
  for (std::size_t j = 0; j < feas.num_variables(); ++j) feas.SetObjective(j, 0.0);
  const LpSolution phase1 = SolveLp(feas, opts);
  if (phase1.status == SolveStatus::kInfeasible) return phase1;
  throw NumericalBreakdown("interior point method failed on a feasible problem: " + reason);
}

}  // namespace

QpSolution SolveQp(const QuadraticProgram& qp, const SolverOptions& opts) {
  const LinearProgram& lp = qp.linear();
  lp.Validate();
  CheckConcave(qp);
  const Reduced r = Presolve(qp, opts.feas_tol);
  if (r.trivially_infeasible) return ConfirmInfeasible(qp, opts, "constant row violated");

  Iterate it;
  std::size_t iterations = 0;
  if (!RunInteriorPoint(r, opts, it, iterations)) {
    return ConfirmInfeasible(qp, opts, "no convergence after " + std::to_string(iterations) +
                                           " iterations");
  }

  QpSolution sol;
  sol.status = SolveStatus::kOptimal;
  sol.iterations = iterations;
  sol.primal.assign(lp.num_variables(), 0.0);
  for (std::size_t j = 0; j < lp.num_variables(); ++j) {
    if (lp.lower()[j] == lp.upper()[j]) sol.primal[j] = lp.lower()[j];
  }
  for (std::size_t k = 0; k < r.nx; ++k) {
    const std::size_t j = r.var_of[k];
    sol.primal[j] = std::clamp(it.z[k], lp.lower()[j], lp.upper()[j]);
  }
  sol.duals.assign(lp.num_rows(), 0.0);
  for (std::size_t i = 0; i < r.row_of.size(); ++i) sol.duals[r.row_of[i]] = -it.y[i];

  const Vector qx = qp.QuadraticProduct(sol.primal);
  sol.reduced_costs = ReducedCosts(lp, sol.duals);
  double quad = 0.0;
  for (std::size_t j = 0; j < qx.size(); ++j) {
    sol.reduced_costs[j] += qx[j];
    quad += sol.primal[j] * qx[j];
  }
  sol.objective = lp.Evaluate(sol.primal) + 0.5 * quad;
  sol.dual_objective = DualObjective(lp, sol.duals, sol.reduced_costs) - 0.5 * quad;
  sol.residuals = ComputeResiduals(lp, sol.primal, sol.duals, sol.reduced_costs, sol.objective,
                                   sol.dual_objective);
  const Residuals& res = sol.residuals;
  if (res.primal > opts.feas_tol || res.dual > opts.kkt_tol || res.gap > opts.gap_tol ||
      res.complementarity > opts.gap_tol) {
    throw NumericalBreakdown("interior point result failed residual checks (primal " +
                             std::to_string(res.primal) + ", dual " + std::to_string(res.dual) +
                             ", gap " + std::to_string(res.gap) + ")");
  }
  return sol;
}

}  // namespace gridcharge
