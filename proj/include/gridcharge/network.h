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

#ifndef GRIDCHARGE_NETWORK_H_
#define GRIDCHARGE_NETWORK_H_

#include <cstddef>
#include <span>
#include <vector>

#include "gridcharge/matrix.h"

namespace gridcharge {

// A transmission line between two buses (0-based). The reactance is in per
// unit; the flow limit in kW.
struct LineSpec {
  std::size_t from = 0;
  std::size_t to = 0;
  double reactance = 1.0;
  double flow_limit = 0.0;
};

struct LimitViolation {
  std::size_t line = 0;
  std::size_t period = 0;
  // |flow| - limit, positive.
  double excess = 0.0;
};

// DC power flow solution, indexed [period][bus] or [period][line].
struct FlowState {
  std::vector<Vector> angles;
  std::vector<Vector> injections;
  std::vector<Vector> flows;
  std::vector<LimitViolation> violations;
};

// Nodal susceptance matrix: B_ii = sum of 1/x over lines at i, B_ij = -1/x_ij.
// Throws NonpositiveReactance, InputError (self loop or bad index), or
// DisconnectedNetwork.
DenseMatrix BuildNodalMatrix(std::size_t buses, std::span<const LineSpec> lines);

// Inverse of B with the reference row and column removed, re-embedded with
// zeros at the reference position.
DenseMatrix BuildAugmentedX(const DenseMatrix& nodal, std::size_t reference);

// Immutable DC network model. Parallel lines are merged (susceptances and
// limits added) and all derived matrices are computed at construction, so
// instances can be shared across threads.
class BusNetwork {
 public:
  BusNetwork(std::size_t buses, std::vector<LineSpec> lines, std::size_t reference);

  std::size_t num_buses() const { return buses_; }
  std::size_t num_lines() const { return lines_.size(); }
  std::size_t reference_bus() const { return reference_; }
  const std::vector<LineSpec>& lines() const { return lines_; }
  double susceptance(std::size_t line) const { return 1.0 / lines_[line].reactance; }

  const DenseMatrix& nodal_matrix() const { return nodal_; }
  const DenseMatrix& augmented_x() const { return x_; }
  // Electrical distance d_ij: sum over lines of |PTDF(line, i, j)|.
  const DenseMatrix& distances() const { return distances_; }
  double distance(std::size_t i, std::size_t j) const { return distances_(i, j); }

  // Flow on `line` per unit of power injected at bus i and withdrawn at j.
  double Ptdf(std::size_t line, std::size_t i, std::size_t j) const;
  // shift_factors()(line, bus) = Ptdf(line, bus, reference).
  const DenseMatrix& shift_factors() const { return shift_; }

  // Throws UnbalancedInjections when a period's injections do not sum to
  // zero within 1e-6.
  FlowState SolveDcFlow(const std::vector<Vector>& injections) const;

  // rho * sum_t sum_l b_l (theta_from - theta_to)^2.
  double TransmissionLoss(const FlowState& state, double rho) const;
  // rho * sum_t sum_l flow_l^2 / b_l.
  double TransmissionLossFromFlows(const FlowState& state, double rho) const;

 private:
  std::size_t buses_;
  std::size_t reference_;
  std::vector<LineSpec> lines_;
  DenseMatrix nodal_;
  DenseMatrix x_;
  DenseMatrix shift_;
  DenseMatrix distances_;
};

}  // namespace gridcharge

#endif  // GRIDCHARGE_NETWORK_H_
