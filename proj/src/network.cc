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

#include "gridcharge/network.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <utility>

#include "gridcharge/errors.h"
#include "gridcharge/linear_system.h"

namespace gridcharge {
namespace {

void ValidateLines(std::size_t buses, std::span<const LineSpec> lines) {
  if (buses == 0) throw InputError("network has no buses");
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const LineSpec& line = lines[l];
    if (line.from >= buses || line.to >= buses) {
      throw InputError("line " + std::to_string(l) + " references an unknown bus");
    }
    if (line.from == line.to) throw InputError("line " + std::to_string(l) + " is a self loop");
    if (!(line.reactance > 0.0) || !std::isfinite(line.reactance)) {
      throw NonpositiveReactance("line " + std::to_string(l) + " has reactance " +
                                 std::to_string(line.reactance));
    }
    if (!(line.flow_limit >= 0.0)) {
      throw InputError("line " + std::to_string(l) + " has a negative flow limit");
    }
  }
  std::vector<std::size_t> parent(buses);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&parent](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  std::size_t components = buses;
  for (const LineSpec& line : lines) {
    const std::size_t a = find(line.from), b = find(line.to);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  if (components != 1) {
    throw DisconnectedNetwork("network has " + std::to_string(components) +
                              " connected components");
  }
}

std::vector<LineSpec> MergeParallel(std::vector<LineSpec> lines) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> seen;
  std::vector<LineSpec> merged;
  for (const LineSpec& line : lines) {
    const auto key = std::minmax(line.from, line.to);
    const auto it = seen.find(key);
    if (it == seen.end()) {
      seen.emplace(key, merged.size());
      merged.push_back(line);
      continue;
    }
    LineSpec& kept = merged[it->second];
    const double b = 1.0 / kept.reactance + 1.0 / line.reactance;
    kept.reactance = 1.0 / b;
    kept.flow_limit += line.flow_limit;
  }
  return merged;
}

}  // namespace

DenseMatrix BuildNodalMatrix(std::size_t buses, std::span<const LineSpec> lines) {
  ValidateLines(buses, lines);
  DenseMatrix b(buses, buses);
  for (const LineSpec& line : lines) {
    const double s = 1.0 / line.reactance;
    b(line.from, line.from) += s;
    b(line.to, line.to) += s;
    b(line.from, line.to) -= s;
    b(line.to, line.from) -= s;
  }
  return b;
}

DenseMatrix BuildAugmentedX(const DenseMatrix& nodal, std::size_t reference) {
  const std::size_t n = nodal.rows();
  if (reference >= n) throw InputError("reference bus out of range");
  DenseMatrix x(n, n);
  if (n == 1) return x;
  DenseMatrix reduced(n - 1, n - 1);
  for (std::size_t i = 0, ri = 0; i < n; ++i) {
    if (i == reference) continue;
    for (std::size_t j = 0, rj = 0; j < n; ++j) {
      if (j == reference) continue;
      reduced(ri, rj++) = nodal(i, j);
    }
    ++ri;
  }
  const DenseMatrix inv = Invert(reduced);
  for (std::size_t i = 0, ri = 0; i < n; ++i) {
    if (i == reference) continue;
    for (std::size_t j = 0, rj = 0; j < n; ++j) {
      if (j == reference) continue;
      x(i, j) = inv(ri, rj++);
    }
    ++ri;
  }
  return x;
}

BusNetwork::BusNetwork(std::size_t buses, std::vector<LineSpec> lines, std::size_t reference)
    : buses_(buses), reference_(reference) {
  ValidateLines(buses, lines);
  if (reference >= buses) throw InputError("reference bus out of range");
  lines_ = MergeParallel(std::move(lines));
  nodal_ = BuildNodalMatrix(buses_, lines_);
  x_ = BuildAugmentedX(nodal_, reference_);
  const std::size_t nl = lines_.size();
  shift_ = DenseMatrix(nl, buses_);
  for (std::size_t l = 0; l < nl; ++l) {
    const LineSpec& line = lines_[l];
    for (std::size_t b = 0; b < buses_; ++b) {
      shift_(l, b) = (x_(line.from, b) - x_(line.to, b)) / line.reactance;
    }
  }
  distances_ = DenseMatrix(buses_, buses_);
  for (std::size_t i = 0; i < buses_; ++i) {
    for (std::size_t j = i + 1; j < buses_; ++j) {
      double d = 0.0;
      for (std::size_t l = 0; l < nl; ++l) d += std::abs(Ptdf(l, i, j));
      distances_(i, j) = d;
      distances_(j, i) = d;
    }
  }
}

double BusNetwork::Ptdf(std::size_t line, std::size_t i, std::size_t j) const {
  if (line >= lines_.size() || i >= buses_ || j >= buses_) {
    throw InputError("PTDF index out of range");
  }
  const std::size_t m = lines_[line].from;
  const std::size_t n = lines_[line].to;
  return (x_(m, i) - x_(m, j) - x_(n, i) + x_(n, j)) / lines_[line].reactance;
}

FlowState BusNetwork::SolveDcFlow(const std::vector<Vector>& injections) const {
  FlowState state;
  state.injections = injections;
  for (std::size_t t = 0; t < injections.size(); ++t) {
    const Vector& p = injections[t];
    if (p.size() != buses_) throw InputError("injection vector has wrong size");
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    if (std::abs(total) > 1e-6) {
      throw UnbalancedInjections("injections in period " + std::to_string(t) + " sum to " +
                                 std::to_string(total));
    }
    Vector theta = x_.Multiply(p);
    theta[reference_] = 0.0;
    Vector flows(lines_.size());
    for (std::size_t l = 0; l < lines_.size(); ++l) {
      flows[l] = (theta[lines_[l].from] - theta[lines_[l].to]) * susceptance(l);
      const double excess = std::abs(flows[l]) - lines_[l].flow_limit;
      if (excess > 1e-9 * (1.0 + lines_[l].flow_limit)) {
        state.violations.push_back({l, t, excess});
      }
    }
    state.angles.push_back(std::move(theta));
    state.flows.push_back(std::move(flows));
  }
  return state;
}

double BusNetwork::TransmissionLoss(const FlowState& state, double rho) const {
  double loss = 0.0;
  for (const Vector& theta : state.angles) {
    for (std::size_t l = 0; l < lines_.size(); ++l) {
      const double diff = theta[lines_[l].from] - theta[lines_[l].to];
      loss += susceptance(l) * diff * diff;
    }
  }
  return rho * loss;
}

double BusNetwork::TransmissionLossFromFlows(const FlowState& state, double rho) const {
  double loss = 0.0;
  for (const Vector& flows : state.flows) {
    for (std::size_t l = 0; l < lines_.size(); ++l) loss += flows[l] * flows[l] / susceptance(l);
  }
  return rho * loss;
}

}  // namespace gridcharge
