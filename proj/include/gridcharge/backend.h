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

#ifndef GRIDCHARGE_BACKEND_H_
#define GRIDCHARGE_BACKEND_H_

#include <string>
#include <vector>

#include "gridcharge/linear_program.h"
#include "gridcharge/quadratic_program.h"

namespace gridcharge {

// Optimization engine selected by the `solver.backend` option. Only the
// built-in engine ("internal") is registered; other names are reported as
// input errors so that a missing third-party engine fails loudly.
class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual std::string name() const = 0;
  virtual LpSolution Solve(const LinearProgram& lp, const SolverOptions& opts) const = 0;
  virtual QpSolution Solve(const QuadraticProgram& qp, const SolverOptions& opts) const = 0;
};

const SolverBackend& GetBackend(const std::string& name);
std::vector<std::string> RegisteredBackends();

}  // namespace gridcharge

#endif  // GRIDCHARGE_BACKEND_H_
