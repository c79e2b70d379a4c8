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

#include "gridcharge/backend.h"

#include "gridcharge/errors.h"

namespace gridcharge {
namespace {

class InternalBackend final : public SolverBackend {
 public:
  std::string name() const override { return "internal"; }
  LpSolution Solve(const LinearProgram& lp, const SolverOptions& opts) const override {
    return SolveLp(lp, opts);
  }
  QpSolution Solve(const QuadraticProgram& qp, const SolverOptions& opts) const override {
    return SolveQp(qp, opts);
  }
};

}  // namespace

const SolverBackend& GetBackend(const std::string& name) {
  static const InternalBackend internal;
  if (name == internal.name()) return internal;
  throw InputError("solver backend '" + name + "' is not available (built-in: internal)");
}

std::vector<std::string> RegisteredBackends() { return {"internal"}; }

}  // namespace gridcharge
