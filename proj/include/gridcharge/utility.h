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

#ifndef GRIDCHARGE_UTILITY_H_
#define GRIDCHARGE_UTILITY_H_

#include <cstddef>
#include <vector>

namespace gridcharge {

// Concave piecewise-linear utility of consumption. Segment k covers
// [breakpoints[k], breakpoints[k+1]] with slope slopes[k]; the value at the
// first breakpoint is alpha.
class PwlUtility {
 public:
  PwlUtility() = default;
  // Throws MalformedUtility unless breakpoints strictly increase, there is
  // exactly one more breakpoint than slopes, and slopes do not increase.
  PwlUtility(double alpha, std::vector<double> breakpoints, std::vector<double> slopes);

  // Throws OutOfDomain outside [min_consumption, max_consumption] (with a
  // 1e-9 relative allowance).
  double Value(double consumption) const;

  std::size_t segments() const { return slopes_.size(); }
  double alpha() const { return alpha_; }
  double slope(std::size_t k) const { return slopes_[k]; }
  const std::vector<double>& slopes() const { return slopes_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  double min_consumption() const { return breakpoints_.front(); }
  double max_consumption() const { return breakpoints_.back(); }
  // Value at zero consumption of segment k extended linearly, so that
  // segment k reads intercept(k) + slope(k) * consumption.
  double intercept(std::size_t k) const { return intercepts_[k]; }

 private:
  double alpha_ = 0.0;
  std::vector<double> breakpoints_{0.0, 1.0};
  std::vector<double> slopes_{0.0};
  std::vector<double> intercepts_{0.0};
};

}  // namespace gridcharge

#endif  // GRIDCHARGE_UTILITY_H_
