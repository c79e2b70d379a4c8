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

#include "gridcharge/utility.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "gridcharge/errors.h"

namespace gridcharge {

PwlUtility::PwlUtility(double alpha, std::vector<double> breakpoints, std::vector<double> slopes)
    : alpha_(alpha), breakpoints_(std::move(breakpoints)), slopes_(std::move(slopes)) {
  if (slopes_.empty() || breakpoints_.size() != slopes_.size() + 1) {
    throw MalformedUtility("utility needs K slopes and K + 1 breakpoints");
  }
  if (!std::isfinite(alpha_)) throw MalformedUtility("utility constant is not finite");
  for (std::size_t k = 0; k < breakpoints_.size(); ++k) {
    if (!std::isfinite(breakpoints_[k])) throw MalformedUtility("breakpoint is not finite");
    if (k > 0 && !(breakpoints_[k] > breakpoints_[k - 1])) {
      throw MalformedUtility("breakpoints must be strictly increasing");
    }
  }
  for (std::size_t k = 0; k < slopes_.size(); ++k) {
    if (!std::isfinite(slopes_[k])) throw MalformedUtility("slope is not finite");
    if (k > 0 && slopes_[k] > slopes_[k - 1]) {
      throw MalformedUtility("slopes must be non-increasing (segment " + std::to_string(k) + ")");
    }
  }
  intercepts_.resize(slopes_.size());
  double value = alpha_;
  for (std::size_t k = 0; k < slopes_.size(); ++k) {
    intercepts_[k] = value - slopes_[k] * breakpoints_[k];
    value += slopes_[k] * (breakpoints_[k + 1] - breakpoints_[k]);
  }
}

double PwlUtility::Value(double consumption) const {
  const double lo = breakpoints_.front();
  const double hi = breakpoints_.back();
  const double allowance = 1e-9 * (1.0 + std::max(std::abs(lo), std::abs(hi)));
  if (!(consumption >= lo - allowance && consumption <= hi + allowance)) {
    throw OutOfDomain("consumption " + std::to_string(consumption) + " outside [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  double value = intercepts_[0] + slopes_[0] * consumption;
  for (std::size_t k = 1; k < slopes_.size(); ++k) {
    value = std::min(value, intercepts_[k] + slopes_[k] * consumption);
  }
  return value;
}

}  // namespace gridcharge
