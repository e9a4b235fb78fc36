// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

namespace xicor {

/*!
  Neumaier's variant of Kahan summation.

  Unlike plain Kahan it stays correct when an addend is larger in magnitude
  than the running sum, which happens at the start of every row of a
  pairwise kernel sum.
*/
template <typename Value>
class CompensatedSum {
 public:
  void add(Value value) noexcept {
    const Value t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      compensation_ += (sum_ - t) + value;
    } else {
      compensation_ += (value - t) + sum_;
    }
    sum_ = t;
  }

  CompensatedSum& operator+=(Value value) noexcept {
    add(value);
    return *this;
  }

  Value value() const noexcept { return sum_ + compensation_; }

 private:
  Value sum_{0};
  Value compensation_{0};
};

}  // namespace xicor
