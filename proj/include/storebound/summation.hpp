#pragma once

#include <cmath>

namespace storebound {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double value) {
    const double t = sum_ + value;
    if (std::fabs(sum_) >= std::fabs(value)) {
      compensation_ += (sum_ - t) + value;
    } else {
      compensation_ += (value - t) + sum_;
    }
    sum_ = t;
  }
  // Adds 2^log2_value; -inf contributes nothing.
  void add_log2(double log2_value) {
    if (log2_value == -INFINITY) return;
    add(std::exp2(log2_value));
  }
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace storebound
