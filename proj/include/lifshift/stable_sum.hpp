#pragma once

#include <cmath>

namespace lifshift {

// Neumaier compensated accumulator. All reductions that feed reported
// numbers go through this with a fixed summation order, so repeated runs
// of one configuration are bitwise identical.
class stable_sum {
public:
  stable_sum() = default;
  explicit stable_sum(double init) : sum_(init) {}

  void add(double x)
  {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

} // namespace lifshift
