#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lifshift/errors.hpp"

namespace lifshift {

// Monotone piecewise-cubic interpolant (Fritsch-Carlson limited slopes).
// Shape-preserving: never overshoots the data, C1, and exact at the nodes.
class pchip {
public:
  pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y))
  {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n)
      raise(errc::invalid_argument, "pchip: need at least two nodes and matching arrays");
    for (std::size_t i = 1; i < n; ++i)
      if (!(x_[i] > x_[i - 1]))
        raise(errc::invalid_argument, "pchip: abscissae must be strictly increasing");

    d_.resize(n);
    if (n == 2) {
      d_[0] = d_[1] = secant(0);
      return;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double s0 = secant(i - 1), s1 = secant(i);
      if (s0 * s1 <= 0.0) {
        d_[i] = 0.0;
      } else {
        const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
        const double w0 = 2.0 * h1 + h0, w1 = h1 + 2.0 * h0;
        d_[i] = (w0 + w1) / (w0 / s0 + w1 / s1);
      }
    }
    d_[0] = end_slope(x_[1] - x_[0], x_[2] - x_[1], secant(0), secant(1));
    d_[n - 1] = end_slope(x_[n - 2] - x_[n - 3], x_[n - 1] - x_[n - 2], secant(n - 3),
                          secant(n - 2), true);
  }

  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }

  double value(double x) const
  {
    const std::size_t i = locate(x);
    if (x == x_[i]) return y_[i];
    if (x == x_[i + 1]) return y_[i + 1];
    double t, h, c2, c3;
    coeffs(i, x, t, h, c2, c3);
    return y_[i] + t * (d_[i] + t * (c2 + t * c3));
  }

  double derivative(double x) const
  {
    const std::size_t i = locate(x);
    double t, h, c2, c3;
    coeffs(i, x, t, h, c2, c3);
    return d_[i] + t * (2.0 * c2 + 3.0 * t * c3);
  }

private:
  double secant(std::size_t i) const { return (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]); }

  // one-sided three-point end slope with the usual monotonicity clamp
  static double end_slope(double h0, double h1, double s0, double s1, bool right = false)
  {
    const double ha = right ? h1 : h0, hb = right ? h0 : h1;
    const double sa = right ? s1 : s0, sb = right ? s0 : s1;
    double d = ((2.0 * ha + hb) * sa - ha * sb) / (ha + hb);
    if (d * sa <= 0.0)
      d = 0.0;
    else if (sa * sb < 0.0 && std::fabs(d) > 3.0 * std::fabs(sa))
      d = 3.0 * sa;
    return d;
  }

  std::size_t locate(double x) const
  {
    if (x < x_.front() || x > x_.back())
      raise(errc::curve_range_mismatch,
            "pchip: x = " + std::to_string(x) + " outside [" + std::to_string(x_.front())
                + ", " + std::to_string(x_.back()) + "]");
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - x_.begin());
    if (i > 0) --i;
    if (i + 1 >= x_.size()) i = x_.size() - 2;
    return i;
  }

  void coeffs(std::size_t i, double x, double& t, double& h, double& c2, double& c3) const
  {
    h = x_[i + 1] - x_[i];
    t = x - x_[i];
    const double s = secant(i);
    c2 = (3.0 * s - 2.0 * d_[i] - d_[i + 1]) / h;
    c3 = (d_[i] + d_[i + 1] - 2.0 * s) / (h * h);
  }

  std::vector<double> x_, y_, d_;
};

} // namespace lifshift
