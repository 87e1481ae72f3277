#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "lifshift/errors.hpp"

namespace lifshift {

// Regularized incomplete gamma functions P(a,x) and Q(a,x), P + Q = 1.
// Series for x < a+1, Lentz continued fraction otherwise; both converge
// to full double precision for the argument ranges a chi^2 test needs.

namespace detail {

inline double gamma_series_p(double a, double x)
{
  // P(a,x) = x^a e^-x / Gamma(a+1) * sum_n x^n / ((a+1)...(a+n))
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 2000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-17)
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  raise(errc::quadrature_nonconvergent, "incomplete gamma series did not converge");
}

inline double gamma_cf_q(double a, double x)
{
  // Q(a,x) = x^a e^-x / Gamma(a) * 1/(x+1-a- 1*(1-a)/(x+3-a- ...)), Lentz
  const double tiny = std::numeric_limits<double>::min() / 1e-30;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 2000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16)
      return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  raise(errc::quadrature_nonconvergent, "incomplete gamma continued fraction did not converge");
}

} // namespace detail

inline double gamma_p(double a, double x)
{
  if (!(a > 0.0)) raise(errc::invalid_argument, "gamma_p: a must be positive");
  if (x < 0.0) raise(errc::invalid_argument, "gamma_p: x must be nonnegative");
  if (x == 0.0) return 0.0;
  return x < a + 1.0 ? detail::gamma_series_p(a, x) : 1.0 - detail::gamma_cf_q(a, x);
}

inline double gamma_q(double a, double x)
{
  if (!(a > 0.0)) raise(errc::invalid_argument, "gamma_q: a must be positive");
  if (x < 0.0) raise(errc::invalid_argument, "gamma_q: x must be nonnegative");
  if (x == 0.0) return 1.0;
  return x < a + 1.0 ? 1.0 - detail::gamma_series_p(a, x) : detail::gamma_cf_q(a, x);
}

} // namespace lifshift
