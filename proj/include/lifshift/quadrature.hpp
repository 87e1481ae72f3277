#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "lifshift/constants.hpp"
#include "lifshift/errors.hpp"
#include "lifshift/stable_sum.hpp"

namespace lifshift {

// 15-point Kronrod extension of 7-point Gauss (QUADPACK constants).
namespace gk {

inline constexpr std::array<double, 8> nodes = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
};

inline constexpr std::array<double, 8> kronrod_weights = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};

inline constexpr std::array<double, 4> gauss_weights = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

} // namespace gk

template <std::size_t N>
struct panel_result {
  std::array<double, N> value{};
  std::array<double, N> error{};
};

// One G7-K15 panel on [a, b] for an integrand returning N components.
// The |K15 - G7| difference is used as a conservative error estimate.
template <std::size_t N, class F>
panel_result<N> gk15_panel(F&& f, double a, double b)
{
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  std::array<stable_sum, N> kron{};
  std::array<stable_sum, N> gauss{};

  for (std::size_t j = 0; j < gk::nodes.size(); ++j) {
    const double x = gk::nodes[j];
    std::array<double, N> fsum{};
    if (x == 0.0) {
      fsum = f(mid);
    } else {
      const auto lo = f(mid - half * x);
      const auto hi = f(mid + half * x);
      for (std::size_t i = 0; i < N; ++i) fsum[i] = lo[i] + hi[i];
    }
    for (std::size_t i = 0; i < N; ++i) kron[i].add(gk::kronrod_weights[j] * fsum[i]);
    if (j % 2 == 1) {
      const std::size_t g = (j - 1) / 2;
      for (std::size_t i = 0; i < N; ++i) gauss[i].add(gk::gauss_weights[g] * fsum[i]);
    }
  }

  panel_result<N> out;
  for (std::size_t i = 0; i < N; ++i) {
    out.value[i] = half * kron[i].value();
    out.error[i] = std::fabs(half * (kron[i].value() - gauss[i].value()));
  }
  return out;
}

struct quad_options {
  double rel_tol = 1e-9;
  int max_depth = 48;
  std::string context = "integral"; // reported on nonconvergence
};

// Adaptive bisection, depth-first left to right, compensated accumulation:
// the evaluation and reduction order is a pure function of the inputs.
// A panel is accepted when its error fits the local relative tolerance or
// a width-proportional share of the global budget rel_tol * |whole-interval
// estimate|; the share term is what lets endpoint behavior like y log y
// (whose GK error is nearly scale-invariant under bisection) terminate.
// Summed over disjoint panels the shares add up to one budget, so the
// total error stays within ~2 * rel_tol of the result for the
// single-signed integrands used here.
template <std::size_t N, class F>
panel_result<N> integrate_adaptive(F&& f, double a, double b, const quad_options& opt)
{
  std::array<stable_sum, N> total{};
  std::array<stable_sum, N> err_total{};

  const panel_result<N> whole = gk15_panel<N>(f, a, b);
  std::array<double, N> budget{};
  for (std::size_t i = 0; i < N; ++i)
    budget[i] = opt.rel_tol * std::fabs(whole.value[i]) / (b - a);

  auto accepted = [&](const panel_result<N>& p, double width) {
    for (std::size_t i = 0; i < N; ++i) {
      if (p.error[i] > opt.rel_tol * std::fabs(p.value[i]) + budget[i] * width + 1e-300)
        return false;
    }
    return true;
  };

  auto refine = [&](auto&& self, double lo, double hi, const panel_result<N>& panel,
                    int depth) -> void {
    if (accepted(panel, hi - lo)) {
      for (std::size_t i = 0; i < N; ++i) {
        total[i].add(panel.value[i]);
        err_total[i].add(panel.error[i]);
      }
      return;
    }
    if (depth >= opt.max_depth)
      raise(errc::quadrature_nonconvergent,
            opt.context + ": estimated error above tolerance at max subdivision depth, panel ["
                + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    const double mid = 0.5 * (lo + hi);
    self(self, lo, mid, gk15_panel<N>(f, lo, mid), depth + 1);
    self(self, mid, hi, gk15_panel<N>(f, mid, hi), depth + 1);
  };

  refine(refine, a, b, whole, 0);

  panel_result<N> out;
  for (std::size_t i = 0; i < N; ++i) {
    out.value[i] = total[i].value();
    out.error[i] = err_total[i].value();
  }
  return out;
}

struct quad_result {
  double value = 0.0;
  double abs_error = 0.0;
};

template <class F>
quad_result integrate(F&& f, double a, double b, const quad_options& opt = {})
{
  auto r = integrate_adaptive<1>(
      [&](double x) { return std::array<double, 1>{f(x)}; }, a, b, opt);
  return {r.value[0], r.error[0]};
}

// Mean of a smooth 2*pi-periodic function by the trapezoidal rule with
// node doubling; converges spectrally for smooth integrands.
template <class F>
double periodic_mean(F&& f, double rel_tol, const std::string& context = "periodic mean")
{
  constexpr double two_pi = 2.0 * constants::pi;
  int n = 8;
  stable_sum s;
  for (int j = 0; j < n; ++j) s.add(f(two_pi * j / n));
  double mean = s.value() / n;

  for (int iter = 0; iter < 20; ++iter) {
    stable_sum mids;
    for (int j = 0; j < n; ++j) mids.add(f(two_pi * (j + 0.5) / n));
    const double refined = 0.5 * (mean + mids.value() / n);
    n *= 2;
    if (std::fabs(refined - mean) <= rel_tol * (std::fabs(refined) + 1e-300)) return refined;
    mean = refined;
  }
  raise(errc::quadrature_nonconvergent, context + ": trapezoidal doubling did not settle");
}

} // namespace lifshift
