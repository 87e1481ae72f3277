#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lifshift/constants.hpp"
#include "lifshift/errors.hpp"
#include "lifshift/quadrature.hpp"

namespace lifshift::optics {

struct optical_point {
  double energy_ev = 0.0;
  double im_eps = 0.0;
};

struct nk_row {
  double energy_ev = 0.0;
  double n = 0.0;
  double k = 0.0;
};

struct im_eps_row {
  double energy_ev = 0.0;
  double im_eps = 0.0;
};

// Tabulated Im eps(omega) on a strictly increasing positive energy grid.
// Inside the grid Im eps is interpolated linearly in log-log coordinates
// (optical tables span decades; log-log preserves positivity). Segments
// touching a zero value fall back to linear interpolation.
class optical_table {
public:
  optical_table() = default;

  static optical_table from_im_eps(std::vector<im_eps_row> rows, std::string source_label = {})
  {
    std::vector<optical_point> pts;
    pts.reserve(rows.size());
    for (const auto& r : rows) pts.push_back({r.energy_ev, r.im_eps});
    return optical_table(std::move(pts), std::move(source_label));
  }

  static optical_table from_nk(std::vector<nk_row> rows, std::string source_label = {})
  {
    std::vector<optical_point> pts;
    pts.reserve(rows.size());
    for (const auto& r : rows) {
      if (r.n < 0.0 || r.k < 0.0)
        raise(errc::negative_im_eps, "optical table: n and k must be nonnegative at "
                                         + std::to_string(r.energy_ev) + " eV");
      pts.push_back({r.energy_ev, 2.0 * r.n * r.k}); // Im eps = 2 n k
    }
    return optical_table(std::move(pts), std::move(source_label));
  }

  const std::vector<optical_point>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  const std::string& source_label() const { return source_label_; }
  double min_energy() const { return points_.front().energy_ev; }
  double max_energy() const { return points_.back().energy_ev; }

  double im_eps_at(double omega_ev) const
  {
    if (omega_ev < min_energy() || omega_ev > max_energy())
      raise(errc::invalid_argument, "optical table: energy " + std::to_string(omega_ev)
                                        + " eV outside tabulated range");
    auto it = std::upper_bound(points_.begin(), points_.end(), omega_ev,
                               [](double v, const optical_point& p) { return v < p.energy_ev; });
    std::size_t i = static_cast<std::size_t>(it - points_.begin());
    if (i > 0) --i;
    if (i + 1 >= points_.size()) i = points_.size() - 2;
    return segment_im_eps(points_[i], points_[i + 1], omega_ev);
  }

  static double segment_im_eps(const optical_point& a, const optical_point& b, double omega_ev)
  {
    if (omega_ev == a.energy_ev) return a.im_eps;
    if (omega_ev == b.energy_ev) return b.im_eps;
    if (a.im_eps > 0.0 && b.im_eps > 0.0) {
      const double p = std::log(b.im_eps / a.im_eps) / std::log(b.energy_ev / a.energy_ev);
      return a.im_eps * std::pow(omega_ev / a.energy_ev, p);
    }
    const double t = (omega_ev - a.energy_ev) / (b.energy_ev - a.energy_ev);
    return a.im_eps + t * (b.im_eps - a.im_eps);
  }

private:
  optical_table(std::vector<optical_point> pts, std::string label)
      : points_(std::move(pts)), source_label_(std::move(label))
  {
    if (points_.empty()) raise(errc::empty_table, "optical table: no rows");
    std::stable_sort(points_.begin(), points_.end(),
                     [](const optical_point& a, const optical_point& b) {
                       return a.energy_ev < b.energy_ev;
                     });
    if (points_.size() < 2) raise(errc::empty_table, "optical table: need at least 2 rows");
    for (const auto& p : points_) {
      if (!(p.energy_ev > 0.0))
        raise(errc::nonpositive_frequency, "optical table: energies must be positive");
      if (p.im_eps < 0.0)
        raise(errc::negative_im_eps, "optical table: Im eps < 0 at "
                                         + std::to_string(p.energy_ev) + " eV");
    }
    for (std::size_t i = 1; i < points_.size(); ++i)
      if (!(points_[i].energy_ev > points_[i - 1].energy_ev))
        raise(errc::non_monotonic_energy, "optical table: duplicate energy "
                                              + std::to_string(points_[i].energy_ev) + " eV");
  }

  std::vector<optical_point> points_;
  std::string source_label_;
};

struct drude_params {
  double omega_p_ev = 0.0; // plasma frequency
  double gamma_ev = 0.0;   // relaxation parameter
};

enum class eps_mode {
  tabulated_drude,  // table + Drude extension to zero frequency
  tabulated_plasma, // plasma term + core-electron part of the table
  pure_drude,
  pure_plasma,
};

inline const char* to_string(eps_mode m)
{
  switch (m) {
    case eps_mode::tabulated_drude: return "tabulated_drude";
    case eps_mode::tabulated_plasma: return "tabulated_plasma";
    case eps_mode::pure_drude: return "pure_drude";
    case eps_mode::pure_plasma: return "pure_plasma";
  }
  return "?";
}

inline std::optional<eps_mode> eps_mode_from_string(std::string_view s)
{
  if (s == "tabulated_drude") return eps_mode::tabulated_drude;
  if (s == "tabulated_plasma") return eps_mode::tabulated_plasma;
  if (s == "pure_drude") return eps_mode::pure_drude;
  if (s == "pure_plasma") return eps_mode::pure_plasma;
  return std::nullopt;
}

struct permittivity_spec {
  eps_mode mode = eps_mode::pure_drude;
  drude_params drude;
  std::optional<optical_table> table;
  double core_cutoff_ev = 2.0;  // interband onset used by tabulated_plasma
  double tail_exponent = 3.0;   // Im eps ~ omega^-tail above the table
  double quad_tolerance = 1e-6; // relative tolerance of the KK quadrature

  bool tabulated() const
  {
    return mode == eps_mode::tabulated_drude || mode == eps_mode::tabulated_plasma;
  }

  void validate() const
  {
    if (!(drude.omega_p_ev > 0.0))
      raise(errc::invalid_spec, "permittivity: omega_p must be positive");
    if (drude.gamma_ev < 0.0) raise(errc::invalid_spec, "permittivity: gamma must be >= 0");
    if (tabulated() != table.has_value())
      raise(errc::invalid_spec, "permittivity: optical table required exactly in tabulated modes");
    if (!(tail_exponent > 0.0))
      raise(errc::invalid_spec, "permittivity: tail exponent must be positive");
    if (!(quad_tolerance > 0.0 && quad_tolerance <= 1e-2))
      raise(errc::invalid_spec, "permittivity: quadrature tolerance must be in (0, 1e-2]");
    if (mode == eps_mode::tabulated_plasma
        && (core_cutoff_ev < table->min_energy() || core_cutoff_ev > table->max_energy()))
      raise(errc::invalid_spec, "permittivity: core cutoff " + std::to_string(core_cutoff_ev)
                                    + " eV outside the table range");
  }
};

// Im eps of the Drude model, omega_p^2 gamma / (omega (omega^2 + gamma^2)).
inline double drude_im_eps(double omega_ev, const drude_params& p)
{
  if (!(omega_ev > 0.0))
    raise(errc::nonpositive_frequency, "drude_im_eps: omega must be positive");
  const double wp2 = p.omega_p_ev * p.omega_p_ev;
  return wp2 * p.gamma_ev / (omega_ev * (omega_ev * omega_ev + p.gamma_ev * p.gamma_ev));
}

namespace detail {

// int_0^W domega / ((omega^2+gamma^2)(omega^2+xi^2)), closed form.
// Partial fractions give (g(gamma)-g(xi))/(xi^2-gamma^2) with
// g(u) = atan(W/u)/u; near xi = gamma that cancels, so switch to the
// derivative form at the midpoint.
inline double head_kernel_integral(double w_top, double gamma, double xi)
{
  auto g = [w_top](double u) { return std::atan2(w_top, u) / u; };
  if (std::fabs(xi - gamma) > 1e-7 * (xi + gamma))
    return (g(gamma) - g(xi)) / (xi * xi - gamma * gamma);
  const double m = 0.5 * (xi + gamma);
  const double minus_gprime = w_top / (m * (m * m + w_top * w_top)) + g(m) / m;
  return minus_gprime / (xi + gamma);
}

// int over one table segment of omega ImEps(omega) / (omega^2 + xi^2),
// with ImEps the segment's log-log (or linear-fallback) interpolant.
inline double segment_integral(const optical_point& a, const optical_point& b, double lo,
                               double hi, double xi, const quad_options& opt)
{
  const double xi2 = xi * xi;
  auto f = [&](double w) {
    return optical_table::segment_im_eps(a, b, w) * w / (w * w + xi2);
  };
  return integrate(f, lo, hi, opt).value;
}

// Tail contribution divided by im_eps(W): with Im eps = im_eps(W) (omega/W)^-s
// above the table, t = W/omega turns int_W^inf omega ImEps/(omega^2+xi^2) domega
// into im_eps(W) int_0^1 t^(s-1)/(1+(xi t/W)^2) dt. Peeling off the pure power
// (exact value 1/s) leaves an integrand ~ t^(s+1) at zero, tame for any s > 0.
inline double tail_integral(double w_top, double s, double xi, const quad_options& opt)
{
  const double a2 = (xi / w_top) * (xi / w_top);
  auto f = [&](double t) { return std::pow(t, s + 1.0) / (1.0 + a2 * t * t); };
  return 1.0 / s - a2 * integrate(f, 0.0, 1.0, opt).value;
}

inline double kk_integral(double xi, const permittivity_spec& spec, double from_energy)
{
  const optical_table& tab = *spec.table;
  const auto& pts = tab.points();
  quad_options opt{spec.quad_tolerance * 0.25, 40, "optics KK quadrature"};

  stable_sum sum;

  // Drude continuation below the table (tabulated_drude only)
  if (from_energy <= 0.0) {
    const double wp2 = spec.drude.omega_p_ev * spec.drude.omega_p_ev;
    sum.add(wp2 * spec.drude.gamma_ev
            * head_kernel_integral(tab.min_energy(), spec.drude.gamma_ev, xi));
  }

  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double lo = std::max(pts[i].energy_ev, from_energy);
    const double hi = pts[i + 1].energy_ev;
    if (lo >= hi) continue;
    sum.add(segment_integral(pts[i], pts[i + 1], lo, hi, xi, opt));
  }

  const double y_top = pts.back().im_eps;
  if (y_top > 0.0)
    sum.add(y_top * tail_integral(tab.max_energy(), spec.tail_exponent, xi, opt));

  return sum.value();
}

} // namespace detail

// Dielectric permittivity along the imaginary frequency axis, eps(i xi).
// Pure modes are closed forms; tabulated modes evaluate the
// Kramers-Kronig transform  eps = 1 + (2/pi) int omega ImEps / (omega^2 + xi^2).
inline double eps_imag_axis(double xi_ev, const permittivity_spec& spec)
{
  spec.validate();
  if (!(xi_ev > 0.0)) raise(errc::nonpositive_xi, "eps_imag_axis: xi must be positive");

  const double wp2 = spec.drude.omega_p_ev * spec.drude.omega_p_ev;
  switch (spec.mode) {
    case eps_mode::pure_drude:
      return 1.0 + wp2 / (xi_ev * (xi_ev + spec.drude.gamma_ev));
    case eps_mode::pure_plasma:
      return 1.0 + wp2 / (xi_ev * xi_ev);
    case eps_mode::tabulated_drude:
      return 1.0 + (2.0 / constants::pi) * detail::kk_integral(xi_ev, spec, 0.0);
    case eps_mode::tabulated_plasma:
      return 1.0 + wp2 / (xi_ev * xi_ev)
             + (2.0 / constants::pi) * detail::kk_integral(xi_ev, spec, spec.core_cutoff_ev);
  }
  raise(errc::invalid_spec, "eps_imag_axis: unknown mode");
}

} // namespace lifshift::optics
