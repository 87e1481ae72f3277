#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "lifshift/constants.hpp"
#include "lifshift/errors.hpp"
#include "lifshift/optics.hpp"
#include "lifshift/quadrature.hpp"
#include "lifshift/stable_sum.hpp"

namespace lifshift::lifshitz {

struct lifshitz_settings {
  double temperature_k = 300.0;
  std::optional<long> l_max;      // empty = auto truncation (capped at 5000)
  double term_tolerance = 1e-8;   // relative tail tolerance of the Matsubara sum
  double k_quad_tolerance = 1e-9; // relative tolerance of the momentum quadrature
  bool zero_t_mode = false;       // replace the l-sum by the T=0 frequency integral

  void validate() const
  {
    if (!zero_t_mode && !(temperature_k > 0.0))
      raise(errc::invalid_settings, "lifshitz: temperature must be positive");
    if (!(term_tolerance > 0.0 && term_tolerance <= 1e-2))
      raise(errc::invalid_settings, "lifshitz: term tolerance must be in (0, 1e-2]");
    if (!(k_quad_tolerance > 0.0 && k_quad_tolerance <= 1e-2))
      raise(errc::invalid_settings, "lifshitz: quadrature tolerance must be in (0, 1e-2]");
    if (l_max && *l_max < 1)
      raise(errc::invalid_settings, "lifshitz: explicit l_max must be >= 1");
  }
};

struct plate_result {
  double separation_m = 0.0;
  double free_energy_per_area = 0.0; // J/m^2, negative for attraction
  double pressure = 0.0;             // Pa, negative for attraction
  long terms_used = 0;               // Matsubara terms summed (0 in zero-T mode)
  double est_error = 0.0;            // relative, truncation tail + quadrature
};

// Matsubara frequency xi_l = 2 pi k_B T l / hbar, returned in eV.
inline double matsubara_frequency(long l, double temperature_k)
{
  if (l < 0) raise(errc::invalid_argument, "matsubara_frequency: l must be >= 0");
  if (!(temperature_k > 0.0))
    raise(errc::invalid_argument, "matsubara_frequency: temperature must be positive");
  return 2.0 * constants::pi * constants::k_boltzmann * temperature_k
         * static_cast<double>(l) / constants::electron_volt;
}

struct reflection {
  double r_tm = 0.0;
  double r_te = 0.0;
};

// Fresnel coefficients at imaginary frequency for a vacuum/metal interface,
// q = sqrt(k^2 + xi^2/c^2), k_eps = sqrt(k^2 + eps xi^2/c^2).
inline reflection fresnel_imaginary(double xi_ev, double k_per_m, double eps)
{
  if (xi_ev < 0.0) raise(errc::invalid_argument, "fresnel_imaginary: xi must be >= 0");
  if (!(k_per_m > 0.0)) raise(errc::invalid_argument, "fresnel_imaginary: k must be positive");
  if (!(eps >= 1.0)) raise(errc::invalid_argument, "fresnel_imaginary: eps must be >= 1");
  const double xi_c = constants::ev_to_rad_s(xi_ev) / constants::c_light;
  const double q = std::hypot(k_per_m, xi_c);
  const double keps = std::sqrt(k_per_m * k_per_m + eps * xi_c * xi_c);
  return {(eps * q - keps) / (eps * q + keps), (q - keps) / (q + keps)};
}

namespace detail {

// Same coefficients in the dimensionless variables of the y-integral:
// y = 2 a q, y_l = 2 a xi_l / c. Multiplication order keeps
// (eps - 1) * y_l^2 finite when eps is huge and y_l tiny.
inline reflection reflection_dimensionless(double y, double y_l, double eps)
{
  const double keps = std::sqrt(y * y + ((eps - 1.0) * y_l) * y_l);
  return {(eps * y - keps) / (eps * y + keps), (y - keps) / (y + keps)};
}

// Dimensionless one-term integrals over y in [y_l, inf):
//   f_alpha = int y ln(1 - r_alpha^2 e^-y) dy      (free energy kernel)
//   p_alpha = int y^2 r_alpha^2 e^-y / (1 - r_alpha^2 e^-y) dy
// r2 is a callable y -> (r_TM^2, r_TE^2). The integrand is dead beyond
// y_l + 90 (e^-90 ~ 8e-40), so the last seeded panel ends there.
struct term_integrals {
  double f_tm = 0.0, f_te = 0.0;
  double p_tm = 0.0, p_te = 0.0;
  double abs_error = 0.0;
};

inline constexpr std::array<double, 7> y_panels = {0.0, 1.0, 3.0, 7.0, 15.0, 31.0, 90.0};

template <class R2>
term_integrals y_integrals(double y_l, R2&& r2, const quad_options& opt)
{
  auto f = [&](double y) -> std::array<double, 4> {
    const auto [r2_tm, r2_te] = r2(y);
    const double em = std::exp(-y);
    const double t_tm = r2_tm * em;
    const double t_te = r2_te * em;
    return {y * std::log1p(-t_tm), y * std::log1p(-t_te),
            y * y * t_tm / (1.0 - t_tm), y * y * t_te / (1.0 - t_te)};
  };
  std::array<stable_sum, 4> acc{};
  stable_sum err;
  for (std::size_t i = 0; i + 1 < y_panels.size(); ++i) {
    const auto r = integrate_adaptive<4>(f, y_l + y_panels[i], y_l + y_panels[i + 1], opt);
    for (std::size_t j = 0; j < 4; ++j) {
      acc[j].add(r.value[j]);
      err.add(r.error[j]);
    }
  }
  return {acc[0].value(), acc[1].value(), acc[2].value(), acc[3].value(), err.value()};
}

inline bool drude_like(optics::eps_mode m)
{
  return m == optics::eps_mode::pure_drude || m == optics::eps_mode::tabulated_drude;
}

// l = 0 kernels. Drude modes: r_TM = 1, r_TE = 0 (the TE reflection dies
// with eps xi^2 -> 0). Plasma modes: eps xi^2 -> omega_p^2 stays finite,
// leaving r_TE = (y - sqrt(y^2 + w^2)) / (y + sqrt(y^2 + w^2)).
inline term_integrals zero_term_integrals(double a_m, const optics::permittivity_spec& spec,
                                          const quad_options& opt)
{
  if (drude_like(spec.mode))
    return y_integrals(0.0, [](double) { return std::array<double, 2>{1.0, 0.0}; }, opt);
  const double w = 2.0 * a_m * constants::ev_to_rad_s(spec.drude.omega_p_ev) / constants::c_light;
  return y_integrals(0.0,
                     [w](double y) {
                       const double keps = std::sqrt(y * y + w * w);
                       const double r_te = (y - keps) / (y + keps);
                       return std::array<double, 2>{1.0, r_te * r_te};
                     },
                     opt);
}

inline term_integrals finite_term_integrals(double y_l, double eps, const quad_options& opt)
{
  return y_integrals(y_l,
                     [y_l, eps](double y) {
                       const auto r = reflection_dimensionless(y, y_l, eps);
                       return std::array<double, 2>{r.r_tm * r.r_tm, r.r_te * r.r_te};
                     },
                     opt);
}

} // namespace detail

// Lazily extended cache of eps(i xi_l); the ladder depends only on the
// permittivity spec and temperature, so one instance serves a whole
// separation grid (the Kramers-Kronig quadrature dominates otherwise).
class eps_ladder {
public:
  eps_ladder(const optics::permittivity_spec& spec, double temperature_k)
      : spec_(&spec), temperature_k_(temperature_k)
  {
  }

  double at(long l)
  {
    if (l < 1) raise(errc::invalid_argument, "eps_ladder: l must be >= 1");
    while (static_cast<long>(eps_.size()) < l)
      eps_.push_back(optics::eps_imag_axis(
          matsubara_frequency(static_cast<long>(eps_.size()) + 1, temperature_k_), *spec_));
    return eps_[static_cast<std::size_t>(l - 1)];
  }

private:
  const optics::permittivity_spec* spec_;
  double temperature_k_;
  std::vector<double> eps_;
};

struct term_contribution {
  double free_energy_tm = 0.0; // J/m^2, includes the l = 0 half weight
  double free_energy_te = 0.0;
  double pressure_tm = 0.0; // Pa
  double pressure_te = 0.0;

  double free_energy() const { return free_energy_tm + free_energy_te; }
  double pressure() const { return pressure_tm + pressure_te; }
};

namespace detail {

inline term_contribution matsubara_term_impl(double a_m, long l,
                                             const optics::permittivity_spec& spec,
                                             const lifshitz_settings& s, eps_ladder& ladder,
                                             const quad_options& opt, double* abs_error = nullptr)
{
  const double k_bt = constants::k_boltzmann * s.temperature_k;
  const double pref_f = k_bt / (8.0 * constants::pi * a_m * a_m);
  const double pref_p = k_bt / (8.0 * constants::pi * a_m * a_m * a_m);
  term_integrals ti;
  double weight = 1.0;
  if (l == 0) {
    ti = zero_term_integrals(a_m, spec, opt);
    weight = 0.5;
  } else {
    const double xi = constants::ev_to_rad_s(matsubara_frequency(l, s.temperature_k));
    ti = finite_term_integrals(2.0 * a_m * xi / constants::c_light, ladder.at(l), opt);
  }
  if (abs_error) *abs_error = weight * std::max(pref_f, pref_p) * ti.abs_error;
  return {weight * pref_f * ti.f_tm, weight * pref_f * ti.f_te, -weight * pref_p * ti.p_tm,
          -weight * pref_p * ti.p_te};
}

} // namespace detail

// Single Matsubara term of the plate-plate sum, split by polarization.
// The l = 0 term carries its 1/2 weight already.
inline term_contribution matsubara_term(double a_m, long l,
                                        const optics::permittivity_spec& spec,
                                        const lifshitz_settings& s)
{
  if (!(a_m > 0.0)) raise(errc::separation_nonpositive, "matsubara_term: separation must be > 0");
  if (l < 0) raise(errc::invalid_argument, "matsubara_term: l must be >= 0");
  spec.validate();
  s.validate();
  eps_ladder ladder(spec, s.temperature_k);
  const quad_options opt{s.k_quad_tolerance, 48, "lifshitz momentum quadrature"};
  return detail::matsubara_term_impl(a_m, l, spec, s, ladder, opt);
}

namespace detail {

// T = 0: the l-sum becomes (hbar / 2 pi) int dxi; in the variables
// y = 2 a q, x = xi / (c q) that is
//   F = hbar c / (32 pi^2 a^3) int_0^inf y^2 dy int_0^1 dx sum_a ln(1 - r_a^2 e^-y)
//   P = -hbar c / (32 pi^2 a^4) int_0^inf y^3 dy int_0^1 dx sum_a r_a^2 e^-y / (1 - ...)
// (checked against the ideal-metal laws pi^2 hbar c / 720 a^3, / 240 a^4).
inline plate_result zero_t_result(double a_m, const optics::permittivity_spec& spec,
                                  const lifshitz_settings& s)
{
  const quad_options opt{s.k_quad_tolerance * 0.5, 48, "zero-T frequency quadrature"};
  const double xi_scale_ev =
      constants::rad_s_to_ev(constants::c_light / (2.0 * a_m)); // xi = x y * this

  auto outer = [&](double y) -> std::array<double, 2> {
    const double em = std::exp(-y);
    auto inner = [&](double x) -> std::array<double, 2> {
      const double eps = optics::eps_imag_axis(x * y * xi_scale_ev, spec);
      const auto r = reflection_dimensionless(y, x * y, eps);
      const double t_tm = r.r_tm * r.r_tm * em;
      const double t_te = r.r_te * r.r_te * em;
      return {std::log1p(-t_tm) + std::log1p(-t_te),
              t_tm / (1.0 - t_tm) + t_te / (1.0 - t_te)};
    };
    const auto ri = integrate_adaptive<2>(inner, 0.0, 1.0, opt);
    return {y * y * ri.value[0], y * y * y * ri.value[1]};
  };

  std::array<stable_sum, 2> acc{};
  for (std::size_t i = 0; i + 1 < y_panels.size(); ++i) {
    const auto r = integrate_adaptive<2>(outer, y_panels[i], y_panels[i + 1], opt);
    acc[0].add(r.value[0]);
    acc[1].add(r.value[1]);
  }
  const double hc = constants::hbar * constants::c_light;
  const double pref = hc / (32.0 * constants::pi * constants::pi * a_m * a_m * a_m);
  plate_result out;
  out.separation_m = a_m;
  out.free_energy_per_area = pref * acc[0].value();
  out.pressure = -pref / a_m * acc[1].value();
  out.terms_used = 0;
  out.est_error = 2.0 * s.k_quad_tolerance;
  return out;
}

} // namespace detail

// Plate-plate Casimir free energy per unit area and pressure at separation
// a_m. Auto truncation stops once three consecutive terms fall below
// term_tolerance scaled by (1 - e^-y1): consecutive terms shrink by about
// e^-y1, so the geometric tail is term / (1 - e^-y1) and the scaling keeps
// the discarded tail itself below term_tolerance relative.
inline plate_result free_energy_per_area(double a_m, const optics::permittivity_spec& spec,
                                         const lifshitz_settings& s, eps_ladder* shared = nullptr)
{
  if (!(a_m > 0.0))
    raise(errc::separation_nonpositive, "free_energy_per_area: separation must be > 0");
  spec.validate();
  s.validate();
  if (s.zero_t_mode) return detail::zero_t_result(a_m, spec, s);

  eps_ladder local(spec, s.temperature_k);
  eps_ladder& ladder = shared ? *shared : local;
  const quad_options opt{s.k_quad_tolerance, 48, "lifshitz momentum quadrature"};

  const double y1 =
      2.0 * a_m * constants::ev_to_rad_s(matsubara_frequency(1, s.temperature_k))
      / constants::c_light;
  const double stop_tol = s.term_tolerance * (1.0 - std::exp(-y1));
  const long cap = s.l_max ? *s.l_max : 5000;

  stable_sum f_sum, p_sum, quad_err;
  long l = 0;
  int streak = 0;
  double last_rel = 1.0;
  for (;; ++l) {
    if (l > cap)
      raise(errc::truncation_not_converged,
            "free_energy_per_area: Matsubara sum not converged by l_max = " + std::to_string(cap)
                + " at a = " + std::to_string(a_m) + " m"
                + (s.l_max ? "" : " (auto cap; set l_max explicitly to extend)"));
    double term_err = 0.0;
    const auto term = detail::matsubara_term_impl(a_m, l, spec, s, ladder, opt, &term_err);
    f_sum.add(term.free_energy());
    p_sum.add(term.pressure());
    quad_err.add(term_err);
    if (l == 0) continue;
    const double rel = std::max(std::fabs(term.free_energy() / f_sum.value()),
                                std::fabs(term.pressure() / p_sum.value()));
    last_rel = rel;
    if (rel < stop_tol) {
      if (++streak == 3) break;
    } else {
      streak = 0;
    }
  }

  plate_result out;
  out.separation_m = a_m;
  out.free_energy_per_area = f_sum.value();
  out.pressure = p_sum.value();
  out.terms_used = l + 1;
  const double tail_rel = last_rel / (1.0 - std::exp(-y1));
  const double quad_rel = std::fabs(quad_err.value() / p_sum.value());
  out.est_error = tail_rel + quad_rel;
  return out;
}

} // namespace lifshift::lifshitz
