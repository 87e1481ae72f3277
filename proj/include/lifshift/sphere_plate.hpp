#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lifshift/constants.hpp"
#include "lifshift/errors.hpp"
#include "lifshift/lifshitz.hpp"
#include "lifshift/optics.hpp"
#include "lifshift/quadrature.hpp"
#include "lifshift/stable_sum.hpp"

namespace lifshift::sphere_plate {

struct roughness_bin {
  double height_m = 0.0; // local surface offset added to the separation
  double weight = 0.0;
};

struct oscillator_geometry {
  double sphere_radius_m = 0.0;
  double resonance_frequency_hz = 0.0;
  double spring_constant_n_per_m = 0.0;
  double a_rms_m = 0.0;                 // r.m.s. vibration amplitude
  std::vector<roughness_bin> roughness; // empty = ideally smooth surfaces

  double max_abs_height() const
  {
    double m = 0.0;
    for (const auto& b : roughness) m = std::max(m, std::fabs(b.height_m));
    return m;
  }

  void validate() const
  {
    if (!(sphere_radius_m > 0.0))
      raise(errc::invalid_geometry, "geometry: sphere radius must be positive");
    if (!(resonance_frequency_hz > 0.0))
      raise(errc::invalid_geometry, "geometry: resonance frequency must be positive");
    if (!(spring_constant_n_per_m > 0.0))
      raise(errc::invalid_geometry, "geometry: spring constant must be positive");
    if (a_rms_m < 0.0) raise(errc::invalid_geometry, "geometry: a_rms must be >= 0");
    if (!roughness.empty()) {
      stable_sum w;
      for (const auto& b : roughness) {
        if (b.weight < 0.0)
          raise(errc::invalid_geometry, "geometry: roughness weights must be >= 0");
        w.add(b.weight);
      }
      if (std::fabs(w.value() - 1.0) > 1e-12)
        raise(errc::invalid_geometry, "geometry: roughness weights must sum to 1");
    }
  }
};

enum class averaging_mode { exact, first_term };

inline const char* to_string(averaging_mode m)
{
  return m == averaging_mode::exact ? "exact" : "first_term";
}

inline std::optional<averaging_mode> averaging_from_string(std::string_view s)
{
  if (s == "exact") return averaging_mode::exact;
  if (s == "first_term") return averaging_mode::first_term;
  return std::nullopt;
}

enum class correction_factor { eta, eta_corr };
enum class correction_direction { multiply, divide };

// Proximity force approximation: sphere-plate force from the plate-plate
// free energy per area, F_sp(z) = 2 pi R F_pp(z). Valid for R >> z.
template <class F>
double pfa_force(double z_m, F&& plate_free_energy, double sphere_radius_m)
{
  if (!(z_m > 0.0)) raise(errc::separation_nonpositive, "pfa_force: separation must be > 0");
  if (!(sphere_radius_m > 0.0))
    raise(errc::invalid_geometry, "pfa_force: sphere radius must be positive");
  return 2.0 * constants::pi * sphere_radius_m * plate_free_energy(z_m);
}

// Gradient of the sphere-plate force: dF_sp/dz = -2 pi R P_pp(z),
// positive for an attractive (negative) plate pressure.
template <class F>
double pfa_gradient(double z_m, F&& plate_pressure, double sphere_radius_m)
{
  if (!(z_m > 0.0)) raise(errc::separation_nonpositive, "pfa_gradient: separation must be > 0");
  if (!(sphere_radius_m > 0.0))
    raise(errc::invalid_geometry, "pfa_gradient: sphere radius must be positive");
  return -2.0 * constants::pi * sphere_radius_m * plate_pressure(z_m);
}

inline bool pfa_ratio_ok(double z_m, double sphere_radius_m)
{
  return sphere_radius_m / z_m > 100.0;
}

// Vibration factor of the original analysis, sqrt(1 + A_rms^2 / z^2).
inline double eta(double z_m, double a_rms_m)
{
  if (!(z_m > 0.0)) raise(errc::separation_nonpositive, "eta: separation must be > 0");
  const double r = a_rms_m / z_m;
  return std::sqrt(1.0 + r * r);
}

// Corrected vibration factor, sqrt(1 + 3 A_rms^2 / (2 z^2)).
inline double eta_corr(double z_m, double a_rms_m)
{
  if (!(z_m > 0.0)) raise(errc::separation_nonpositive, "eta_corr: separation must be > 0");
  const double r = a_rms_m / z_m;
  return std::sqrt(1.0 + 1.5 * r * r);
}

// Separation correction applied to measured separations. The factor is always
// evaluated at the uncorrected value, so multiply maps z to z*sqrt(1 + c A^2/z^2)
// = sqrt(z^2 + c A^2) and divide is its exact inverse, recovering the measured
// separation from a corrected one (round trip is the identity).
inline double apply_separation_correction(double z_raw_m, double a_rms_m, correction_factor which,
                                          correction_direction direction)
{
  if (!(z_raw_m > 0.0))
    raise(errc::separation_nonpositive, "apply_separation_correction: separation must be > 0");
  if (direction == correction_direction::multiply) {
    const double f =
        which == correction_factor::eta ? eta(z_raw_m, a_rms_m) : eta_corr(z_raw_m, a_rms_m);
    return z_raw_m * f;
  }
  const double c = which == correction_factor::eta ? 1.0 : 1.5;
  const double inside = z_raw_m * z_raw_m - c * a_rms_m * a_rms_m;
  if (!(inside > 0.0))
    raise(errc::separation_nonpositive,
          "apply_separation_correction: no positive separation maps to this corrected value");
  return std::sqrt(inside);
}

// Weighted average of f over the surface-height histogram,
// sum_i w_i f(z + h_i); an empty histogram means smooth surfaces.
template <class F>
double rough_average(F&& f, double z_m, const std::vector<roughness_bin>& roughness)
{
  if (!(z_m > 0.0)) raise(errc::separation_nonpositive, "rough_average: separation must be > 0");
  if (roughness.empty()) return f(z_m);
  stable_sum total, weights;
  for (const auto& b : roughness) {
    if (b.weight < 0.0) raise(errc::invalid_geometry, "rough_average: weights must be >= 0");
    const double zi = z_m + b.height_m;
    if (!(zi > 0.0))
      raise(errc::separation_nonpositive,
            "rough_average: separation closes under a roughness offset of "
                + std::to_string(b.height_m) + " m");
    total.add(b.weight * f(zi));
    weights.add(b.weight);
  }
  if (std::fabs(weights.value() - 1.0) > 1e-12)
    raise(errc::invalid_geometry, "rough_average: weights must sum to 1");
  return total.value();
}

// Frequency shift of the oscillator from the force gradient,
// delta_f = -(f0 / 2 kappa) <G>. first_term evaluates G at the mean
// separation only; exact averages G over one sinusoidal oscillation
// period with peak amplitude sqrt(2) A_rms.
template <class G>
double frequency_shift(double z_m, G&& force_gradient, const oscillator_geometry& geom,
                       averaging_mode averaging)
{
  geom.validate();
  if (!(z_m > 0.0))
    raise(errc::separation_nonpositive, "frequency_shift: separation must be > 0");
  const double peak = std::sqrt(2.0) * geom.a_rms_m;
  if (z_m <= peak)
    raise(errc::amplitude_exceeds_separation,
          "frequency_shift: peak vibration amplitude " + std::to_string(peak)
              + " m reaches the separation " + std::to_string(z_m) + " m");

  auto g_rough = [&](double z) { return rough_average(force_gradient, z, geom.roughness); };
  const double pref =
      -geom.resonance_frequency_hz / (2.0 * geom.spring_constant_n_per_m);
  if (averaging == averaging_mode::first_term || peak == 0.0) return pref * g_rough(z_m);
  return pref
         * periodic_mean([&](double th) { return g_rough(z_m + peak * std::cos(th)); }, 1e-6,
                         "oscillation average");
}

struct curve_point {
  double z_m = 0.0;
  double delta_f_hz = 0.0;
  double z_delta_f_hz_m = 0.0; // z * delta_f
};

struct frequency_shift_curve {
  std::vector<curve_point> points;
  std::string model_tag;     // permittivity mode
  std::string averaging_tag; // exact | first_term
};

// Full pipeline over a separation grid: Lifshitz plate pressure -> PFA
// force gradient -> roughness and oscillation averaging -> frequency shift.
inline frequency_shift_curve theory_curve(const std::vector<double>& z_grid_m,
                                          const optics::permittivity_spec& spec,
                                          const lifshitz::lifshitz_settings& settings,
                                          const oscillator_geometry& geom,
                                          averaging_mode averaging)
{
  spec.validate();
  settings.validate();
  geom.validate();
  for (std::size_t i = 1; i < z_grid_m.size(); ++i)
    if (!(z_grid_m[i] > z_grid_m[i - 1]))
      raise(errc::invalid_grid, "theory_curve: separation grid must be strictly increasing");

  const double reach = std::sqrt(2.0) * geom.a_rms_m + geom.max_abs_height();
  for (double z : z_grid_m)
    if (!(z > reach))
      raise(errc::amplitude_exceeds_separation,
            "theory_curve: z = " + std::to_string(z)
                + " m is within vibration amplitude plus roughness reach "
                + std::to_string(reach) + " m");

  frequency_shift_curve curve;
  curve.model_tag = optics::to_string(spec.mode);
  curve.averaging_tag = to_string(averaging);

  // one permittivity ladder for the whole grid; eps(i xi_l) does not
  // depend on the separation
  lifshitz::eps_ladder ladder(spec, settings.temperature_k);
  auto gradient = [&](double z) {
    return pfa_gradient(
        z,
        [&](double a) { return lifshitz::free_energy_per_area(a, spec, settings, &ladder).pressure; },
        geom.sphere_radius_m);
  };

  for (double z : z_grid_m) {
    const double df = frequency_shift(z, gradient, geom, averaging);
    curve.points.push_back({z, df, z * df});
  }
  return curve;
}

} // namespace lifshift::sphere_plate
