#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lifshift/errors.hpp"
#include "lifshift/gamma.hpp"
#include "lifshift/interp.hpp"
#include "lifshift/sphere_plate.hpp"
#include "lifshift/stable_sum.hpp"

namespace lifshift::stats {

struct measurement_point {
  double z_m = 0.0;
  double delta_f_hz = 0.0;
  double sigma_f_hz = 0.0;
  std::optional<double> sigma_z_m;
};

struct measurement_dataset {
  std::vector<measurement_point> points;
  std::string label;

  void validate() const
  {
    if (points.empty()) raise(errc::invalid_dataset, "dataset: no points");
    double prev = 0.0;
    for (const auto& p : points) {
      if (!(p.z_m > prev))
        raise(errc::invalid_dataset, "dataset: separations must be positive, strictly increasing");
      if (!(p.sigma_f_hz > 0.0))
        raise(errc::invalid_dataset, "dataset: sigma_f must be positive");
      if (p.sigma_z_m && !(*p.sigma_z_m >= 0.0))
        raise(errc::invalid_dataset, "dataset: sigma_z must be >= 0");
      prev = p.z_m;
    }
  }
};

namespace detail {

inline std::string fmt_um(double z_m)
{
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g um", z_m * 1e6);
  return buf;
}

} // namespace detail

enum class sigma_mode { f_only, combined };

inline const char* to_string(sigma_mode m)
{
  return m == sigma_mode::f_only ? "f_only" : "combined";
}

inline std::optional<sigma_mode> sigma_mode_from_string(std::string_view s)
{
  if (s == "f_only") return sigma_mode::f_only;
  if (s == "combined") return sigma_mode::combined;
  return std::nullopt;
}

struct chi2_report {
  double chi2 = 0.0;
  long dof = 0;                       // defaults to N; callers subtract fit parameters
  std::optional<double> probability;  // survival probability, filled by the caller
  sigma_mode sigma = sigma_mode::f_only;
  std::vector<double> per_point;    // ((d - t) / sigma_eff)^2
  std::vector<double> theory_hz;    // theory curve at the data separations
  std::vector<double> sigma_eff_hz; // effective sigma actually used per point
};

// Per-point squared residuals of data against a theory curve. The curve is
// interpolated monotonically between its nodes and returns node values
// exactly, so data equal to the curve gives chi2 = 0 bitwise. combined
// mode folds the separation error through the local theory slope:
// sigma_eff^2 = sigma_f^2 + (d delta_f / dz)^2 sigma_z^2.
inline chi2_report chi2(const measurement_dataset& data,
                        const sphere_plate::frequency_shift_curve& theory, sigma_mode mode)
{
  data.validate();
  std::vector<double> xs, ys;
  xs.reserve(theory.points.size());
  ys.reserve(theory.points.size());
  for (const auto& p : theory.points) {
    xs.push_back(p.z_m);
    ys.push_back(p.delta_f_hz);
  }
  if (xs.size() < 2)
    raise(errc::curve_range_mismatch, "chi2: theory curve needs at least 2 points");
  const pchip curve(std::move(xs), std::move(ys));

  chi2_report report;
  report.sigma = mode;
  report.dof = static_cast<long>(data.points.size());
  stable_sum total;
  for (const auto& p : data.points) {
    if (p.z_m < curve.x_min() || p.z_m > curve.x_max())
      raise(errc::curve_range_mismatch,
            "chi2: data point z = " + detail::fmt_um(p.z_m) + " outside theory curve range ["
                + detail::fmt_um(curve.x_min()) + ", " + detail::fmt_um(curve.x_max()) + "]");
    const double t = curve.value(p.z_m);
    double var = p.sigma_f_hz * p.sigma_f_hz;
    if (mode == sigma_mode::combined) {
      if (!p.sigma_z_m)
        raise(errc::missing_sigma_z,
              "chi2: combined mode needs sigma_z at z = " + detail::fmt_um(p.z_m));
      const double slope = curve.derivative(p.z_m);
      var += slope * slope * *p.sigma_z_m * *p.sigma_z_m;
    }
    const double resid = p.delta_f_hz - t;
    const double contrib = resid * resid / var;
    report.per_point.push_back(contrib);
    report.theory_hz.push_back(t);
    report.sigma_eff_hz.push_back(std::sqrt(var));
    total.add(contrib);
  }
  report.chi2 = total.value();
  return report;
}

// Survival probability of a chi-squared statistic: Q(dof/2, chi2/2),
// the regularized upper incomplete gamma.
inline double chi2_survival(double chi2_value, long dof)
{
  if (!(chi2_value >= 0.0)) raise(errc::invalid_argument, "chi2_survival: chi2 must be >= 0");
  if (dof < 1) raise(errc::invalid_dof, "chi2_survival: dof must be >= 1");
  return gamma_q(0.5 * static_cast<double>(dof), 0.5 * chi2_value);
}

struct exclusion_result {
  long count = 0;
  double partial_chi2 = 0.0;
};

// Points whose individual residual is at least threshold_sigma standard
// deviations; their partial chi2 lower-bounds any fit that leaves these
// residuals untouched.
inline exclusion_result exclusion_subset(const chi2_report& report, double threshold_sigma)
{
  if (!(threshold_sigma >= 0.0))
    raise(errc::invalid_argument, "exclusion_subset: threshold must be >= 0");
  const double cut = threshold_sigma * threshold_sigma;
  exclusion_result out;
  stable_sum partial;
  for (double c : report.per_point) {
    if (c >= cut) {
      ++out.count;
      partial.add(c);
    }
  }
  out.partial_chi2 = partial.value();
  return out;
}

} // namespace lifshift::stats
