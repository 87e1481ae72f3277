#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "lifshift/constants.hpp"
#include "lifshift/errors.hpp"
#include "lifshift/sphere_plate.hpp"

using namespace lifshift;
using namespace lifshift::sphere_plate;
using lifshift::optics::eps_mode;
using lifshift::optics::permittivity_spec;

namespace {

oscillator_geometry test_geometry()
{
  oscillator_geometry g;
  g.sphere_radius_m = 100e-6;
  g.resonance_frequency_hz = 5000.0;
  g.spring_constant_n_per_m = 1.0;
  g.a_rms_m = 0.0;
  return g;
}

permittivity_spec pure_spec(eps_mode mode, double omega_p_ev = 7.54, double gamma_ev = 0.051)
{
  permittivity_spec s;
  s.mode = mode;
  s.drude = {omega_p_ev, gamma_ev};
  return s;
}

optics::optical_table synthetic_drude_table()
{
  std::vector<optics::im_eps_row> rows;
  const int n = 250;
  const double step = std::log(1e8) / (n - 1);
  for (int i = 0; i < n; ++i) {
    const double w = 1e-4 * std::exp(step * i);
    rows.push_back({w, optics::drude_im_eps(w, {7.54, 0.051})});
  }
  return optics::optical_table::from_im_eps(std::move(rows));
}

// closed-form oscillation averages <(1 + e cos)^-n> over one period
double cycle_average_power(int n, double e)
{
  switch (n) {
    case 2: return std::pow(1.0 - e * e, -1.5);
    case 3: return (1.0 + 0.5 * e * e) * std::pow(1.0 - e * e, -2.5);
    case 4: return (1.0 + 1.5 * e * e) * std::pow(1.0 - e * e, -3.5);
  }
  return 0.0;
}

} // namespace

TEST_CASE("pfa converts plate quantities to sphere quantities")
{
  const double hc = constants::hbar * constants::c_light;
  const double z = 100e-9, radius = 100e-6;

  SECTION("ideal-mirror force and gradient through the full plate pipeline")
  {
    lifshitz::lifshitz_settings s;
    s.temperature_k = 1.0;
    s.l_max = 60000;
    const auto spec = pure_spec(eps_mode::pure_plasma, 1e4, 0.0);
    const auto plate = lifshitz::free_energy_per_area(z, spec, s);

    const double force = pfa_force(z, [&](double) { return plate.free_energy_per_area; }, radius);
    const double ideal_force = constants::pi * constants::pi * constants::pi * hc * radius
                               / (360.0 * z * z * z);
    CHECK(force < 0.0);
    CHECK(-force == Catch::Approx(ideal_force).epsilon(0.01));
    CHECK(-force == Catch::Approx(2.722977050309745e-10).epsilon(0.01));

    const double grad = pfa_gradient(z, [&](double) { return plate.pressure; }, radius);
    CHECK(grad > 0.0); // attractive pressure, positive gradient convention
    CHECK(grad == Catch::Approx(0.008168931150929235).epsilon(0.01));
  }

  SECTION("null plate quantities map to zero")
  {
    CHECK(pfa_force(z, [](double) { return 0.0; }, radius) == 0.0);
    CHECK(pfa_gradient(z, [](double) { return 0.0; }, radius) == 0.0);
  }

  SECTION("force is exactly linear in the sphere radius")
  {
    auto f_pp = [](double a) { return -1e-7 / (a * 1e9); };
    CHECK(pfa_force(z, f_pp, 2.0 * radius) == 2.0 * pfa_force(z, f_pp, radius));
  }

  SECTION("validity guard")
  {
    CHECK(pfa_ratio_ok(100e-9, 100e-6));
    CHECK_FALSE(pfa_ratio_ok(100e-9, 5e-6));
    CHECK_THROWS_MATCHES(pfa_force(0.0, [](double) { return 1.0; }, radius), error,
                         Catch::Matchers::Predicate<error>([](const error& e) {
                           return e.code() == errc::separation_nonpositive;
                         }));
  }
}

TEST_CASE("vibration factors")
{
  const double z = 118e-9;

  SECTION("closed forms at reference amplitudes")
  {
    CHECK(eta(z, 0.0) == 1.0);
    CHECK(eta_corr(z, 0.0) == 1.0);
    CHECK(eta(z, z) == Catch::Approx(std::sqrt(2.0)).margin(1e-15));
    CHECK(eta_corr(z, z) == Catch::Approx(std::sqrt(2.5)).margin(1e-15));
    CHECK(eta(z, 0.5 * z) == Catch::Approx(std::sqrt(1.25)).margin(1e-15));
    CHECK(eta_corr(z, 0.5 * z) == Catch::Approx(std::sqrt(1.375)).margin(1e-15));
  }

  SECTION("the corrected factor is strictly larger for any finite amplitude")
  {
    for (double a : {1e-12, 1e-9, 20e-9, z, 3.0 * z}) {
      CHECK(eta_corr(z, a) > eta(z, a));
      CHECK(eta(z, a) > 1.0);
    }
  }

  SECTION("separation correction")
  {
    CHECK(apply_separation_correction(z, 0.0, correction_factor::eta,
                                      correction_direction::multiply)
          == z);
    CHECK(apply_separation_correction(118e-9, 118e-9, correction_factor::eta,
                                      correction_direction::multiply)
          == Catch::Approx(118e-9 * std::sqrt(2.0)).epsilon(1e-15));
    const double once = apply_separation_correction(z, 40e-9, correction_factor::eta_corr,
                                                    correction_direction::multiply);
    const double back = apply_separation_correction(once, 40e-9, correction_factor::eta_corr,
                                                    correction_direction::divide);
    CHECK(back == Catch::Approx(z).epsilon(1e-15));
    const double down = apply_separation_correction(z, 40e-9, correction_factor::eta,
                                                    correction_direction::divide);
    const double up = apply_separation_correction(down, 40e-9, correction_factor::eta,
                                                  correction_direction::multiply);
    CHECK(up == Catch::Approx(z).epsilon(1e-15));
    // no positive separation can shrink to below the amplitude scale
    CHECK_THROWS_AS(apply_separation_correction(30e-9, 40e-9, correction_factor::eta,
                                                correction_direction::divide),
                    error);
    CHECK_THROWS_AS(eta(0.0, 1e-9), error);
  }
}

TEST_CASE("roughness averaging")
{
  const double z = 100e-9;
  auto inv_cube = [](double s) { return 1.0 / (s * s * s); };

  SECTION("trivial histograms pass through")
  {
    CHECK(rough_average(inv_cube, z, {}) == inv_cube(z));
    CHECK(rough_average(inv_cube, z, {{0.0, 1.0}}) == inv_cube(z));
  }

  SECTION("symmetric offsets on a convex function raise the average")
  {
    const std::vector<roughness_bin> bins{{-10e-9, 0.5}, {10e-9, 0.5}};
    const double avg = rough_average(inv_cube, z, bins);
    CHECK(avg / inv_cube(z) == Catch::Approx(1.0615284566922154).epsilon(1e-12));
    CHECK(avg >= inv_cube(z)); // Jensen
  }

  SECTION("weight and separation validation")
  {
    CHECK_THROWS_MATCHES(rough_average(inv_cube, z, {{0.0, 0.6}, {1e-9, 0.6}}), error,
                         Catch::Matchers::Predicate<error>([](const error& e) {
                           return e.code() == errc::invalid_geometry;
                         }));
    CHECK_THROWS_MATCHES(rough_average(inv_cube, z, {{-z, 0.5}, {0.0, 0.5}}), error,
                         Catch::Matchers::Predicate<error>([](const error& e) {
                           return e.code() == errc::separation_nonpositive;
                         }));
  }
}

TEST_CASE("oscillation-averaged frequency shift")
{
  auto geom = test_geometry();
  const double z = 200e-9;

  SECTION("no amplitude: exact equals first_term bitwise")
  {
    auto g = [](double s) { return 1e-4 / (s * 1e9); };
    CHECK(frequency_shift(z, g, geom, averaging_mode::exact)
          == frequency_shift(z, g, geom, averaging_mode::first_term));
  }

  SECTION("constant gradient averages to itself")
  {
    geom.a_rms_m = 50e-9;
    auto g = [](double) { return 3.5e-3; };
    CHECK(frequency_shift(z, g, geom, averaging_mode::exact)
          == frequency_shift(z, g, geom, averaging_mode::first_term));
  }

  SECTION("inverse-cube gradient reproduces the closed-form cycle average")
  {
    geom.a_rms_m = 0.1 * z; // peak / z = sqrt(2) * 0.1
    auto g = [](double s) { return 1.0 / (s * s * s); };
    const double ratio = frequency_shift(z, g, geom, averaging_mode::exact)
                         / frequency_shift(z, g, geom, averaging_mode::first_term);
    CHECK(ratio == Catch::Approx(1.0623220220717753).epsilon(1e-6));
  }

  SECTION("closed-form cycle averages for inverse powers 2, 3, 4")
  {
    for (int n : {2, 3, 4}) {
      geom.a_rms_m = 0.09 * z;
      const double e = std::sqrt(2.0) * geom.a_rms_m / z;
      auto g = [n](double s) { return std::pow(s, -n); };
      const double ratio = frequency_shift(z, g, geom, averaging_mode::exact)
                           / frequency_shift(z, g, geom, averaging_mode::first_term);
      CHECK(ratio == Catch::Approx(cycle_average_power(n, e)).epsilon(1e-6));
    }
  }

  SECTION("second-order series bound for power-law gradients")
  {
    // exact <(1+e cos)^-n> = 1 + n(n+1) e^2/4 + n(n+1)(n+2)(n+3) e^4/64 + ...
    // The second-order truncation error is governed by the quartic term;
    // for n = 2, 3 it stays below 0.5% through e = 0.15, for n = 4 the
    // quartic coefficient 13.125 allows up to ~0.66% there.
    for (int n : {2, 3, 4}) {
      for (double e : {0.05, 0.10, 0.15}) {
        geom.a_rms_m = e * z / std::sqrt(2.0);
        auto g = [n](double s) { return std::pow(s, -n); };
        const double ratio = frequency_shift(z, g, geom, averaging_mode::exact)
                             / frequency_shift(z, g, geom, averaging_mode::first_term);
        const double series = 1.0 + n * (n + 1) * e * e / 4.0;
        const double quartic =
            n * (n + 1) * (n + 2) * (n + 3) * e * e * e * e / 64.0;
        CHECK(std::fabs(ratio - series) <= 1.05 * quartic + 1e-9);
        if (n <= 3) CHECK(std::fabs(ratio / series - 1.0) < 5e-3);
      }
    }
  }

  SECTION("cycle average is symmetric under reversing the phase convention")
  {
    geom.a_rms_m = 30e-9;
    const double peak = std::sqrt(2.0) * geom.a_rms_m;
    auto g = [](double s) { return 1.0 / (s * s * s); };
    const double plus =
        periodic_mean([&](double th) { return g(z + peak * std::cos(th)); }, 1e-10);
    const double minus =
        periodic_mean([&](double th) { return g(z - peak * std::cos(th)); }, 1e-10);
    CHECK(plus == Catch::Approx(minus).epsilon(1e-12));
  }

  SECTION("amplitude reaching the separation is rejected")
  {
    geom.a_rms_m = z; // peak sqrt(2) z > z
    CHECK_THROWS_MATCHES(
        frequency_shift(z, [](double s) { return 1.0 / s; }, geom, averaging_mode::exact), error,
        Catch::Matchers::Predicate<error>([](const error& e) {
          return e.code() == errc::amplitude_exceeds_separation;
        }));
  }

  SECTION("geometry validation")
  {
    geom.spring_constant_n_per_m = 0.0;
    CHECK_THROWS_MATCHES(
        frequency_shift(z, [](double s) { return 1.0 / s; }, geom, averaging_mode::exact), error,
        Catch::Matchers::Predicate<error>(
            [](const error& e) { return e.code() == errc::invalid_geometry; }));
  }
}

TEST_CASE("theory curve pipeline")
{
  auto geom = test_geometry();
  geom.a_rms_m = 10e-9;
  lifshitz::lifshitz_settings settings;

  std::vector<double> grid;
  for (int i = 0; i < 6; ++i) grid.push_back(118e-9 + i * (230e-9 - 118e-9) / 5.0);

  SECTION("plasma magnitude exceeds the dissipative one at every grid point")
  {
    auto dr = pure_spec(eps_mode::tabulated_drude);
    dr.table = synthetic_drude_table();
    auto pl = pure_spec(eps_mode::tabulated_plasma);
    pl.table = synthetic_drude_table();

    const auto cd = theory_curve(grid, dr, settings, geom, averaging_mode::first_term);
    const auto cp = theory_curve(grid, pl, settings, geom, averaging_mode::first_term);
    REQUIRE(cd.points.size() == grid.size());
    REQUIRE(cp.points.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(cd.points[i].delta_f_hz < 0.0);
      CHECK(-cp.points[i].delta_f_hz > -cd.points[i].delta_f_hz);
      CHECK(cd.points[i].z_delta_f_hz_m == cd.points[i].z_m * cd.points[i].delta_f_hz);
    }
    CHECK(cd.model_tag == "tabulated_drude");
    CHECK(cp.averaging_tag == "first_term");
  }

  SECTION("oscillation averaging only strengthens the shift")
  {
    const auto spec = pure_spec(eps_mode::pure_drude);
    const std::vector<double> small{130e-9, 170e-9, 210e-9};
    const auto exact = theory_curve(small, spec, settings, geom, averaging_mode::exact);
    const auto first = theory_curve(small, spec, settings, geom, averaging_mode::first_term);
    for (std::size_t i = 0; i < small.size(); ++i)
      CHECK(-exact.points[i].delta_f_hz > -first.points[i].delta_f_hz);
  }

  SECTION("empty grid gives an empty curve")
  {
    const auto c =
        theory_curve({}, pure_spec(eps_mode::pure_drude), settings, geom, averaging_mode::exact);
    CHECK(c.points.empty());
    CHECK(c.model_tag == "pure_drude");
  }

  SECTION("grid validation")
  {
    CHECK_THROWS_MATCHES(theory_curve({200e-9, 150e-9}, pure_spec(eps_mode::pure_drude), settings,
                                      geom, averaging_mode::exact),
                         error, Catch::Matchers::Predicate<error>([](const error& e) {
                           return e.code() == errc::invalid_grid;
                         }));
    geom.a_rms_m = 100e-9; // peak 141 nm reaches the first grid point
    CHECK_THROWS_MATCHES(theory_curve(grid, pure_spec(eps_mode::pure_drude), settings, geom,
                                      averaging_mode::exact),
                         error, Catch::Matchers::Predicate<error>([](const error& e) {
                           return e.code() == errc::amplitude_exceeds_separation;
                         }));
  }
}
