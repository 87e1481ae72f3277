#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "lifshift/constants.hpp"
#include "lifshift/errors.hpp"
#include "lifshift/lifshitz.hpp"
#include "lifshift/optics.hpp"

using namespace lifshift;
using namespace lifshift::lifshitz;
using lifshift::optics::eps_mode;
using lifshift::optics::permittivity_spec;

namespace {

constexpr double zeta3 = 1.2020569031595942;

permittivity_spec pure_spec(eps_mode mode, double omega_p_ev = 7.54, double gamma_ev = 0.051)
{
  permittivity_spec s;
  s.mode = mode;
  s.drude = {omega_p_ev, gamma_ev};
  return s;
}

// Dissipationless mirror with a huge plasma frequency: reflectivity ~ 1
// down to zero frequency, the closest Lifshitz input to an ideal metal.
permittivity_spec ideal_proxy() { return pure_spec(eps_mode::pure_plasma, 1e4, 0.0); }

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

} // namespace

TEST_CASE("matsubara frequencies")
{
  CHECK(matsubara_frequency(0, 300.0) == 0.0);
  CHECK(matsubara_frequency(1, 300.0) == Catch::Approx(0.16243290521934156).epsilon(1e-15));
  CHECK(matsubara_frequency(10, 300.0)
        == Catch::Approx(10.0 * matsubara_frequency(1, 300.0)).epsilon(1e-15));
  CHECK_THROWS_AS(matsubara_frequency(-1, 300.0), error);
  CHECK_THROWS_AS(matsubara_frequency(1, 0.0), error);
}

TEST_CASE("fresnel coefficients at imaginary frequency")
{
  SECTION("vacuum reflects nothing")
  {
    const auto r = fresnel_imaginary(1.0, 1e7, 1.0);
    CHECK(r.r_tm == 0.0);
    CHECK(r.r_te == 0.0);
  }

  SECTION("enormous permittivity approaches the perfect mirror")
  {
    const auto r = fresnel_imaginary(1.0, 1e7, 1e12);
    CHECK(r.r_tm == Catch::Approx(1.0).margin(1e-4));
    CHECK(r.r_te == Catch::Approx(-1.0).margin(1e-4));
  }

  SECTION("dissipative response loses its TE reflection toward zero frequency")
  {
    // eps xi^2 ~ omega_p^2 xi / gamma -> 0, so r_te vanishes linearly in xi
    auto r_te_at = [](double xi_ev) {
      const double eps = 1.0 + 7.54 * 7.54 / (xi_ev * (xi_ev + 0.051));
      return fresnel_imaginary(xi_ev, 1e7, eps).r_te;
    };
    const double r9 = r_te_at(1e-9);
    const double r11 = r_te_at(1e-11);
    CHECK(std::fabs(r9) < 1e-6);
    CHECK(std::fabs(r11) < 1e-8);
    CHECK(r11 / r9 == Catch::Approx(0.01).epsilon(0.05));
    const double eps9 = 1.0 + 7.54 * 7.54 / (1e-9 * (1e-9 + 0.051));
    CHECK(fresnel_imaginary(1e-9, 1e7, eps9).r_tm > 1.0 - 1e-6);
  }

  SECTION("bounds and signs")
  {
    for (double xi : {0.01, 0.5, 3.0})
      for (double k : {1e5, 1e7, 5e8})
        for (double eps : {1.5, 20.0, 4e3}) {
          const auto r = fresnel_imaginary(xi, k, eps);
          CHECK(r.r_tm >= 0.0);
          CHECK(r.r_te <= 0.0);
          CHECK(std::fabs(r.r_tm) <= 1.0);
          CHECK(std::fabs(r.r_te) <= 1.0);
        }
  }

  SECTION("argument validation")
  {
    CHECK_THROWS_AS(fresnel_imaginary(-1.0, 1e7, 2.0), error);
    CHECK_THROWS_AS(fresnel_imaginary(1.0, 0.0, 2.0), error);
    CHECK_THROWS_AS(fresnel_imaginary(1.0, 1e7, 0.5), error);
  }
}

TEST_CASE("zero-frequency term discriminates dissipative from plasma response")
{
  lifshitz_settings s;
  s.temperature_k = 300.0;
  const double a = 150e-9;

  SECTION("Drude modes carry no TE weight at l = 0, bitwise")
  {
    for (auto m : {eps_mode::pure_drude, eps_mode::tabulated_drude}) {
      auto spec = pure_spec(m);
      if (m == eps_mode::tabulated_drude) spec.table = synthetic_drude_table();
      const auto t = matsubara_term(a, 0, spec, s);
      CHECK(t.free_energy_te == 0.0);
      CHECK(t.pressure_te == 0.0);
      CHECK(t.free_energy_tm < 0.0);
      CHECK(t.pressure_tm < 0.0);
    }
  }

  SECTION("plasma modes bind through the TE channel at l = 0")
  {
    for (auto m : {eps_mode::pure_plasma, eps_mode::tabulated_plasma}) {
      auto spec = pure_spec(m);
      if (m == eps_mode::tabulated_plasma) spec.table = synthetic_drude_table();
      const auto t = matsubara_term(a, 0, spec, s);
      CHECK(t.free_energy_te < 0.0);
      CHECK(t.pressure_te < 0.0);
    }
  }

  SECTION("Drude l = 0 free energy has the known closed form")
  {
    // half-weighted TM-only term: -k_B T zeta(3) / (16 pi a^2)
    const auto t = matsubara_term(a, 0, pure_spec(eps_mode::pure_drude), s);
    const double want =
        -constants::k_boltzmann * 300.0 * zeta3 / (16.0 * constants::pi * a * a);
    CHECK(t.free_energy_tm == Catch::Approx(want).epsilon(1e-8));
  }
}

TEST_CASE("ideal-metal limit of the plate pressure and free energy")
{
  lifshitz_settings s;
  s.temperature_k = 1.0;
  s.l_max = 60000; // 1 K Matsubara spacing needs tens of thousands of terms
  const double a = 100e-9;

  const auto r = free_energy_per_area(a, ideal_proxy(), s);
  const double hc = constants::hbar * constants::c_light;
  const double p_ideal = constants::pi * constants::pi * hc / (240.0 * a * a * a * a);
  const double f_ideal = constants::pi * constants::pi * hc / (720.0 * a * a * a);

  CHECK(r.pressure < 0.0);
  CHECK(r.free_energy_per_area < 0.0);
  CHECK(-r.pressure == Catch::Approx(p_ideal).epsilon(0.01));
  CHECK(-r.free_energy_per_area == Catch::Approx(f_ideal).epsilon(0.01));
  CHECK(r.terms_used > 1000);
  CHECK(r.est_error < 1e-6);
}

TEST_CASE("zero-temperature integral agrees with the cold Matsubara sum")
{
  const double a = 100e-9;

  lifshitz_settings cold;
  cold.temperature_k = 1.0;
  cold.l_max = 60000;
  const auto sum = free_energy_per_area(a, ideal_proxy(), cold);

  lifshitz_settings zero;
  zero.zero_t_mode = true;
  zero.temperature_k = 0.0;
  const auto integral = free_energy_per_area(a, ideal_proxy(), zero);

  CHECK(integral.terms_used == 0);
  CHECK(integral.pressure == Catch::Approx(sum.pressure).epsilon(5e-3));
  CHECK(integral.free_energy_per_area
        == Catch::Approx(sum.free_energy_per_area).epsilon(5e-3));
}

TEST_CASE("attraction and distance decay")
{
  lifshitz_settings s;
  const auto spec = pure_spec(eps_mode::pure_drude);
  double prev_mag = 1e300;
  for (double a : {50e-9, 100e-9, 200e-9, 350e-9, 500e-9}) {
    const auto r = free_energy_per_area(a, spec, s);
    CHECK(r.pressure < 0.0);
    CHECK(r.free_energy_per_area < 0.0);
    CHECK(-r.pressure < prev_mag);
    prev_mag = -r.pressure;
  }
}

TEST_CASE("pressure equals the negative separation derivative of the free energy")
{
  // central difference with step 1e-3 a against the analytic-integrand pressure
  lifshitz_settings s;
  s.term_tolerance = 1e-9;
  s.k_quad_tolerance = 1e-11;

  struct config {
    eps_mode mode;
    double a;
    double temperature;
  };
  const config configs[] = {
      {eps_mode::pure_drude, 80e-9, 300.0},  {eps_mode::pure_drude, 200e-9, 300.0},
      {eps_mode::pure_drude, 150e-9, 77.0},  {eps_mode::pure_plasma, 80e-9, 300.0},
      {eps_mode::pure_plasma, 200e-9, 300.0},{eps_mode::pure_plasma, 350e-9, 150.0},
      {eps_mode::pure_drude, 500e-9, 300.0}, {eps_mode::pure_plasma, 120e-9, 77.0},
      {eps_mode::pure_drude, 100e-9, 600.0}, {eps_mode::pure_plasma, 100e-9, 600.0},
  };
  for (const auto& c : configs) {
    auto spec = pure_spec(c.mode);
    lifshitz_settings st = s;
    st.temperature_k = c.temperature;
    const double h = 1e-3 * c.a;
    const auto mid = free_energy_per_area(c.a, spec, st);
    const auto hi = free_energy_per_area(c.a + h, spec, st);
    const auto lo = free_energy_per_area(c.a - h, spec, st);
    const double fd = -(hi.free_energy_per_area - lo.free_energy_per_area) / (2.0 * h);
    CHECK(fd == Catch::Approx(mid.pressure).epsilon(1e-4));
  }
}

TEST_CASE("auto truncation is honest about its tail")
{
  const auto spec = pure_spec(eps_mode::pure_drude);
  lifshitz_settings s;
  s.temperature_k = 300.0;
  const double a = 200e-9;

  const auto base = free_energy_per_area(a, spec, s);

  SECTION("raising the term cap beyond the stop point changes nothing")
  {
    lifshitz_settings wide = s;
    wide.l_max = 2 * base.terms_used;
    const auto r = free_energy_per_area(a, spec, wide);
    CHECK(r.pressure == base.pressure); // bitwise: same stop point
  }

  SECTION("tightening the tolerance moves the result by less than the stated tail")
  {
    lifshitz_settings tight = s;
    tight.term_tolerance = 1e-12;
    const auto r = free_energy_per_area(a, spec, tight);
    CHECK(std::fabs(r.pressure - base.pressure)
          <= 2.0 * s.term_tolerance * std::fabs(base.pressure));
    CHECK(r.terms_used > base.terms_used);
  }

  SECTION("the error estimate covers the requested tolerances")
  {
    CHECK(base.est_error <= s.term_tolerance + 2.0 * s.k_quad_tolerance);
  }
}

TEST_CASE("plasma extrapolation binds more strongly than the dissipative one")
{
  lifshitz_settings s;
  const double a = 150e-9;

  auto drude = pure_spec(eps_mode::tabulated_drude);
  drude.table = synthetic_drude_table();
  auto plasma = pure_spec(eps_mode::tabulated_plasma);
  plasma.table = synthetic_drude_table();

  const auto pd = free_energy_per_area(a, drude, s);
  const auto pp = free_energy_per_area(a, plasma, s);
  CHECK(-pp.pressure > -pd.pressure);
  CHECK(-pp.free_energy_per_area > -pd.free_energy_per_area);
}

TEST_CASE("matsubara machinery rejects bad inputs")
{
  lifshitz_settings s;
  const auto spec = pure_spec(eps_mode::pure_drude);

  CHECK_THROWS_MATCHES(free_energy_per_area(0.0, spec, s), error,
                       Catch::Matchers::Predicate<error>([](const error& e) {
                         return e.code() == errc::separation_nonpositive;
                       }));
  CHECK_THROWS_AS(matsubara_term(-1e-9, 0, spec, s), error);

  SECTION("cold temperatures overrun the default term cap")
  {
    lifshitz_settings cold;
    cold.temperature_k = 1.0;
    CHECK_THROWS_MATCHES(free_energy_per_area(100e-9, spec, cold), error,
                         Catch::Matchers::Predicate<error>([](const error& e) {
                           return e.code() == errc::truncation_not_converged;
                         }));
  }

  SECTION("settings validation")
  {
    lifshitz_settings bad;
    bad.term_tolerance = 0.0;
    CHECK_THROWS_AS(free_energy_per_area(100e-9, spec, bad), error);
    bad = lifshitz_settings{};
    bad.l_max = 0;
    CHECK_THROWS_AS(free_energy_per_area(100e-9, spec, bad), error);
    bad = lifshitz_settings{};
    bad.temperature_k = -10.0;
    CHECK_THROWS_AS(free_energy_per_area(100e-9, spec, bad), error);
  }
}

TEST_CASE("the permittivity ladder caches without changing values")
{
  const auto spec = pure_spec(eps_mode::pure_drude);
  eps_ladder ladder(spec, 300.0);
  for (long l : {1L, 2L, 7L, 3L}) {
    CHECK(ladder.at(l) == optics::eps_imag_axis(matsubara_frequency(l, 300.0), spec));
  }
  CHECK_THROWS_AS(ladder.at(0), error);

  lifshitz_settings s;
  eps_ladder shared(spec, s.temperature_k);
  const auto with_shared = free_energy_per_area(150e-9, spec, s, &shared);
  const auto without = free_energy_per_area(150e-9, spec, s);
  CHECK(with_shared.pressure == without.pressure); // bitwise
}
