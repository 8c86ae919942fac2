#include "rotorgrating/error.hpp"
#include "rotorgrating/field.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace rotorgrating;

namespace {

double trapezoid(auto&& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = 0.5 * (f(a) + f(b));
  for (int i = 1; i < n; ++i) s += f(a + i * h);
  return s * h;
}

}  // namespace

TEST_CASE("pulse envelope") {
  const auto p = PulseSpec::linear(30.0, 0.1, Axis::y, 1.5);
  CHECK(envelope_intensity(p, 1.5) == 30.0);
  CHECK(envelope_intensity(p, 1.55) == doctest::Approx(15.0).epsilon(1e-12));
  CHECK(envelope_intensity(p, 1.45) == doctest::Approx(15.0).epsilon(1e-12));
  const double numeric = trapezoid([&](double t) { return envelope_intensity(p, t); }, 1.0, 2.0, 4000);
  CHECK(fluence(p) == doctest::Approx(numeric).epsilon(1e-12));
}

TEST_CASE("effective area of CO2") {
  const auto m = co2();
  // Delta_alpha / (2 hbar eps0 c) with Delta_alpha = 4 pi eps0 x 2.1 A^3, in SI
  const double hbar = 1.054571817e-34, c = 299792458.0;
  const double per_si = 4.0 * std::numbers::pi * 2.1e-30 / (2.0 * hbar * c);  // per (W/m^2 s)
  const double per_tw_ps = per_si * 1e16 * 1e-12;
  CHECK(xi_per_fluence(m) == doctest::Approx(per_tw_ps).epsilon(1e-12));

  const auto p = PulseSpec::linear(1.0, 0.1);
  const double xi = effective_area(p, m).xi;
  CHECK(xi == doctest::Approx(0.444).epsilon(0.002 / 0.444));
  CHECK(effective_area(PulseSpec::linear(25.0, 0.1), m).xi == doctest::Approx(25.0 * xi).epsilon(1e-13));

  const auto q = PulseSpec::linear(40.0, 0.1, Axis::x, 0.3);
  const double integrated = trapezoid([&](double t) { return xi_rate(q, m, t); }, -0.5, 1.1, 8000);
  CHECK(integrated == doctest::Approx(effective_area(q, m).xi).epsilon(1e-10));
}

TEST_CASE("pulse validation") {
  CHECK_THROWS_AS(PulseSpec::linear(-1.0, 0.1).validate(), ConfigError);
  CHECK_THROWS_AS(PulseSpec::linear(1.0, 0.0).validate(), ConfigError);
  CHECK_THROWS_AS(PulseSpec::linear(1.0, 0.1, Axis::z), ConfigError);
  PulseSpec p = PulseSpec::linear(1.0, 0.1);
  p.pol_a = 0.5;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.pol_a = p.pol_b = std::sqrt(0.5);
  CHECK_NOTHROW(p.validate());
  CHECK_FALSE(p.is_linear());
  CHECK_THROWS_AS(p.linear_axis(), ConfigError);
  CHECK(PulseSpec::linear(1.0, 0.1, Axis::x).linear_axis() == Axis::x);
  CHECK(PulseSpec::linear(1.0, 0.1, Axis::y).linear_axis() == Axis::y);
}

TEST_CASE("polarization across the grating") {
  SUBCASE("parallel pumps modulate the fluence") {
    for (double k : {0.0, 0.4, 1.0, std::numbers::pi / 2, 2.5}) {
      const auto s = polarization_at(k, Scheme::parallel);
      CHECK(s.a == 0.0);
      CHECK(s.b == 1.0);
      // |e^{ik} + e^{-ik}|^2 for unit amplitudes
      CHECK(s.fluence_factor == doctest::Approx(std::norm(std::polar(1.0, k) + std::polar(1.0, -k))));
    }
  }
  SUBCASE("perpendicular pumps modulate the polarization") {
    for (double k : {0.0, 0.3, std::numbers::pi / 4, 1.2, std::numbers::pi / 2}) {
      const auto s = polarization_at(k, Scheme::perpendicular);
      // field e^{ik} e_x + e^{-ik} e_y over sqrt(2) projected on the
      // principal axes of the polarization ellipse
      CHECK(s.a * s.a + s.b * s.b == doctest::Approx(1.0));
      CHECK(s.fluence_factor == 2.0);
      CHECK(s.a == doctest::Approx(std::abs(std::sin(k))));
    }
    CHECK(polarization_at(0.0, Scheme::perpendicular).a == 0.0);
    CHECK(polarization_at(std::numbers::pi / 2, Scheme::perpendicular).b == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("scheme names") {
  CHECK(parse_scheme("parallel") == Scheme::parallel);
  CHECK(parse_scheme(to_string(Scheme::perpendicular)) == Scheme::perpendicular);
  CHECK_THROWS_AS(parse_scheme("crossed"), ConfigError);
}
