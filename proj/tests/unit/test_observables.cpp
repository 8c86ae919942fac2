#include "rotorgrating/error.hpp"
#include "rotorgrating/observables.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace rotorgrating;

namespace {

PropagatedEnsemble sudden(double temperature, double intensity, double t0 = 0.0) {
  const auto m = co2();
  SimulationOptions opt;
  opt.propagator = Propagator::sudden;
  return propagate_linear_ensemble(m, boltzmann_ensemble(m, temperature), PulseSpec::linear(intensity, 0.1, Axis::y, t0),
                                   opt);
}

}  // namespace

TEST_CASE("time grids") {
  const auto t = TimeGrid{0.0, 1.0, 4}.times();
  REQUIRE(t.size() == 4);
  CHECK(t[3] == doctest::Approx(0.75));
  const auto r = TimeGrid::one_revival(co2(), 2.0, 100);
  CHECK(r.begin == doctest::Approx(3.0));
  CHECK(r.end - r.begin == doctest::Approx(revival_period(co2())));
  CHECK_THROWS_AS((TimeGrid{1.0, 1.0, 4}.times()), ConfigError);
  CHECK_THROWS_AS((TimeGrid{0.0, 1.0, 0}.times()), ConfigError);
}

TEST_CASE("no pulse gives no alignment") {
  for (double temperature : {0.0, 30.0, 293.0}) {
    const auto e = sudden(temperature, 0.0);
    const auto times = TimeGrid{0.0, 50.0, 200}.times();
    for (Axis axis : {Axis::x, Axis::y, Axis::z}) {
      const auto tr = alignment_trace(e, axis, times, 1);
      CHECK(tr.peak_amplitude() < 1e-14);
      CHECK(std::abs(fourier_decompose(e, axis).c) < 1e-14);
    }
  }
}

TEST_CASE("weak kick from the ground state") {
  // <cos^2> - 1/3 = (8 xi / 45) sin(w0 t) + O(xi^2)
  const auto e = sudden(0.0, 0.02);
  const double xi = e.xi;
  const auto d = fourier_decompose(e, Axis::y);
  REQUIRE(!d.components.empty());
  const auto& first = d.components.front();
  CHECK(first.j == 0);
  CHECK(first.amplitude == doctest::Approx(8.0 * xi / 45.0).epsilon(0.01));
  CHECK(first.phase == doctest::Approx(-std::numbers::pi / 2).epsilon(1e-2));
  CHECK(first.omega == doctest::Approx(raman_frequency(0, co2())));
  CHECK(std::abs(d.c) < 0.1 * first.amplitude);
}

TEST_CASE("Fourier form reproduces the direct trace") {
  for (double temperature : {0.0, 30.0, 293.0}) {
    const auto e = sudden(temperature, 25.0, 0.7);
    const auto times = TimeGrid::one_revival(co2(), 0.7, 1500).times();
    for (Axis axis : {Axis::y, Axis::x, Axis::z}) {
      const auto direct = alignment_trace(e, axis, times, 1);
      const auto d = fourier_decompose(e, axis);
      CHECK(d.reference_time == doctest::Approx(0.7));
      CHECK(max_abs_difference(direct, reconstruct(d, times)) < 1e-10);
    }
  }
}

TEST_CASE("axis traces obey the sum rule") {
  const auto e = sudden(30.0, 25.0);
  const auto times = TimeGrid{0.5, 40.0, 500}.times();
  const auto x = alignment_trace(e, Axis::x, times, 1);
  const auto y = alignment_trace(e, Axis::y, times, 1);
  const auto z = alignment_trace(e, Axis::z, times, 1);
  for (std::size_t i = 0; i < times.size(); ++i) {
    CHECK(x.values[i] + y.values[i] + z.values[i] == doctest::Approx(0.0).epsilon(1e-13).scale(1.0));
    CHECK(x.values[i] == doctest::Approx(z.values[i]).epsilon(1e-13).scale(1.0));
  }
}

TEST_CASE("trace is periodic with the revival period") {
  const auto e = sudden(293.0, 30.0);
  const double tr = revival_period(co2());
  const auto a = alignment_trace(e, Axis::y, TimeGrid{1.0, 20.0, 300}.times(), 1);
  const auto b = alignment_trace(e, Axis::y, TimeGrid{1.0 + tr, 20.0 + tr, 300}.times(), 1);
  CHECK(max_abs_difference(a, b) < 1e-9);
}

TEST_CASE("thread count does not change the trace") {
  const auto e = sudden(293.0, 30.0);
  const auto times = TimeGrid{1.0, 10.0, 64}.times();
  const auto one = alignment_trace(e, Axis::y, times, 1);
  const auto four = alignment_trace(e, Axis::y, times, 4);
  CHECK(one.values == four.values);
}

TEST_CASE("log-log slope") {
  std::vector<double> x{1, 2, 4, 8}, y;
  for (double v : x) y.push_back(3.0 * std::pow(v, 1.7));
  CHECK(loglog_slope(x, y) == doctest::Approx(1.7).epsilon(1e-12));
  CHECK_THROWS_AS(loglog_slope({1.0}, {1.0}), ConfigError);
  CHECK_THROWS_AS(loglog_slope({1.0, 2.0}, {1.0, -1.0}), NumericalError);
}

TEST_CASE("weak-field regime scaling") {
  RegimeScanOptions opt;
  opt.windows = {{1.0, 4.0}};
  opt.time_points = 2048;
  opt.simulation.propagator = Propagator::sudden;
  const auto r = regime_scan(co2(), 293.0, {1.0, 2.0, 4.0}, PulseSpec::linear(1.0, 0.1), opt);
  REQUIRE(r.fits.size() == 1);
  CHECK(r.fits[0].points == 3);
  // C grows with xi^2 and the transient with xi at weak fields
  CHECK(r.fits[0].slope_c == doctest::Approx(2.0).epsilon(0.02));
  CHECK(r.fits[0].slope_max_minus_c == doctest::Approx(1.0).epsilon(0.02));
  CHECK_THROWS_AS(regime_scan(co2(), 293.0, {4.0, 2.0}, PulseSpec::linear(1.0, 0.1), opt), ConfigError);
}

TEST_CASE("elliptic superposition") {
  AlignmentTrace lin;
  lin.times = {0.0, 1.0};
  lin.values = {0.2, -0.1};
  const auto e = elliptic_approx(lin, 0.25, 0.75);
  CHECK(e.x.values[0] == doctest::Approx((0.25 - 0.375) * 0.2));
  CHECK(e.y.values[1] == doctest::Approx((0.75 - 0.125) * -0.1));
  CHECK(e.z.values[0] == doctest::Approx(-0.1));
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(e.x.values[i] + e.y.values[i] + e.z.values[i] == doctest::Approx(0.0).scale(1.0));
    CHECK(e.difference.values[i] == doctest::Approx(e.x.values[i] - e.y.values[i]));
  }
  CHECK_THROWS_AS(elliptic_approx(lin, 0.5, 0.6), ConfigError);
}
