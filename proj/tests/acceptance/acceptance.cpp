// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "rotorgrating/cli.hpp"
#include "rotorgrating/error.hpp"
#include "rotorgrating/grating.hpp"
#include "rotorgrating/retrieval.hpp"
#include "rotorgrating/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace rotorgrating;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const MoleculeSpec kCO2 = co2();
double g_max_norm_error = 0.0;

SimulationOptions tdse() { return {}; }

SimulationOptions sudden() {
  SimulationOptions o;
  o.propagator = Propagator::sudden;
  return o;
}

PropagatedEnsemble linear(double temperature, double intensity, const SimulationOptions& o) {
  auto e = propagate_linear_ensemble(kCO2, boltzmann_ensemble(kCO2, temperature, o.cutoff),
                                     PulseSpec::linear(intensity, 0.1), o);
  g_max_norm_error = std::max(g_max_norm_error, e.max_norm_error);
  return e;
}

std::vector<double> revival_times(std::size_t points = 4096) {
  return TimeGrid::one_revival(kCO2, 0.0, points, 0.2).times();
}

double max_cos2(const PropagatedEnsemble& e) {
  return 1.0 / 3.0 + reconstruct(fourier_decompose(e, Axis::y), revival_times()).max_value();
}

// --- criteria ---------------------------------------------------------------

Verdict ac1() {
  const double r = effective_area(PulseSpec::linear(1.0, 0.1), kCO2).xi;
  return {std::abs(r - 0.444) <= 0.002, fmt("xi/I = %.5f per TW/cm^2 (0.444 +- 0.002)", r)};
}

Verdict ac2() {
  const double m = max_cos2(linear(293.0, 30.0, tdse()));
  return {std::abs(m - 0.45) <= 0.02, fmt("293 K, 30 TW/cm^2: max <cos^2> = %.4f (0.45 +- 0.02)", m)};
}

Verdict ac3() {
  const double m = max_cos2(linear(30.0, 25.0, tdse()));
  return {std::abs(m - 0.65) <= 0.03, fmt("30 K, 25 TW/cm^2: max <cos^2> = %.4f (0.65 +- 0.03)", m)};
}

Verdict ac4() {
  RegimeScanOptions o;
  o.windows = {{2.0, 20.0}, {40.0, 80.0}, {2.0, 30.0}};
  o.simulation = tdse();
  const std::vector<double> intensities{2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 25, 30, 40, 50, 60, 70, 80};
  const auto r = regime_scan(kCO2, 293.0, intensities, PulseSpec::linear(0.0, 0.1), o);
  const auto& f = r.fits;
  const bool low = std::abs(f[0].slope_c - 2.0) <= 0.1;
  const bool high = std::abs(f[1].slope_c - 1.0) <= 0.15;
  const bool transient = std::abs(f[2].slope_max_minus_c - 1.0) <= 0.1;
  return {low && high && transient,
          fmt("293 K TDSE: C slope [2,20] = %.3f (2.0 +- 0.1), C slope [40,80] = %.3f (1.0 +- 0.15), "
              "max-C slope [2,30] = %.3f (1.0 +- 0.1)",
              f[0].slope_c, f[1].slope_c, f[2].slope_max_minus_c)};
}

Verdict ac5() {
  // xi = 10 at 0.444 per TW/cm^2
  const double intensity = 10.0 / effective_area(PulseSpec::linear(1.0, 0.1), kCO2).xi;
  double worst = 0.0;
  std::string detail;
  for (double temperature : {30.0, 293.0}) {
    const auto c = compare_sudden_tdse(kCO2, temperature, intensity, 0.1, tdse());
    g_max_norm_error = std::max(g_max_norm_error, c.max_norm_error);
    worst = std::max(worst, c.rms_relative);
    detail += fmt("%s%.0f K xi = %.2f: RMS %.2f%%", detail.empty() ? "" : ", ", temperature, c.xi,
                  100.0 * c.rms_relative);
  }
  return {worst <= 0.02, detail + " (<= 2% of peak)"};
}

Verdict ac6() {
  const double intensity = 1.0 / effective_area(PulseSpec::linear(1.0, 0.1), kCO2).xi;
  std::vector<EllipticComparison> c;
  double err = 0.0;
  for (double a2 : {1.0, 2.0 / 3.0, 0.5}) {
    c.push_back(compare_elliptic(kCO2, 293.0, intensity, a2, tdse()));
    g_max_norm_error = std::max(g_max_norm_error, c.back().max_norm_error);
    err = std::max({err, c.back().error_x, c.back().error_y, c.back().error_z});
  }
  const double y_ratio = c[1].oracle_y.peak_amplitude() / c[0].oracle_y.peak_amplitude();
  double z_spread = 0.0;
  for (std::size_t i = 1; i < c.size(); ++i)
    z_spread = std::max(z_spread, max_abs_difference(c[i].oracle_z, c[0].oracle_z) / c[0].oracle_z.peak_amplitude());
  return {err <= 0.05 && y_ratio <= 0.05 && z_spread <= 0.05,
          fmt("293 K, xi = 1, full-basis TDSE: approx error %.2f%%, y(2/3)/y(1) = %.2f%%, z spread %.2f%% "
              "(each <= 5%%)",
              100.0 * err, 100.0 * y_ratio, 100.0 * z_spread)};
}

Verdict ac7() {
  auto worst_dominant_phase = [](const FourierDecomposition& d, std::size_t& dominant) {
    double a_max = 0.0, worst = 0.0;
    for (const auto& c : d.components) a_max = std::max(a_max, c.amplitude);
    for (const auto& c : d.components) {
      if (c.amplitude < 0.1 * a_max) continue;
      ++dominant;
      worst = std::max(worst, std::abs(std::remainder(c.phase + std::numbers::pi / 2, 2 * std::numbers::pi)));
    }
    return worst;
  };
  double worst_error = 0.0, worst_phase = 0.0;
  std::size_t dominant = 0;
  const auto times = revival_times(2048);
  for (double intensity : {2.0, 5.0, 10.0}) {
    const auto e = linear(293.0, intensity, tdse());
    for (Axis axis : {Axis::x, Axis::y, Axis::z}) {
      const auto d = fourier_decompose(e, axis);
      worst_error = std::max(worst_error, max_abs_difference(alignment_trace(e, axis, times), reconstruct(d, times)));
    }
    worst_phase = std::max(worst_phase, worst_dominant_phase(fourier_decompose(e, Axis::y), dominant));
  }
  std::size_t unused = 0;
  const double strong = worst_dominant_phase(fourier_decompose(linear(293.0, 20.0, tdse()), Axis::y), unused);
  return {worst_error <= 1e-10 && worst_phase <= 0.15,
          fmt("reconstruction error %.2e (<= 1e-10); %zu dominant components at 293 K, 2-10 TW/cm^2, "
              "max |phase + pi/2| = %.3f rad (<= 0.15); at 20 TW/cm^2 %.3f rad",
              worst_error, dominant, worst_phase, strong)};
}

Verdict ac8() {
  GratingConfig g;
  g.scheme = Scheme::perpendicular;
  const auto geo = grating_geometry(g);
  const double ratio = geo.plasma_order1_angle_deg / geo.alignment_order1_angle_deg;
  return {std::abs(geo.fringe_period_um - 45.84) <= 0.01 && std::abs(ratio - 2.0) <= 0.01,
          fmt("period %.4f um (45.84 +- 0.01), plasma/alignment angle ratio %.5f (2.00 +- 0.01)",
              geo.fringe_period_um, ratio)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool identical_cli_reruns() {
  const fs::path dir = fs::temp_directory_path() / "rotorgrating_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "config.json") << R"({"temperature": 293, "grating": {"single_pump_peak_intensity": 15},
    "time_grid": {"points": 2048}, "simulation": {"propagator": "tdse"}})";
  bool same = true;
  for (const char* run : {"a", "b"}) {
    const std::string cfg = (dir / "config.json").string(), out = (dir / run).string();
    const char* argv[] = {"rotorgrating", "simulate", "--config", cfg.c_str(), "--out", out.c_str()};
    std::ostringstream o, e;
    if (cli::run(6, argv, o, e) != 0) same = false;
  }
  for (const char* f : {"alignment.csv", "signal.csv", "metadata.json"})
    same = same && fs::exists(dir / "a" / f) && slurp(dir / "a" / f) == slurp(dir / "b" / f);
  fs::remove_all(dir);
  return same;
}

Verdict ac9() {
  const auto e = linear(293.0, 30.0, tdse());
  const double tr = revival_period(kCO2);
  const auto t1 = TimeGrid{0.5, 20.0, 1000}.times();
  const auto t2 = TimeGrid{0.5 + tr, 20.0 + tr, 1000}.times();
  const double periodic = max_abs_difference(alignment_trace(e, Axis::y, t1), alignment_trace(e, Axis::y, t2));
  const bool reruns = identical_cli_reruns();
  return {g_max_norm_error < 1e-9 && periodic < 1e-9 && reruns,
          fmt("max |1 - norm| over all runs %.2e (< 1e-9), periodicity %.2e (< 1e-9), byte-identical reruns: %s",
              g_max_norm_error, periodic, reruns ? "yes" : "no")};
}

Verdict ac10() {
  FitProblem problem;
  problem.molecule = kCO2;
  ExperimentalTrace trace;
  for (int i = 0; i < 900; ++i) trace.delays.push_back(-1.0 + 0.05 * i);

  FitParameters truth;
  truth.intensity = 30.0;
  truth.temperature = 280.0;
  truth.scale = 1e3;
  trace.signal = model_signal(truth, problem, trace.delays).values;
  const auto clean = fit_trace(problem, trace);
  const double ei = std::abs(clean.parameters.intensity / truth.intensity - 1.0);
  const double et = std::abs(clean.parameters.temperature / truth.temperature - 1.0);
  const double es = std::abs(clean.parameters.scale / truth.scale - 1.0);
  const bool clean_ok = clean.converged && ei <= 0.01 && et <= 0.01 && es <= 0.01;

  const std::vector<double> noiseless = trace.signal;
  std::vector<double> errors;
  for (std::uint64_t seed = 1; seed <= 21; ++seed) {
    trace.signal = add_multiplicative_noise(noiseless, 0.05, seed);
    const auto r = fit_trace(problem, trace);
    errors.push_back(std::abs(r.parameters.intensity / truth.intensity - 1.0));
  }
  std::nth_element(errors.begin(), errors.begin() + 10, errors.end());
  const double median = errors[10];
  return {clean_ok && median <= 0.15,
          fmt("noiseless: I %.3f%%, T %.3f%%, scale %.3f%% (each <= 1%%); 5%% noise, 21 draws: median I error "
              "%.2f%% (<= 15%%)",
              100.0 * ei, 100.0 * et, 100.0 * es, 100.0 * median)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"AC1 effective-area calibration", ac1},
      {"AC2 room-temperature alignment", ac2},
      {"AC3 cold alignment", ac3},
      {"AC4 intensity regime laws", ac4},
      {"AC5 sudden vs TDSE", ac5},
      {"AC6 elliptic superposition", ac6},
      {"AC7 Fourier exactness and phases", ac7},
      {"AC8 grating geometry", ac8},
      {"AC9 numerical hygiene", ac9},
      {"AC10 fit round trip", ac10},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!v.passed) ++failures;
    std::printf("[%s] %s: %s [%.1f s]\n", v.passed ? "PASS" : "FAIL", name, v.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
