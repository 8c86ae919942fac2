#pragma once

// Thermally averaged alignment <cos^2 theta_i> - 1/3 after the pulse, its
// exact Fourier form C + sum_J |a_J| cos(w_J (t - t0) + phi_J), intensity
// regime scans and the elliptic superposition approximation.

#include "rotorgrating/dynamics.hpp"

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace rotorgrating {

/// Uniform grid [begin, end) with `points` samples; the end point is excluded
/// so a grid spanning one revival period tiles periodically.
struct TimeGrid {
  double begin = 0.0;
  double end = 1.0;
  std::size_t points = 4096;

  std::vector<double> times() const;
  /// [t_pulse + offset, t_pulse + offset + T_R)
  static TimeGrid one_revival(const MoleculeSpec& molecule, double t_pulse, std::size_t points = 4096,
                              double offset = 1.0);
};

struct TraceMetadata {
  std::string molecule;
  double temperature = 0.0;
  double peak_intensity = 0.0;
  double tau_fwhm = 0.0;
  double xi = 0.0;
  int j_max = 0;
};

struct AlignmentTrace {
  std::vector<double> times;
  std::vector<double> values;  // <cos^2 theta_axis> - 1/3
  Axis axis = Axis::y;
  TraceMetadata metadata;

  double peak_amplitude() const;  // max |value|
  double max_value() const;
};

struct FourierComponent {
  int j = 0;               // coherence J <-> J+2
  double amplitude = 0.0;  // |a_J|
  double phase = 0.0;      // phi_J in (-pi, pi]
  double omega = 0.0;      // rad/ps
};

struct FourierDecomposition {
  double c = 0.0;               // permanent alignment
  double reference_time = 0.0;  // pulse centre
  Axis axis = Axis::y;
  std::vector<FourierComponent> components;
};

/// Direct route: weighted sum over channels of <psi(t)|cos^2|psi(t)> - 1/3.
AlignmentTrace alignment_trace(const PropagatedEnsemble& ensemble, Axis axis,
                               const std::vector<double>& times, unsigned threads = 0);

/// Exact decomposition from populations and J <-> J+2 coherences.
FourierDecomposition fourier_decompose(const PropagatedEnsemble& ensemble, Axis axis);

AlignmentTrace reconstruct(const FourierDecomposition& decomposition, const std::vector<double>& times);

double max_abs_difference(const AlignmentTrace& a, const AlignmentTrace& b);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct RegimeWindowFit {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t points = 0;
  double slope_c = 0.0;
  double slope_max_minus_c = 0.0;
};

struct RegimeScanOptions {
  std::vector<std::pair<double, double>> windows{{2.0, 20.0}, {40.0, 80.0}};
  std::size_t time_points = 4096;
  double window_offset = 1.0;  // ps after the pulse where the max search starts
  SimulationOptions simulation;
};

struct RegimeScanResult {
  std::vector<double> intensities;
  std::vector<double> c_values;
  std::vector<double> max_minus_c_values;
  std::vector<double> max_cos2_values;  // max_t <cos^2 theta>
  std::vector<double> xi_values;
  std::vector<int> j_max_values;
  std::vector<RegimeWindowFit> fits;
};

RegimeScanResult regime_scan(const MoleculeSpec& molecule, double temperature,
                             const std::vector<double>& intensities, const PulseSpec& pulse_template,
                             const RegimeScanOptions& options = {});

struct EllipticApproximation {
  AlignmentTrace x;
  AlignmentTrace y;
  AlignmentTrace z;
  AlignmentTrace difference;  // <cos^2 theta_x> - <cos^2 theta_y>
};

/// Superposition of two linear kicks: given the linear trace L(t) along the
/// polarization axis at the full intensity, the elliptic traces are
/// (A^2 - B^2/2) L, (B^2 - A^2/2) L, -L/2 and (3/2)(A^2 - B^2) L.
EllipticApproximation elliptic_approx(const AlignmentTrace& linear, double a2, double b2);

}  // namespace rotorgrating
