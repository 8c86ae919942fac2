#pragma once

// Self-checks run by the `validate` subcommand: operator matrix elements
// against quadrature, sudden against TDSE, the elliptic superposition against
// the full-basis oracle, Fourier exactness and the intensity regime laws.

#include "rotorgrating/observables.hpp"

#include <string>
#include <vector>

namespace rotorgrating {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  std::string target;
  std::string detail;
};

/// Largest |closed form - quadrature| over all matrix elements of cos^2
/// (fixed M) and cos^2 theta_{x,y,z} (full basis) with J, J' <= j_limit.
double operator_quadrature_deviation(int j_limit = 10);

/// RMS of (sudden - TDSE) over one revival, relative to the TDSE peak amplitude.
struct PropagatorComparison {
  double xi = 0.0;
  double rms_relative = 0.0;
  double peak_amplitude = 0.0;
  double max_norm_error = 0.0;
};

PropagatorComparison compare_sudden_tdse(const MoleculeSpec& molecule, double temperature, double intensity,
                                         double tau_fwhm, const SimulationOptions& options,
                                         std::size_t time_points = 4096);

struct EllipticComparison {
  double a2 = 0.0;
  double b2 = 0.0;
  double xi = 0.0;
  double reference_peak = 0.0;  // peak |L| of the linear trace
  double error_x = 0.0;         // max |approx - oracle| / reference_peak
  double error_y = 0.0;
  double error_z = 0.0;
  double sum_rule = 0.0;        // max |x + y + z| of the oracle traces
  double max_norm_error = 0.0;
  AlignmentTrace oracle_x, oracle_y, oracle_z;
};

/// Linear trace (fixed M, full intensity) superposed via elliptic_approx
/// against the full (J, M) propagation with the same pulse and (A^2, B^2).
EllipticComparison compare_elliptic(const MoleculeSpec& molecule, double temperature, double intensity, double a2,
                                    const SimulationOptions& options, std::size_t time_points = 4096);

struct ValidationOptions {
  MoleculeSpec molecule;
  double temperature = 30.0;          // sudden/TDSE, elliptic and norm suites
  double intensity = 25.0;            // TW/cm^2
  double elliptic_intensity = 2.25;   // xi ~ 1
  double elliptic_temperature = 293.0;
  Propagator elliptic_propagator = Propagator::sudden;
  double regime_temperature = 293.0;
  std::vector<double> regime_intensities{2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 25, 30, 40, 50, 60, 70, 80};
  Propagator regime_propagator = Propagator::sudden;
  std::size_t time_points = 4096;
  SimulationOptions simulation;
};

std::vector<CheckResult> run_validation(const ValidationOptions& options);

}  // namespace rotorgrating
