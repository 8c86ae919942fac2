#pragma once

// Transient-grating (DFWM) signals built from alignment traces, the
// diffraction geometry, and the plasma-background heterodyne model.

#include "rotorgrating/observables.hpp"

#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rotorgrating {

/// How the single-pump intensity I0 maps to the intensity fed to the
/// linear-polarization simulation.
///   point:           parallel 2 I0, perpendicular I0 (on-axis peak)
///   transverse_half: parallel I0,   perpendicular I0/2 (transverse-profile factor 1/2)
enum class IntensityMapping { point, transverse_half };

std::string_view to_string(IntensityMapping mapping);
IntensityMapping parse_intensity_mapping(std::string_view text);

/// Theoretical (simulated) intensity per unit single-pump intensity.
double theoretical_intensity_factor(Scheme scheme, IntensityMapping mapping);

struct GratingConfig {
  double wavelength = 800.0;         // nm
  double crossing_angle_deg = 1.0;   // full angle between the pumps
  Scheme scheme = Scheme::parallel;
  double single_pump_peak_intensity = 0.0;  // I0, TW/cm^2
  double pump_tau_fwhm = 0.1;        // ps
  double pump_t0 = 0.0;              // ps
  IntensityMapping mapping = IntensityMapping::point;
  std::optional<double> probe_tau_fwhm;                      // ps; convolution off when empty
  std::optional<std::complex<double>> plasma_background;     // parallel scheme only

  void validate() const;
  double theoretical_intensity() const;
  /// Linear pump at the theoretical intensity, polarized along y.
  PulseSpec linear_pump() const;
};

struct SignalMetadata {
  Scheme scheme = Scheme::parallel;
  IntensityMapping mapping = IntensityMapping::point;
  double single_pump_intensity = 0.0;
  double theoretical_intensity = 0.0;
  double temperature = 0.0;
  double xi = 0.0;
  int j_max = 0;
};

struct SignalTrace {
  std::vector<double> times;   // ps
  std::vector<double> values;  // arbitrary units
  SignalMetadata metadata;
  std::vector<std::string> warnings;
};

/// Aligned signal and the linear trace it was built from.
struct GratingSimulation {
  AlignmentTrace alignment;
  FourierDecomposition decomposition;
  SignalTrace signal;
};

/// Field-like trace s(t) for the given scheme: L(t) for parallel, (3/2) L(t)
/// for perpendicular. Zero before the pump centre.
std::vector<double> grating_field(const FourierDecomposition& linear, Scheme scheme,
                                  const std::vector<double>& times);

/// |s + b|^2 pointwise.
std::vector<double> heterodyne_with_background(const std::vector<double>& field, std::complex<double> background);

/// Gaussian of intensity FWHM probe_tau, normalized on the sample grid
/// (renormalized near the edges). Requires a uniform grid.
SignalTrace probe_convolve(const SignalTrace& signal, double probe_tau_fwhm);

/// Squares (or heterodynes) the field and applies the optional probe
/// convolution. The background is switched on after the pump.
SignalTrace signal_from_decomposition(const FourierDecomposition& linear, const GratingConfig& config,
                                      const std::vector<double>& times);

/// Parallel scheme: linear pump at the theoretical intensity (2 I0 by default).
GratingSimulation intensity_grating_signal(const MoleculeSpec& molecule, double temperature,
                                           const GratingConfig& config, const std::vector<double>& times,
                                           const SimulationOptions& options = {});

/// Perpendicular scheme: linear pump at I0 (by default), (3/2) factor, squared.
GratingSimulation polarization_grating_signal(const MoleculeSpec& molecule, double temperature,
                                              const GratingConfig& config, const std::vector<double>& times,
                                              const SimulationOptions& options = {});

/// Dispatches on config.scheme.
GratingSimulation grating_signal(const MoleculeSpec& molecule, double temperature, const GratingConfig& config,
                                 const std::vector<double>& times, const SimulationOptions& options = {});

struct GratingGeometry {
  double fringe_period_um = 0.0;
  double alignment_order1_angle_deg = 0.0;  // deflection from the probe direction
  double plasma_period_um = 0.0;
  double plasma_order1_angle_deg = 0.0;
};

GratingGeometry grating_geometry(const GratingConfig& config);

/// Spatial factor A^2 - B^2 of the polarization grating at phase k_x x.
double polarization_grating_factor(double kx_x);

struct ModulationSample {
  double kx_x = 0.0;          // rad, in [0, pi]
  double local_intensity = 0.0;
  double max_deviation = 0.0;  // relative to the peak revival amplitude
};

struct ModulationReport {
  double single_pump_intensity = 0.0;
  double peak_amplitude = 0.0;  // max |trace| at the bright fringe
  double max_relative_deviation = 0.0;
  double threshold = 0.1;
  bool passed = false;
  std::vector<ModulationSample> samples;
};

/// Full traces at local intensity 4 I0 cos^2(k_x x) against the separable
/// model L_{2 I0}(t) (1 + cos 2 k_x x), at `positions` phases spanning [0, pi].
ModulationReport spatial_modulation_check(const MoleculeSpec& molecule, double temperature,
                                          double single_pump_intensity, const std::vector<double>& times,
                                          std::size_t positions = 9, const SimulationOptions& options = {},
                                          double threshold = 0.1, double pump_tau_fwhm = 0.1);

}  // namespace rotorgrating
