#pragma once

// Pump pulses, their polarization state across the grating, and the
// effective area (kick strength) xi.

#include "rotorgrating/rotor.hpp"

#include <string_view>

namespace rotorgrating {

/// Pump polarization scheme of the two crossed beams.
enum class Scheme { parallel, perpendicular };

std::string_view to_string(Scheme scheme);
Scheme parse_scheme(std::string_view text);

/// Gaussian-in-intensity pulse. The field is (A e_x, B e_y) with A^2+B^2 = 1.
struct PulseSpec {
  double peak_intensity = 0.0;  // TW/cm^2
  double tau_fwhm = 0.1;        // ps, intensity FWHM
  double wavelength = 800.0;    // nm
  double t0 = 0.0;              // ps
  double pol_a = 0.0;
  double pol_b = 1.0;

  void validate() const;

  bool is_linear() const { return pol_a == 0.0 || pol_b == 0.0; }
  /// Polarization axis of a linear pulse.
  Axis linear_axis() const;

  static PulseSpec linear(double peak_intensity, double tau_fwhm, Axis axis = Axis::y,
                          double t0 = 0.0, double wavelength = 800.0);
};

struct EffectiveArea {
  double xi = 0.0;
};

/// I(t) = I0 exp(-4 ln2 (t - t0)^2 / tau^2).
double envelope_intensity(const PulseSpec& pulse, double t);

/// Integral of I(t) over time, TW ps / cm^2.
double fluence(const PulseSpec& pulse);

/// xi per unit fluence, Delta_alpha / (2 hbar eps0 c) in (TW ps/cm^2)^-1.
double xi_per_fluence(const MoleculeSpec& molecule);

/// xi = Delta_alpha/(4 hbar) \int E^2 dt for a Gaussian pulse.
EffectiveArea effective_area(const PulseSpec& pulse, const MoleculeSpec& molecule);

/// Instantaneous rate d xi / dt in 1/ps.
double xi_rate(const PulseSpec& pulse, const MoleculeSpec& molecule, double t);

struct PolarizationState {
  double a = 0.0;
  double b = 1.0;
  double fluence_factor = 1.0;  // local fluence relative to one pump
};

/// Total pump polarization at phase k_x x across the grating. The sign of A
/// is dropped since only A^2 enters the interaction.
PolarizationState polarization_at(double kx_x, Scheme scheme);

}  // namespace rotorgrating
