#include "rotorgrating/field.hpp"

#include "rotorgrating/error.hpp"
#include "rotorgrating/units.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace rotorgrating {

std::string_view to_string(Scheme scheme) {
  return scheme == Scheme::parallel ? "parallel" : "perpendicular";
}

Scheme parse_scheme(std::string_view text) {
  if (text == "parallel") return Scheme::parallel;
  if (text == "perpendicular") return Scheme::perpendicular;
  throw ConfigError("unknown scheme '" + std::string(text) + "' (expected parallel or perpendicular)");
}

void PulseSpec::validate() const {
  if (!(peak_intensity >= 0.0)) throw ConfigError("pulse peak intensity must be non-negative");
  if (!(tau_fwhm > 0.0)) throw ConfigError("pulse duration must be positive");
  if (!(wavelength > 0.0)) throw ConfigError("pulse wavelength must be positive");
  if (std::abs(pol_a * pol_a + pol_b * pol_b - 1.0) >= 1e-12)
    throw ConfigError("polarization components must satisfy A^2 + B^2 = 1");
}

Axis PulseSpec::linear_axis() const {
  if (pol_a == 0.0) return Axis::y;
  if (pol_b == 0.0) return Axis::x;
  throw ConfigError("pulse is not linearly polarized");
}

PulseSpec PulseSpec::linear(double peak_intensity, double tau_fwhm, Axis axis, double t0,
                            double wavelength) {
  if (axis == Axis::z) throw ConfigError("pump cannot be polarized along its propagation axis z");
  PulseSpec p;
  p.peak_intensity = peak_intensity;
  p.tau_fwhm = tau_fwhm;
  p.wavelength = wavelength;
  p.t0 = t0;
  p.pol_a = axis == Axis::x ? 1.0 : 0.0;
  p.pol_b = axis == Axis::y ? 1.0 : 0.0;
  return p;
}

double envelope_intensity(const PulseSpec& pulse, double t) {
  const double u = (t - pulse.t0) / pulse.tau_fwhm;
  return pulse.peak_intensity * std::exp(-4.0 * std::numbers::ln2 * u * u);
}

double fluence(const PulseSpec& pulse) {
  return pulse.peak_intensity * pulse.tau_fwhm * std::sqrt(units::pi / (4.0 * std::numbers::ln2));
}

double xi_per_fluence(const MoleculeSpec& molecule) {
  // Delta_alpha (SI) = 4 pi eps0 Delta_alpha (volume); eps0 cancels.
  const double delta_alpha_si = 4.0 * units::pi * units::epsilon0_si * molecule.delta_alpha_a3 *
                                units::cubic_angstrom_to_m3;
  return delta_alpha_si / (2.0 * units::hbar_si * units::epsilon0_si * units::speed_of_light_si) *
         units::tw_ps_per_cm2_to_j_per_m2;
}

EffectiveArea effective_area(const PulseSpec& pulse, const MoleculeSpec& molecule) {
  pulse.validate();
  molecule.validate();
  return {xi_per_fluence(molecule) * fluence(pulse)};
}

double xi_rate(const PulseSpec& pulse, const MoleculeSpec& molecule, double t) {
  return xi_per_fluence(molecule) * envelope_intensity(pulse, t);
}

PolarizationState polarization_at(double kx_x, Scheme scheme) {
  if (scheme == Scheme::parallel) {
    const double c = std::cos(kx_x);
    return {0.0, 1.0, 4.0 * c * c};
  }
  return {std::abs(std::sin(kx_x)), std::cos(kx_x), 2.0};
}

}  // namespace rotorgrating
