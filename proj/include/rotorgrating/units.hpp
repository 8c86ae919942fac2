#pragma once

// Physical constants (CODATA 2018) and the unit conventions used throughout:
// rotational constants and energies in cm^-1, time in ps, intensity in TW/cm^2,
// polarizabilities in cubic angstrom.

#include <numbers>

namespace rotorgrating::units {

inline constexpr double pi = std::numbers::pi;

inline constexpr double speed_of_light_si = 299792458.0;         // m/s
inline constexpr double hbar_si = 1.054571817e-34;                // J s
inline constexpr double epsilon0_si = 8.8541878128e-12;           // F/m
inline constexpr double boltzmann_cm1_per_kelvin = 0.695034800;   // k_B/(hc)

/// Speed of light in cm/ps.
inline constexpr double speed_of_light_cm_per_ps = speed_of_light_si * 1e2 * 1e-12;

/// Converts an energy in cm^-1 into an angular frequency in rad/ps.
inline constexpr double angular_frequency(double wavenumber_cm1) {
  return 2.0 * pi * speed_of_light_cm_per_ps * wavenumber_cm1;
}

inline constexpr double cubic_angstrom_to_m3 = 1e-30;
/// 1 TW/cm^2 x 1 ps expressed in J/m^2.
inline constexpr double tw_ps_per_cm2_to_j_per_m2 = 1e16 * 1e-12;

/// Ionization saturation intensity of CO2 in TW/cm^2.
inline constexpr double co2_ionization_saturation = 200.0;

}  // namespace rotorgrating::units
