#include "rotorgrating/rotor.hpp"

#include "rotorgrating/error.hpp"
#include "rotorgrating/units.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace rotorgrating {

std::string_view to_string(Axis axis) {
  switch (axis) {
    case Axis::x: return "x";
    case Axis::y: return "y";
    case Axis::z: return "z";
  }
  return "?";
}

Axis parse_axis(std::string_view text) {
  if (text == "x") return Axis::x;
  if (text == "y") return Axis::y;
  if (text == "z") return Axis::z;
  throw ConfigError("unknown axis '" + std::string(text) + "' (expected x, y or z)");
}

void MoleculeSpec::validate() const {
  if (!(b_cm1 > 0.0)) throw ConfigError("molecule '" + name + "': B must be positive");
  if (!(delta_alpha_a3 > 0.0))
    throw ConfigError("molecule '" + name + "': delta_alpha must be positive");
  if (g_even < 0.0 || g_odd < 0.0)
    throw ConfigError("molecule '" + name + "': spin weights must be non-negative");
  if (g_even == 0.0 && g_odd == 0.0)
    throw ConfigError("molecule '" + name + "': spin weights are both zero");
}

MoleculeSpec co2() {
  return MoleculeSpec{"CO2", 0.39021, 2.1, 2.911, 1.0, 0.0};
}

int ThermalEnsemble::max_j() const {
  int j = 0;
  for (const auto& c : channels) j = std::max(j, c.j0);
  return j;
}

double ThermalEnsemble::total_weight() const {
  double sum = 0.0;
  for (const auto& c : channels) sum += c.weight;
  return sum;
}

double rotational_energy(int j, const MoleculeSpec& molecule) {
  if (j < 0) throw ConfigError("rotational quantum number must be non-negative");
  return molecule.b_cm1 * j * (j + 1.0);
}

double level_frequency(int j, const MoleculeSpec& molecule) {
  return units::angular_frequency(rotational_energy(j, molecule));
}

double raman_frequency(int j, const MoleculeSpec& molecule) {
  if (j < 0) throw ConfigError("rotational quantum number must be non-negative");
  return units::angular_frequency(molecule.b_cm1 * (4.0 * j + 6.0));
}

double revival_period(const MoleculeSpec& molecule) {
  return 1.0 / (2.0 * molecule.b_cm1 * units::speed_of_light_cm_per_ps);
}

ThermalEnsemble boltzmann_ensemble(const MoleculeSpec& molecule, double temperature, double cutoff) {
  molecule.validate();
  if (!(temperature >= 0.0)) throw ConfigError("temperature must be non-negative");
  if (!(cutoff > 0.0 && cutoff < 1.0)) throw ConfigError("ensemble cutoff must lie in (0, 1)");

  const int j_ground = molecule.g_even > 0.0 ? 0 : 1;
  std::vector<double> level_weight;
  if (temperature == 0.0) {
    level_weight.assign(static_cast<std::size_t>(j_ground + 1), 0.0);
    level_weight.back() = 1.0;
  } else {
    // Boltzmann factors relative to the lowest allowed level; the series is
    // summed well past the point where terms stop mattering.
    const double kt = units::boltzmann_cm1_per_kelvin * temperature;
    const double e_ground = rotational_energy(j_ground, molecule);
    double peak = 0.0;
    for (int j = 0;; ++j) {
      const double g = molecule.spin_weight(j);
      const double w = g * (2.0 * j + 1.0) * std::exp(-(rotational_energy(j, molecule) - e_ground) / kt);
      level_weight.push_back(w);
      peak = std::max(peak, w);
      const bool past_peak = rotational_energy(j, molecule) - e_ground > kt;
      if (past_peak && g > 0.0 && w < 1e-18 * peak) break;
    }
  }

  const double total = std::accumulate(level_weight.begin(), level_weight.end(), 0.0);
  // Include levels until the omitted tail drops below the cutoff.
  double included = 0.0;
  std::size_t last = 0;
  for (std::size_t j = 0; j < level_weight.size(); ++j) {
    included += level_weight[j];
    last = j;
    if ((total - included) / total < cutoff) break;
  }

  ThermalEnsemble ensemble;
  ensemble.temperature = temperature;
  double kept = 0.0;
  for (std::size_t j = 0; j <= last; ++j) kept += level_weight[j];
  for (std::size_t j = 0; j <= last; ++j) {
    if (level_weight[j] == 0.0) continue;
    const int jj = static_cast<int>(j);
    const double per_m = level_weight[j] / kept / (2.0 * jj + 1.0);
    for (int m = -jj; m <= jj; ++m) ensemble.channels.push_back({jj, m, per_m});
  }
  const double sum = ensemble.total_weight();
  for (auto& c : ensemble.channels) c.weight /= sum;
  return ensemble;
}

int suggested_j_max(const ThermalEnsemble& ensemble, double xi) {
  return std::max(2, ensemble.max_j() + static_cast<int>(std::ceil(4.0 * xi)) + 10);
}

}  // namespace rotorgrating
