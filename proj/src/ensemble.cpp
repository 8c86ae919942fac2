#include "rotorgrating/dynamics.hpp"
#include "rotorgrating/error.hpp"
#include "rotorgrating/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <string>

namespace rotorgrating {
namespace {

constexpr int kMaxBasisEnlargements = 5;

void finalize_diagnostics(PropagatedEnsemble& result) {
  for (const auto& c : result.channels) {
    result.max_norm_error = std::max(result.max_norm_error, std::abs(c.state.norm() - 1.0));
    result.max_edge_population = std::max(result.max_edge_population, c.state.edge_population());
  }
  if (result.max_edge_population > kEdgePopulationLimit)
    throw BasisTooSmallError("population " + std::to_string(result.max_edge_population) +
                                 " reached the top of the basis (j_max = " + std::to_string(result.j_max) + ")",
                             result.j_max, result.max_edge_population);
}

// Runs `attempt(j_max)`; when j_max was chosen heuristically, a basis-too-small
// failure triggers a retry with a larger basis.
template <typename Attempt>
PropagatedEnsemble with_basis_enlargement(const ThermalEnsemble& ensemble, double xi,
                                          const SimulationOptions& options, Attempt&& attempt) {
  if (options.j_max > 0) return attempt(options.j_max);
  int j_max = suggested_j_max(ensemble, xi);
  for (int tries = 0;; ++tries) {
    try {
      return attempt(j_max);
    } catch (const BasisTooSmallError&) {
      if (tries >= kMaxBasisEnlargements) throw;
      j_max += std::max(10, j_max / 2);
    }
  }
}

}  // namespace

std::string_view to_string(Propagator propagator) {
  return propagator == Propagator::tdse ? "tdse" : "sudden";
}

Propagator parse_propagator(std::string_view text) {
  if (text == "tdse") return Propagator::tdse;
  if (text == "sudden") return Propagator::sudden;
  throw ConfigError("unknown propagator '" + std::string(text) + "' (expected tdse or sudden)");
}

std::vector<Channel> fold_mirror_channels(const ThermalEnsemble& ensemble) {
  std::map<std::pair<int, int>, double> folded;
  for (const auto& c : ensemble.channels) folded[{c.j0, std::abs(c.m0)}] += c.weight;
  std::vector<Channel> out;
  out.reserve(folded.size());
  for (const auto& [key, weight] : folded) out.push_back({key.first, key.second, weight});
  return out;
}

PropagatedEnsemble propagate_linear_ensemble(const MoleculeSpec& molecule, const ThermalEnsemble& ensemble,
                                             const PulseSpec& pulse, const SimulationOptions& options) {
  molecule.validate();
  pulse.validate();
  const Axis axis = pulse.linear_axis();
  const double xi = effective_area(pulse, molecule).xi;
  const auto channels = fold_mirror_channels(ensemble);

  return with_basis_enlargement(ensemble, xi, options, [&](int j_max) {
    if (ensemble.max_j() > j_max)
      throw BasisTooSmallError("j_max = " + std::to_string(j_max) + " is below the highest thermally populated J = " +
                                   std::to_string(ensemble.max_j()),
                               j_max, 1.0);
    PropagatedEnsemble result;
    result.molecule = molecule;
    result.temperature = ensemble.temperature;
    result.pulse = pulse;
    result.xi = xi;
    result.j_max = j_max;
    result.representation = Representation::fixed_m;
    result.quantization_axis = axis;
    result.channels.resize(channels.size());

    const PropagationGrid grid = PropagationGrid::around(pulse, options.relative_tolerance);
    result.reference_time = options.propagator == Propagator::tdse ? grid.t_end : pulse.t0;

    std::vector<std::unique_ptr<LinearKick>> kicks;
    if (options.propagator == Propagator::sudden) {
      kicks.resize(static_cast<std::size_t>(ensemble.max_j() + 1));
      parallel_for(kicks.size(), options.threads,
                   [&](std::size_t m) { kicks[m] = std::make_unique<LinearKick>(static_cast<int>(m), j_max); });
    }

    parallel_for(channels.size(), options.threads, [&](std::size_t i) {
      const auto& ch = channels[i];
      auto& slot = result.channels[i];
      slot.weight = ch.weight;
      if (options.propagator == Propagator::tdse) {
        const auto initial = Wavepacket::basis_state(ch.j0, ch.m0, j_max, grid.t_start);
        slot.state = propagate_tdse_linear(initial, pulse, molecule, grid);
      } else {
        slot.state = Wavepacket::basis_state(ch.j0, ch.m0, j_max, pulse.t0);
        slot.state.amplitudes = kicks[static_cast<std::size_t>(ch.m0)]->apply(slot.state.amplitudes, xi);
      }
    });
    finalize_diagnostics(result);
    return result;
  });
}

PropagatedEnsemble propagate_elliptic_ensemble(const MoleculeSpec& molecule, const ThermalEnsemble& ensemble,
                                               const PulseSpec& pulse, const SimulationOptions& options) {
  molecule.validate();
  pulse.validate();
  const double xi = effective_area(pulse, molecule).xi;
  const double a2 = pulse.pol_a * pulse.pol_a;
  const auto channels = fold_mirror_channels(ensemble);

  return with_basis_enlargement(ensemble, xi, options, [&](int j_max) {
    if (ensemble.max_j() > j_max)
      throw BasisTooSmallError("j_max = " + std::to_string(j_max) + " is below the highest thermally populated J = " +
                                   std::to_string(ensemble.max_j()),
                               j_max, 1.0);
    PropagatedEnsemble result;
    result.molecule = molecule;
    result.temperature = ensemble.temperature;
    result.pulse = pulse;
    result.xi = xi;
    result.j_max = j_max;
    result.representation = Representation::full;
    result.quantization_axis = Axis::z;
    result.channels.resize(channels.size());

    const PropagationGrid grid = PropagationGrid::around(pulse, options.relative_tolerance);
    result.reference_time = options.propagator == Propagator::tdse ? grid.t_end : pulse.t0;

    // Each channel runs in the smallest basis holding J0 plus kick headroom;
    // the full-basis index J^2+J+M makes that basis a prefix of the global one.
    const int headroom = static_cast<int>(std::ceil(4.0 * xi)) + 10;
    std::map<int, std::unique_ptr<EllipticInteraction>> interactions;
    auto local_j_max = [&](int j0) { return std::min(j_max, j0 + headroom); };
    for (const auto& ch : channels) {
      auto& slot = interactions[local_j_max(ch.j0)];
      if (!slot) slot = std::make_unique<EllipticInteraction>(local_j_max(ch.j0), a2, 1.0 - a2);
    }
    if (!interactions.count(j_max)) interactions[j_max] = std::make_unique<EllipticInteraction>(j_max, a2, 1.0 - a2);

    auto run = [&](const Channel& ch, const EllipticInteraction& interaction) {
      if (options.propagator == Propagator::tdse) {
        const auto initial = Wavepacket::basis_state_full(ch.j0, ch.m0, interaction.j_max(), grid.t_start);
        return propagate_elliptic_tdse(initial, pulse, molecule, grid, interaction);
      }
      const auto initial = Wavepacket::basis_state_full(ch.j0, ch.m0, interaction.j_max(), pulse.t0);
      return propagate_sudden(initial, EffectiveArea{xi}, interaction);
    };

    parallel_for(channels.size(), options.threads, [&](std::size_t i) {
      const auto& ch = channels[i];
      auto& slot = result.channels[i];
      slot.weight = ch.weight;
      const int local = local_j_max(ch.j0);
      bool fits = true;
      try {
        slot.state = run(ch, *interactions.at(local));
        fits = slot.state.edge_population() <= kEdgePopulationLimit;
      } catch (const BasisTooSmallError&) {
        if (local == j_max) throw;
        fits = false;
      }
      if (!fits && local < j_max) {
        slot.state = run(ch, *interactions.at(j_max));
      } else if (local < j_max) {
        const auto n = slot.state.amplitudes.size();
        slot.state.amplitudes.conservativeResize(static_cast<Eigen::Index>(FullBasis(j_max).size()));
        slot.state.amplitudes.tail(slot.state.amplitudes.size() - n).setZero();
        slot.state.j_max = j_max;
      }
    });
    finalize_diagnostics(result);
    return result;
  });
}

}  // namespace rotorgrating
