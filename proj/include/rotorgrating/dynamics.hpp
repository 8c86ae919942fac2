#pragma once

// Wavepacket propagation through the pump interaction
//   H(t) = B J(J+1) - (d xi/dt)(t) [A^2 cos^2(theta_x) + B^2 cos^2(theta_y)]
// either by direct integration of the TDSE or by the sudden kick
// exp(i xi A^2 cos^2 theta_x) exp(i xi B^2 cos^2 theta_y).

#include "rotorgrating/field.hpp"
#include "rotorgrating/rotor.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <vector>

namespace rotorgrating {

enum class Representation {
  fixed_m,  // |J M> at one M, quantized along the linear polarization axis
  full,     // all |J M>, J <= j_max, quantized along z
};

struct Wavepacket {
  int j0 = 0;
  int m0 = 0;
  Representation representation = Representation::fixed_m;
  int m = 0;  // block M (fixed_m only)
  int j_max = 2;
  Eigen::VectorXcd amplitudes;
  double reference_time = 0.0;  // ps

  /// |J0 M0> in the fixed-M block M = M0.
  static Wavepacket basis_state(int j0, int m0, int j_max, double t = 0.0);
  /// |J0 M0> in the full basis.
  static Wavepacket basis_state_full(int j0, int m0, int j_max, double t = 0.0);

  int j_of(Eigen::Index i) const;
  double norm() const { return amplitudes.norm(); }
  /// Population in the two highest J shells of the basis.
  double edge_population() const;
  /// Exact field-free evolution to time t.
  Wavepacket evolved_to(double t, const MoleculeSpec& molecule) const;
};

struct PropagationGrid {
  double t_start = -0.3;
  double t_end = 0.3;
  double max_step = 0.01;
  double relative_tolerance = 1e-10;

  void validate() const;
  /// [t0 - 3 tau, t0 + 3 tau] with steps capped at tau / 10.
  static PropagationGrid around(const PulseSpec& pulse, double relative_tolerance = 1e-10);
};

/// Edge-population threshold of the norm-leak guard.
inline constexpr double kEdgePopulationLimit = 1e-8;
/// Tolerated |norm - 1| after any propagation.
inline constexpr double kNormTolerance = 1e-9;

/// TDSE for a linearly polarized pulse in a fixed-M wavepacket whose
/// quantization axis is the polarization axis.
Wavepacket propagate_tdse_linear(const Wavepacket& wavepacket, const PulseSpec& pulse,
                                 const MoleculeSpec& molecule, const PropagationGrid& grid);

/// Instantaneous kick with effective area xi and weights a2 = A^2, b2 = B^2.
/// Fixed-M wavepackets accept only a single linear component (the kick acts
/// along the quantization axis, xi scaled by whichever weight is nonzero).
Wavepacket propagate_sudden(const Wavepacket& wavepacket, EffectiveArea xi, double a2, double b2);

/// TDSE with the full two-operator elliptic interaction in the (J, M) basis.
Wavepacket propagate_elliptic_tdse(const Wavepacket& wavepacket, const PulseSpec& pulse,
                                   const MoleculeSpec& molecule, const PropagationGrid& grid);

/// Eigendecomposition of the fixed-M cos^2 block, split by J parity, reused
/// for every kick applied in that block.
class LinearKick {
 public:
  LinearKick(int m, int j_max);

  int m() const { return m_; }
  int j_max() const { return j_max_; }

  /// Applies exp(i xi cos^2 theta) to amplitudes of this block.
  Eigen::VectorXcd apply(const Eigen::VectorXcd& amplitudes, double xi) const;

 private:
  struct ParityBlock {
    int j_first = 0;
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
  };
  int m_;
  int j_max_;
  std::vector<ParityBlock> blocks_;
};

/// a2 cos^2(theta_x) + b2 cos^2(theta_y) on the full basis, split into the
/// four invariant (J parity, M parity) subspaces.
class EllipticInteraction {
 public:
  EllipticInteraction(int j_max, double a2, double b2);

  struct Subspace {
    std::vector<Eigen::Index> indices;
    std::vector<int> j_values;
    SparseOperator op;
    double inf_norm = 0.0;
  };

  int j_max() const { return j_max_; }
  double a2() const { return a2_; }
  double b2() const { return b2_; }
  const std::vector<Subspace>& subspaces() const { return subspaces_; }

  /// exp(i xi K) applied by a scaled Taylor series on each subspace.
  Eigen::VectorXcd kick(const Eigen::VectorXcd& amplitudes, double xi) const;

 private:
  int j_max_;
  double a2_;
  double b2_;
  std::vector<Subspace> subspaces_;
};

Wavepacket propagate_elliptic_tdse(const Wavepacket& wavepacket, const PulseSpec& pulse,
                                   const MoleculeSpec& molecule, const PropagationGrid& grid,
                                   const EllipticInteraction& interaction);

Wavepacket propagate_sudden(const Wavepacket& wavepacket, EffectiveArea xi,
                            const EllipticInteraction& interaction);

// ---------------------------------------------------------------------------
// Thermal ensembles

enum class Propagator { tdse, sudden };

std::string_view to_string(Propagator propagator);
Propagator parse_propagator(std::string_view text);

struct SimulationOptions {
  Propagator propagator = Propagator::tdse;
  double cutoff = 1e-5;               // omitted Boltzmann tail
  int j_max = 0;                      // 0 selects the heuristic with automatic enlargement
  double relative_tolerance = 1e-10;
  unsigned threads = 0;               // 0 = hardware concurrency
};

struct WeightedWavepacket {
  double weight = 0.0;
  Wavepacket state;
};

struct PropagatedEnsemble {
  MoleculeSpec molecule;
  double temperature = 0.0;
  PulseSpec pulse;
  double xi = 0.0;
  int j_max = 0;
  Representation representation = Representation::fixed_m;
  Axis quantization_axis = Axis::y;
  std::vector<WeightedWavepacket> channels;
  double reference_time = 0.0;
  double max_norm_error = 0.0;
  double max_edge_population = 0.0;
};

/// Merges the mirror channels (J0, M0) and (J0, -M0), whose observables are
/// identical for fields polarized in the xy plane. Order: J0, then |M0|.
std::vector<Channel> fold_mirror_channels(const ThermalEnsemble& ensemble);

/// Linear pulse, fixed-M channels quantized along the polarization axis.
PropagatedEnsemble propagate_linear_ensemble(const MoleculeSpec& molecule,
                                             const ThermalEnsemble& ensemble,
                                             const PulseSpec& pulse,
                                             const SimulationOptions& options = {});

/// Arbitrary (A, B) in the full basis; the brute-force oracle.
PropagatedEnsemble propagate_elliptic_ensemble(const MoleculeSpec& molecule,
                                               const ThermalEnsemble& ensemble,
                                               const PulseSpec& pulse,
                                               const SimulationOptions& options = {});

}  // namespace rotorgrating
