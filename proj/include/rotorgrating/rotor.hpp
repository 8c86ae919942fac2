#pragma once

// Rigid linear rotor: level structure, thermal ensembles and the angular
// operators cos^2(theta_i) in the |J M> basis.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace rotorgrating {

/// Laboratory axis. The linear-polarization pipeline quantizes along the
/// polarization axis; the full (J, M) basis quantizes along z.
enum class Axis { x, y, z };

std::string_view to_string(Axis axis);
Axis parse_axis(std::string_view text);

struct MoleculeSpec {
  std::string name;
  double b_cm1 = 0.0;           // rotational constant
  double delta_alpha_a3 = 0.0;  // alpha_parallel - alpha_perp
  double alpha_bar_a3 = 0.0;    // informational only
  double g_even = 1.0;          // nuclear-spin weights
  double g_odd = 1.0;

  double spin_weight(int j) const { return (j % 2 == 0) ? g_even : g_odd; }

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

/// Shipped default: CO2 with only even J populated.
MoleculeSpec co2();

struct BasisSpec {
  int j_max = 2;
};

struct Channel {
  int j0 = 0;
  int m0 = 0;
  double weight = 0.0;
};

struct ThermalEnsemble {
  double temperature = 0.0;
  std::vector<Channel> channels;

  /// Largest initial J among the channels.
  int max_j() const;
  double total_weight() const;
};

/// E_J = B J(J+1) in cm^-1.
double rotational_energy(int j, const MoleculeSpec& molecule);

/// Angular frequency of level J, E_J converted to rad/ps.
double level_frequency(int j, const MoleculeSpec& molecule);

/// Beat frequency of the J <-> J+2 coherence, 2 pi c B (4J+6), in rad/ps.
double raman_frequency(int j, const MoleculeSpec& molecule);

/// Full revival period 1/(2Bc) in ps.
double revival_period(const MoleculeSpec& molecule);

/// Thermal ensemble over (J0, M0) channels. Levels are included in ascending
/// J until the omitted Boltzmann tail falls below `cutoff`; weights are then
/// renormalized. Spin-forbidden levels carry no channels.
ThermalEnsemble boltzmann_ensemble(const MoleculeSpec& molecule, double temperature,
                                   double cutoff = 1e-5);

/// Basis truncation heuristic: thermal J plus kick headroom.
int suggested_j_max(const ThermalEnsemble& ensemble, double xi);

/// <j1 m1; j2 m2 | j m> with the Condon-Shortley convention.
double clebsch_gordan(int j1, int m1, int j2, int m2, int j, int m);

/// cos^2(theta) in the fixed-M block |J M>, J = |M| .. j_max. Only the
/// diagonal and the J <-> J+2 couplings are nonzero.
class Cos2Block {
 public:
  Cos2Block(int m, int j_max);

  int m() const { return m_; }
  int j_min() const { return j_min_; }
  int j_max() const { return j_max_; }
  std::size_t size() const { return diagonal_.size(); }

  /// <J M|cos^2|J M>
  double diagonal(int j) const { return diagonal_[static_cast<std::size_t>(j - j_min_)]; }
  /// <J+2 M|cos^2|J M>; zero when J+2 exceeds j_max.
  double coupling(int j) const;

  Eigen::MatrixXd dense() const;

 private:
  int m_;
  int j_min_;
  int j_max_;
  std::vector<double> diagonal_;
  std::vector<double> coupling_;
};

Cos2Block cos2theta_matrix(const BasisSpec& basis, int m);

/// Closed-form matrix elements used by Cos2Block.
double cos2_diagonal_element(int j, int m);
double cos2_coupling_element(int j, int m);

/// Index map of the full basis {|J M>: 0 <= J <= j_max, -J <= M <= J}.
class FullBasis {
 public:
  explicit FullBasis(int j_max) : j_max_(j_max) {}

  int j_max() const { return j_max_; }
  std::size_t size() const { return static_cast<std::size_t>((j_max_ + 1) * (j_max_ + 1)); }
  std::size_t index(int j, int m) const { return static_cast<std::size_t>(j * j + j + m); }
  int j_of(std::size_t i) const;
  int m_of(std::size_t i) const {
    const int j = j_of(i);
    return static_cast<int>(i) - j * j - j;
  }

 private:
  int j_max_;
};

using SparseOperator = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// sin^2(theta) cos^2(phi) on the full basis (couples dJ, dM in {0, +-2}).
SparseOperator cos2theta_x_matrix(const BasisSpec& basis);
/// sin^2(theta) sin^2(phi) on the full basis.
SparseOperator cos2theta_y_matrix(const BasisSpec& basis);
/// cos^2(theta) on the full basis (dM = 0).
SparseOperator cos2theta_z_matrix(const BasisSpec& basis);
SparseOperator cos2theta_matrix_full(const BasisSpec& basis, Axis axis);

}  // namespace rotorgrating
