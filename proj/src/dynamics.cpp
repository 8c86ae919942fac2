#include "rotorgrating/dynamics.hpp"

#include "rotorgrating/error.hpp"
#include "rotorgrating/units.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <string>

namespace rotorgrating {
namespace {

using Complex = std::complex<double>;
using State = std::vector<Complex>;
namespace odeint = boost::numeric::odeint;

constexpr Complex kI{0.0, 1.0};

// Absolute tolerance relative to the requested relative tolerance; amplitudes
// are O(1) so this mostly guards the near-empty high-J tail.
constexpr double kAbsoluteToleranceRatio = 1e-2;

void require_normalized(const Wavepacket& wp) {
  if (wp.amplitudes.size() == 0) throw ConfigError("wavepacket has no amplitudes");
  if (std::abs(wp.norm() - 1.0) > kNormTolerance)
    throw ConfigError("wavepacket is not normalized (norm = " + std::to_string(wp.norm()) + ")");
}

void check_result(const Wavepacket& wp) {
  const double norm_error = std::abs(wp.norm() - 1.0);
  if (!(norm_error <= kNormTolerance))
    throw IntegrationError("norm drifted by " + [&]{ char b[32]; std::snprintf(b, sizeof b, "%.3e", norm_error); return std::string(b); }() +
                           " during propagation (tolerance 1e-9)");
  const double edge = wp.edge_population();
  if (edge > kEdgePopulationLimit)
    throw BasisTooSmallError("population " + std::to_string(edge) + " reached the top of the basis (j_max = " +
                                 std::to_string(wp.j_max) + ")",
                             wp.j_max, edge);
}

// Integrates dc/dt = f(t, c) over [t_start, t_end] in chunks of at most
// max_step so the adaptive controller cannot step across the pulse while the
// right-hand side is still negligible.
template <typename Rhs>
void integrate(Rhs&& rhs, State& state, const PropagationGrid& grid) {
  auto stepper = odeint::make_controlled(grid.relative_tolerance * kAbsoluteToleranceRatio,
                                         grid.relative_tolerance,
                                         odeint::runge_kutta_fehlberg78<State>());
  const auto chunks = static_cast<int>(std::ceil((grid.t_end - grid.t_start) / grid.max_step));
  const double width = (grid.t_end - grid.t_start) / chunks;
  for (int k = 0; k < chunks; ++k) {
    const double a = grid.t_start + k * width;
    const double b = (k + 1 == chunks) ? grid.t_end : a + width;
    odeint::integrate_adaptive(stepper, rhs, state, a, b, width / 4.0);
  }
  for (const auto& c : state)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw IntegrationError("integrator produced a non-finite amplitude");
}

// Phase factors exp(i omega_J tau) for J = j_first, j_first + step, ... using
// the constant second difference of B J(J+1).
void level_phases(double omega_unit, int j_first, int step, std::size_t count, double tau,
                  std::vector<Complex>& out) {
  out.resize(count);
  if (count == 0) return;
  const double jf = j_first;
  Complex phase = std::polar(1.0, omega_unit * jf * (jf + 1.0) * tau);
  // omega_{J+step} - omega_J = omega_unit * step * (2J + step + 1)
  Complex ratio = std::polar(1.0, omega_unit * step * (2.0 * jf + step + 1.0) * tau);
  const Complex ratio_step = std::polar(1.0, omega_unit * 2.0 * step * step * tau);
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = phase;
    phase *= ratio;
    ratio *= ratio_step;
  }
}

double omega_unit(const MoleculeSpec& molecule) { return units::angular_frequency(molecule.b_cm1); }

}  // namespace

// ---------------------------------------------------------------------------
// Wavepacket

Wavepacket Wavepacket::basis_state(int j0, int m0, int j_max, double t) {
  if (j0 < 0 || std::abs(m0) > j0) throw ConfigError("invalid initial state |J0 M0>");
  if (j0 > j_max) throw ConfigError("initial J0 exceeds j_max");
  Wavepacket wp;
  wp.j0 = j0;
  wp.m0 = m0;
  wp.representation = Representation::fixed_m;
  wp.m = m0;
  wp.j_max = j_max;
  wp.amplitudes = Eigen::VectorXcd::Zero(j_max - std::abs(m0) + 1);
  wp.amplitudes(j0 - std::abs(m0)) = 1.0;
  wp.reference_time = t;
  return wp;
}

Wavepacket Wavepacket::basis_state_full(int j0, int m0, int j_max, double t) {
  if (j0 < 0 || std::abs(m0) > j0) throw ConfigError("invalid initial state |J0 M0>");
  if (j0 > j_max) throw ConfigError("initial J0 exceeds j_max");
  const FullBasis basis(j_max);
  Wavepacket wp;
  wp.j0 = j0;
  wp.m0 = m0;
  wp.representation = Representation::full;
  wp.j_max = j_max;
  wp.amplitudes = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
  wp.amplitudes(static_cast<Eigen::Index>(basis.index(j0, m0))) = 1.0;
  wp.reference_time = t;
  return wp;
}

int Wavepacket::j_of(Eigen::Index i) const {
  if (representation == Representation::fixed_m) return std::abs(m) + static_cast<int>(i);
  return FullBasis(j_max).j_of(static_cast<std::size_t>(i));
}

double Wavepacket::edge_population() const {
  double p = 0.0;
  for (Eigen::Index i = 0; i < amplitudes.size(); ++i)
    if (j_of(i) >= j_max - 1) p += std::norm(amplitudes(i));
  return p;
}

Wavepacket Wavepacket::evolved_to(double t, const MoleculeSpec& molecule) const {
  Wavepacket out = *this;
  const double dt = t - reference_time;
  for (Eigen::Index i = 0; i < amplitudes.size(); ++i)
    out.amplitudes(i) *= std::polar(1.0, -level_frequency(j_of(i), molecule) * dt);
  out.reference_time = t;
  return out;
}

void PropagationGrid::validate() const {
  if (!(t_start < t_end)) throw ConfigError("propagation grid requires t_start < t_end");
  if (!(max_step > 0.0)) throw ConfigError("propagation grid max_step must be positive");
  if (!(relative_tolerance > 0.0 && relative_tolerance <= 1e-4))
    throw ConfigError("relative tolerance must lie in (0, 1e-4]");
}

PropagationGrid PropagationGrid::around(const PulseSpec& pulse, double relative_tolerance) {
  return {pulse.t0 - 3.0 * pulse.tau_fwhm, pulse.t0 + 3.0 * pulse.tau_fwhm, pulse.tau_fwhm / 10.0,
          relative_tolerance};
}

// ---------------------------------------------------------------------------
// Linear TDSE

Wavepacket propagate_tdse_linear(const Wavepacket& wavepacket, const PulseSpec& pulse,
                                 const MoleculeSpec& molecule, const PropagationGrid& grid) {
  pulse.validate();
  molecule.validate();
  grid.validate();
  require_normalized(wavepacket);
  if (wavepacket.representation != Representation::fixed_m)
    throw ConfigError("linear TDSE requires a fixed-M wavepacket");
  if (!pulse.is_linear()) throw ConfigError("linear TDSE requires a linearly polarized pulse");
  if (grid.t_start > pulse.t0 - 3.0 * pulse.tau_fwhm || grid.t_end < pulse.t0 + 3.0 * pulse.tau_fwhm)
    throw ConfigError("propagation grid must span at least t0 +- 3 tau");

  // Interaction picture about the pulse centre: psi_J(t) = exp(-i w_J (t - t0)) c_J(t).
  Wavepacket out = wavepacket.evolved_to(pulse.t0, molecule);
  if (pulse.peak_intensity > 0.0) {
    const Cos2Block block(wavepacket.m, wavepacket.j_max);
    const double w_unit = omega_unit(molecule);
    for (int parity = 0; parity < 2; ++parity) {
      int j_first = block.j_min();
      if (j_first % 2 != parity) ++j_first;
      if (j_first > block.j_max()) continue;
      const auto count = static_cast<std::size_t>((block.j_max() - j_first) / 2 + 1);
      State c(count);
      bool empty = true;
      for (std::size_t k = 0; k < count; ++k) {
        c[k] = out.amplitudes(j_first + 2 * static_cast<int>(k) - block.j_min());
        if (c[k] != Complex{}) empty = false;
      }
      if (empty) continue;  // parity is conserved: an empty sub-block stays empty

      std::vector<double> diag(count), upper(count);
      for (std::size_t k = 0; k < count; ++k) {
        const int j = j_first + 2 * static_cast<int>(k);
        diag[k] = block.diagonal(j);
        upper[k] = block.coupling(j);
      }
      std::vector<Complex> phases, y(count);
      auto rhs = [&](const State& s, State& ds, double t) {
        const double rate = xi_rate(pulse, molecule, t);
        level_phases(w_unit, j_first, 2, count, t - pulse.t0, phases);
        for (std::size_t k = 0; k < count; ++k) y[k] = std::conj(phases[k]) * s[k];
        for (std::size_t k = 0; k < count; ++k) {
          Complex z = diag[k] * y[k];
          if (k + 1 < count) z += upper[k] * y[k + 1];
          if (k > 0) z += upper[k - 1] * y[k - 1];
          ds[k] = kI * rate * phases[k] * z;
        }
      };
      integrate(rhs, c, grid);
      for (std::size_t k = 0; k < count; ++k)
        out.amplitudes(j_first + 2 * static_cast<int>(k) - block.j_min()) = c[k];
    }
  }
  out = out.evolved_to(grid.t_end, molecule);
  check_result(out);
  return out;
}

// ---------------------------------------------------------------------------
// Sudden kicks

LinearKick::LinearKick(int m, int j_max) : m_(m), j_max_(j_max) {
  const Cos2Block block(m, j_max);
  for (int parity = 0; parity < 2; ++parity) {
    int j_first = block.j_min();
    if (j_first % 2 != parity) ++j_first;
    if (j_first > j_max) continue;
    const int count = (j_max - j_first) / 2 + 1;
    Eigen::VectorXd diag(count), sub(std::max(count - 1, 0));
    for (int k = 0; k < count; ++k) {
      diag(k) = block.diagonal(j_first + 2 * k);
      if (k + 1 < count) sub(k) = block.coupling(j_first + 2 * k);
    }
    ParityBlock pb;
    pb.j_first = j_first;
    if (count == 1) {
      pb.eigenvalues = diag;
      pb.eigenvectors = Eigen::MatrixXd::Identity(1, 1);
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
      solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      if (solver.info() != Eigen::Success) throw NumericalError("cos^2 block eigendecomposition failed");
      pb.eigenvalues = solver.eigenvalues();
      pb.eigenvectors = solver.eigenvectors();
    }
    blocks_.push_back(std::move(pb));
  }
}

Eigen::VectorXcd LinearKick::apply(const Eigen::VectorXcd& amplitudes, double xi) const {
  const int j_min = std::abs(m_);
  if (amplitudes.size() != j_max_ - j_min + 1) throw ConfigError("amplitude vector does not match kick block");
  Eigen::VectorXcd out = amplitudes;
  if (xi == 0.0) return out;
  for (const auto& pb : blocks_) {
    const auto count = pb.eigenvalues.size();
    Eigen::VectorXcd sub(count);
    for (Eigen::Index k = 0; k < count; ++k) sub(k) = amplitudes(pb.j_first + 2 * k - j_min);
    if (sub.isZero(0.0)) continue;
    Eigen::VectorXcd coeff = pb.eigenvectors.transpose() * sub;
    for (Eigen::Index k = 0; k < count; ++k) coeff(k) *= std::polar(1.0, xi * pb.eigenvalues(k));
    sub = pb.eigenvectors * coeff;
    for (Eigen::Index k = 0; k < count; ++k) out(pb.j_first + 2 * k - j_min) = sub(k);
  }
  return out;
}

EllipticInteraction::EllipticInteraction(int j_max, double a2, double b2)
    : j_max_(j_max), a2_(a2), b2_(b2) {
  if (a2 < 0.0 || b2 < 0.0 || std::abs(a2 + b2 - 1.0) > 1e-12)
    throw ConfigError("elliptic weights must satisfy A^2 + B^2 = 1");
  const BasisSpec basis{j_max};
  SparseOperator k = a2 * cos2theta_x_matrix(basis) + b2 * cos2theta_y_matrix(basis);
  const FullBasis full(j_max);
  for (int jp = 0; jp < 2; ++jp) {
    for (int mp = 0; mp < 2; ++mp) {
      Subspace s;
      std::vector<Eigen::Index> position(full.size(), -1);
      for (int j = jp; j <= j_max; j += 2)
        for (int m = -j; m <= j; ++m)
          if (((m % 2) + 2) % 2 == mp) {
            position[full.index(j, m)] = static_cast<Eigen::Index>(s.indices.size());
            s.indices.push_back(static_cast<Eigen::Index>(full.index(j, m)));
            s.j_values.push_back(j);
          }
      if (s.indices.empty()) continue;
      std::vector<Eigen::Triplet<double>> triplets;
      for (std::size_t r = 0; r < s.indices.size(); ++r) {
        double row_sum = 0.0;
        for (SparseOperator::InnerIterator it(k, s.indices[r]); it; ++it) {
          const Eigen::Index c = position[static_cast<std::size_t>(it.col())];
          if (c < 0) throw NumericalError("elliptic operator couples different parity subspaces");
          triplets.emplace_back(static_cast<Eigen::Index>(r), c, it.value());
          row_sum += std::abs(it.value());
        }
        s.inf_norm = std::max(s.inf_norm, row_sum);
      }
      const auto n = static_cast<Eigen::Index>(s.indices.size());
      s.op.resize(n, n);
      s.op.setFromTriplets(triplets.begin(), triplets.end());
      s.op.makeCompressed();
      subspaces_.push_back(std::move(s));
    }
  }
}

Eigen::VectorXcd EllipticInteraction::kick(const Eigen::VectorXcd& amplitudes, double xi) const {
  Eigen::VectorXcd out = amplitudes;
  if (xi == 0.0) return out;
  for (const auto& s : subspaces_) {
    const auto n = static_cast<Eigen::Index>(s.indices.size());
    Eigen::VectorXcd v(n);
    for (Eigen::Index r = 0; r < n; ++r) v(r) = amplitudes(s.indices[static_cast<std::size_t>(r)]);
    if (v.isZero(0.0)) continue;
    // exp(i xi K) v = (exp(i xi K / steps))^steps v with ||xi K / steps|| <= 1/2.
    const int steps = std::max(1, static_cast<int>(std::ceil(2.0 * std::abs(xi) * s.inf_norm)));
    const double h = xi / steps;
    for (int step = 0; step < steps; ++step) {
      Eigen::VectorXcd term = v;
      Eigen::VectorXcd sum = v;
      for (int order = 1; order < 60; ++order) {
        Eigen::VectorXcd next = (kI * (h / order)) * (s.op * term);
        term.swap(next);
        sum += term;
        if (term.norm() <= 1e-18 * sum.norm()) break;
      }
      v.swap(sum);
    }
    for (Eigen::Index r = 0; r < n; ++r) out(s.indices[static_cast<std::size_t>(r)]) = v(r);
  }
  return out;
}

Wavepacket propagate_sudden(const Wavepacket& wavepacket, EffectiveArea xi, double a2, double b2) {
  require_normalized(wavepacket);
  if (xi.xi < 0.0) throw ConfigError("effective area must be non-negative");
  if (a2 < 0.0 || b2 < 0.0 || std::abs(a2 + b2 - 1.0) > 1e-12)
    throw ConfigError("kick weights must satisfy A^2 + B^2 = 1");
  if (wavepacket.representation == Representation::full)
    return propagate_sudden(wavepacket, xi, EllipticInteraction(wavepacket.j_max, a2, b2));
  if (a2 != 0.0 && b2 != 0.0)
    throw ConfigError("fixed-M wavepackets accept only a linearly polarized kick");
  Wavepacket out = wavepacket;
  out.amplitudes = LinearKick(wavepacket.m, wavepacket.j_max).apply(wavepacket.amplitudes, xi.xi);
  return out;
}

Wavepacket propagate_sudden(const Wavepacket& wavepacket, EffectiveArea xi,
                            const EllipticInteraction& interaction) {
  require_normalized(wavepacket);
  if (wavepacket.representation != Representation::full || wavepacket.j_max != interaction.j_max())
    throw ConfigError("elliptic kick requires a full-basis wavepacket of matching j_max");
  Wavepacket out = wavepacket;
  out.amplitudes = interaction.kick(wavepacket.amplitudes, xi.xi);
  return out;
}

// ---------------------------------------------------------------------------
// Elliptic TDSE

Wavepacket propagate_elliptic_tdse(const Wavepacket& wavepacket, const PulseSpec& pulse,
                                   const MoleculeSpec& molecule, const PropagationGrid& grid) {
  const double a2 = pulse.pol_a * pulse.pol_a;
  return propagate_elliptic_tdse(wavepacket, pulse, molecule, grid,
                                 EllipticInteraction(wavepacket.j_max, a2, 1.0 - a2));
}

Wavepacket propagate_elliptic_tdse(const Wavepacket& wavepacket, const PulseSpec& pulse,
                                   const MoleculeSpec& molecule, const PropagationGrid& grid,
                                   const EllipticInteraction& interaction) {
  pulse.validate();
  molecule.validate();
  grid.validate();
  require_normalized(wavepacket);
  if (wavepacket.representation != Representation::full || wavepacket.j_max != interaction.j_max())
    throw ConfigError("elliptic TDSE requires a full-basis wavepacket of matching j_max");
  if (std::abs(pulse.pol_a * pulse.pol_a - interaction.a2()) > 1e-12)
    throw ConfigError("pulse polarization does not match the elliptic interaction");
  if (grid.t_start > pulse.t0 - 3.0 * pulse.tau_fwhm || grid.t_end < pulse.t0 + 3.0 * pulse.tau_fwhm)
    throw ConfigError("propagation grid must span at least t0 +- 3 tau");

  Wavepacket out = wavepacket.evolved_to(pulse.t0, molecule);
  if (pulse.peak_intensity > 0.0) {
    const double w_unit = omega_unit(molecule);
    for (const auto& s : interaction.subspaces()) {
      const std::size_t n = s.indices.size();
      State c(n);
      bool empty = true;
      for (std::size_t r = 0; r < n; ++r) {
        c[r] = out.amplitudes(s.indices[r]);
        if (c[r] != Complex{}) empty = false;
      }
      if (empty) continue;
      std::vector<Complex> level(static_cast<std::size_t>(interaction.j_max() + 1));
      std::vector<Complex> y(n);
      auto rhs = [&](const State& st, State& ds, double t) {
        const double rate = xi_rate(pulse, molecule, t);
        level_phases(w_unit, 0, 1, level.size(), t - pulse.t0, level);
        for (std::size_t r = 0; r < n; ++r)
          y[r] = std::conj(level[static_cast<std::size_t>(s.j_values[r])]) * st[r];
        for (std::size_t r = 0; r < n; ++r) {
          Complex z{};
          for (SparseOperator::InnerIterator it(s.op, static_cast<Eigen::Index>(r)); it; ++it)
            z += it.value() * y[static_cast<std::size_t>(it.col())];
          ds[r] = kI * rate * level[static_cast<std::size_t>(s.j_values[r])] * z;
        }
      };
      integrate(rhs, c, grid);
      for (std::size_t r = 0; r < n; ++r) out.amplitudes(s.indices[r]) = c[r];
    }
  }
  out = out.evolved_to(grid.t_end, molecule);
  check_result(out);
  return out;
}

}  // namespace rotorgrating
