#include "oracle.hpp"

#include "rotorgrating/dynamics.hpp"
#include "rotorgrating/error.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace rotorgrating;

namespace {

// Dense operator on a list of |J M> states, from quadrature.
Eigen::MatrixXd quadrature_operator(const std::vector<std::pair<int, int>>& states,
                                    const std::function<double(double, double)>& f) {
  const auto n = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXd op(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) {
      const auto [jr, mr] = states[static_cast<std::size_t>(r)];
      const auto [jc, mc] = states[static_cast<std::size_t>(c)];
      op(r, c) = oracle::matrix_element(jr, mr, jc, mc, f).real();
    }
  return op;
}

}  // namespace

TEST_CASE("fixed-M kick against a dense exponential") {
  const int j_max = 14;
  for (int m : {0, 1, 3}) {
    std::vector<std::pair<int, int>> states;
    for (int j = m; j <= j_max; ++j) states.emplace_back(j, m);
    const Eigen::MatrixXd h = quadrature_operator(states, oracle::cos2_z);
    const LinearKick kick(m, j_max);
    for (int j0 : {m, m + 1, m + 2}) {
      auto wp = Wavepacket::basis_state(j0, m, j_max);
      const double xi = 2.7;
      const auto kicked = propagate_sudden(wp, EffectiveArea{xi}, 0.0, 1.0);
      const auto expected = oracle::expi_symmetric(h, xi, wp.amplitudes);
      CHECK((kicked.amplitudes - expected).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((kick.apply(wp.amplitudes, xi) - expected).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(kicked.norm() == doctest::Approx(1.0).epsilon(1e-13));
    }
  }
}

TEST_CASE("elliptic kick against a dense exponential") {
  const int j_max = 8;
  const FullBasis basis(j_max);
  std::vector<std::pair<int, int>> states;
  for (std::size_t i = 0; i < basis.size(); ++i) states.emplace_back(basis.j_of(i), basis.m_of(i));
  const Eigen::MatrixXd x = quadrature_operator(states, oracle::cos2_x);
  const Eigen::MatrixXd y = quadrature_operator(states, oracle::cos2_y);
  for (double a2 : {0.0, 0.3, 0.5, 1.0}) {
    const EllipticInteraction interaction(j_max, a2, 1.0 - a2);
    for (auto [j0, m0] : {std::pair{0, 0}, std::pair{2, -1}, std::pair{3, 3}}) {
      const auto wp = Wavepacket::basis_state_full(j0, m0, j_max);
      const double xi = 1.9;
      const auto kicked = propagate_sudden(wp, EffectiveArea{xi}, interaction);
      const auto expected = oracle::expi_symmetric(a2 * x + (1.0 - a2) * y, xi, wp.amplitudes);
      CHECK((kicked.amplitudes - expected).cwiseAbs().maxCoeff() < 1e-11);
    }
  }
}

TEST_CASE("linear kick agrees in both representations") {
  // |J0 0> quantized along y is the same state as the y-kick acting in the
  // full basis only for J0 = 0; compare <cos^2 theta_y> instead.
  const int j_max = 16;
  const double xi = 3.0;
  const auto fixed = propagate_sudden(Wavepacket::basis_state(0, 0, j_max), EffectiveArea{xi}, 0.0, 1.0);
  const auto full = propagate_sudden(Wavepacket::basis_state_full(0, 0, j_max), EffectiveArea{xi}, 0.0, 1.0);
  const Eigen::MatrixXd block = cos2theta_matrix(BasisSpec{j_max}, 0).dense();
  const Eigen::MatrixXd oy(cos2theta_y_matrix(BasisSpec{j_max}));
  const double a = (fixed.amplitudes.adjoint() * block * fixed.amplitudes)(0).real();
  const double b = (full.amplitudes.adjoint() * oy * full.amplitudes)(0).real();
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("field-free evolution") {
  const auto m = co2();
  auto wp = Wavepacket::basis_state(0, 0, 10, 0.0);
  wp.amplitudes(0) = 1.0 / std::sqrt(2.0);
  wp.amplitudes(2) = 1.0 / std::sqrt(2.0);
  const auto later = wp.evolved_to(3.0, m);
  const double w2 = 2.0 * std::numbers::pi * 0.0299792458 * 0.39021 * 6.0;
  CHECK(std::arg(later.amplitudes(2) / later.amplitudes(0)) ==
        doctest::Approx(std::remainder(-w2 * 3.0, 2.0 * std::numbers::pi)).epsilon(1e-10));
  CHECK(later.reference_time == 3.0);
  const auto back = later.evolved_to(0.0, m);
  CHECK((back.amplitudes - wp.amplitudes).norm() < 1e-13);
  // a full revival restores the state
  const auto revived = wp.evolved_to(revival_period(m), m);
  CHECK((revived.amplitudes - wp.amplitudes).norm() < 1e-9);
}

TEST_CASE("weak pulse matches first-order perturbation theory") {
  const auto m = co2();
  const double tau = 0.1;
  const auto pulse = PulseSpec::linear(0.01, tau, Axis::y, 0.5);
  const double xi = effective_area(pulse, m).xi;
  const auto out = propagate_tdse_linear(Wavepacket::basis_state(0, 0, 12, 0.0), pulse, m,
                                         PropagationGrid::around(pulse))
                       .evolved_to(pulse.t0, m);
  const double w = raman_frequency(0, m);
  const double spectral = std::exp(-w * w * tau * tau / (16.0 * std::numbers::ln2));
  const double coupling = 2.0 / (3.0 * std::sqrt(5.0));
  const std::complex<double> expected = std::complex<double>{0.0, 1.0} * xi * coupling * spectral;
  const std::complex<double> c2 = out.amplitudes(2) / out.amplitudes(0);
  CHECK(std::abs(c2 - expected) < 1e-3 * std::abs(expected));
}

TEST_CASE("short pulse approaches the sudden kick") {
  const auto m = co2();
  const auto pulse = PulseSpec::linear(20.0, 0.005, Axis::y, 0.0);
  const double xi = effective_area(pulse, m).xi;
  const auto start = Wavepacket::basis_state(4, 2, 40, -1.0);
  const auto tdse = propagate_tdse_linear(start, pulse, m, PropagationGrid::around(pulse)).evolved_to(0.0, m);
  const auto kick = propagate_sudden(start.evolved_to(0.0, m), EffectiveArea{xi}, 0.0, 1.0);
  CHECK(std::abs(tdse.amplitudes.dot(kick.amplitudes)) > 1.0 - 1e-4);
}

TEST_CASE("TDSE preserves the norm at high intensity") {
  const auto m = co2();
  const auto pulse = PulseSpec::linear(80.0, 0.1);
  for (auto [j0, m0] : {std::pair{0, 0}, std::pair{16, 4}, std::pair{30, 30}}) {
    const auto out = propagate_tdse_linear(Wavepacket::basis_state(j0, m0, 90, -0.3), pulse, m,
                                           PropagationGrid::around(pulse));
    CHECK(std::abs(out.norm() - 1.0) <= kNormTolerance);
    CHECK(out.edge_population() < kEdgePopulationLimit);
  }
}

TEST_CASE("elliptic TDSE reduces to the linear one") {
  const auto m = co2();
  auto pulse = PulseSpec::linear(10.0, 0.1, Axis::y);
  const int j_max = 24;
  const auto lin = propagate_tdse_linear(Wavepacket::basis_state(0, 0, j_max, -0.3), pulse, m,
                                         PropagationGrid::around(pulse));
  const auto full = propagate_elliptic_tdse(Wavepacket::basis_state_full(0, 0, j_max, -0.3), pulse, m,
                                            PropagationGrid::around(pulse));
  const Eigen::MatrixXd block = cos2theta_matrix(BasisSpec{j_max}, 0).dense();
  const Eigen::MatrixXd oy(cos2theta_y_matrix(BasisSpec{j_max}));
  const double a = (lin.amplitudes.adjoint() * block * lin.amplitudes)(0).real();
  const double b = (full.amplitudes.adjoint() * oy * full.amplitudes)(0).real();
  CHECK(a == doctest::Approx(b).epsilon(1e-7));
}

TEST_CASE("norm-leak guard") {
  const auto m = co2();
  const auto pulse = PulseSpec::linear(60.0, 0.1);
  CHECK_THROWS_AS(propagate_tdse_linear(Wavepacket::basis_state(0, 0, 8, -0.3), pulse, m,
                                        PropagationGrid::around(pulse)),
                  BasisTooSmallError);
  try {
    propagate_tdse_linear(Wavepacket::basis_state(0, 0, 8, -0.3), pulse, m, PropagationGrid::around(pulse));
  } catch (const BasisTooSmallError& e) {
    CHECK(e.j_max() == 8);
    CHECK(e.edge_population() > kEdgePopulationLimit);
  }

  SUBCASE("ensemble enlarges the heuristic basis") {
    const auto ens = boltzmann_ensemble(m, 0.0);
    SimulationOptions opt;
    opt.propagator = Propagator::sudden;
    const auto out = propagate_linear_ensemble(m, ens, pulse, opt);
    CHECK(out.max_edge_population < kEdgePopulationLimit);
    CHECK(out.j_max >= suggested_j_max(ens, out.xi));
  }

  SUBCASE("a fixed basis that is too small is reported") {
    const auto ens = boltzmann_ensemble(m, 0.0);
    SimulationOptions opt;
    opt.propagator = Propagator::sudden;
    opt.j_max = 6;
    CHECK_THROWS_AS(propagate_linear_ensemble(m, ens, pulse, opt), BasisTooSmallError);
  }
}

TEST_CASE("mirror channels fold") {
  const auto ens = boltzmann_ensemble(co2(), 100.0);
  const auto folded = fold_mirror_channels(ens);
  double total = 0.0;
  for (const auto& c : folded) {
    CHECK(c.m0 >= 0);
    total += c.weight;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  std::size_t expected = 0;
  for (const auto& c : ens.channels)
    if (c.m0 >= 0) ++expected;
  CHECK(folded.size() == expected);
  for (std::size_t i = 1; i < folded.size(); ++i) {
    const bool ordered = folded[i - 1].j0 < folded[i].j0 ||
                         (folded[i - 1].j0 == folded[i].j0 && folded[i - 1].m0 < folded[i].m0);
    CHECK(ordered);
  }
  // (J0, M0 != 0) carries both mirror weights
  const auto& w = ens.channels;
  double w20 = 0.0, w21 = 0.0;
  for (const auto& c : w) {
    if (c.j0 == 2 && c.m0 == 0) w20 = c.weight;
    if (c.j0 == 2 && std::abs(c.m0) == 1) w21 += c.weight;
  }
  for (const auto& c : folded) {
    if (c.j0 == 2 && c.m0 == 0) CHECK(c.weight == doctest::Approx(w20));
    if (c.j0 == 2 && c.m0 == 1) CHECK(c.weight == doctest::Approx(w21));
  }
}

TEST_CASE("ensemble propagation") {
  const auto m = co2();
  const auto ens = boltzmann_ensemble(m, 30.0);
  const auto pulse = PulseSpec::linear(25.0, 0.1, Axis::y, 0.0);
  SimulationOptions opt;
  opt.propagator = Propagator::sudden;
  const auto out = propagate_linear_ensemble(m, ens, pulse, opt);
  CHECK(out.xi == doctest::Approx(effective_area(pulse, m).xi));
  CHECK(out.representation == Representation::fixed_m);
  CHECK(out.quantization_axis == Axis::y);
  CHECK(out.max_norm_error <= kNormTolerance);
  double total = 0.0;
  for (const auto& ch : out.channels) total += ch.weight;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  SUBCASE("invalid options") {
    CHECK_THROWS_AS(parse_propagator("euler"), ConfigError);
    CHECK(parse_propagator("tdse") == Propagator::tdse);
  }
}
