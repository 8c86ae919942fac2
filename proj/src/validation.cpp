#include "rotorgrating/validation.hpp"

#include "rotorgrating/error.hpp"
#include "rotorgrating/units.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/spherical_harmonic.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <optional>

namespace rotorgrating {
namespace {

using Complex = std::complex<double>;

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

// Gauss-Legendre in cos(theta) x uniform phi, 64 x 64.
struct SphereGrid {
  std::vector<double> theta, phi, weight;

  SphereGrid() {
    using Rule = boost::math::quadrature::gauss<double, 64>;
    std::vector<double> x, w;
    const auto& a = Rule::abscissa();
    const auto& wt = Rule::weights();
    for (std::size_t i = 0; i < a.size(); ++i) {
      x.push_back(a[i]);
      w.push_back(wt[i]);
      if (a[i] != 0.0) {
        x.push_back(-a[i]);
        w.push_back(wt[i]);
      }
    }
    constexpr int n_phi = 64;
    for (std::size_t i = 0; i < x.size(); ++i)
      for (int k = 0; k < n_phi; ++k) {
        theta.push_back(std::acos(x[i]));
        phi.push_back(2.0 * units::pi * k / n_phi);
        weight.push_back(w[i] * 2.0 * units::pi / n_phi);
      }
  }
};

double max_trace_difference(const AlignmentTrace& a, const AlignmentTrace& b) { return max_abs_difference(a, b); }

CheckResult guarded(const std::string& name, const std::string& target, const std::function<CheckResult()>& body) {
  try {
    return body();
  } catch (const NumericalError& e) {
    return {name, false, std::nan(""), target, e.what()};
  }
}

}  // namespace

double operator_quadrature_deviation(int j_limit) {
  const SphereGrid grid;
  const std::size_t nodes = grid.theta.size();
  const FullBasis basis(j_limit);
  const std::size_t n = basis.size();

  std::vector<std::vector<Complex>> y(n, std::vector<Complex>(nodes));
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t q = 0; q < nodes; ++q)
      y[s][q] = boost::math::spherical_harmonic(static_cast<unsigned>(basis.j_of(s)), basis.m_of(s), grid.theta[q],
                                                grid.phi[q]);

  std::vector<double> fx(nodes), fy(nodes), fz(nodes);
  for (std::size_t q = 0; q < nodes; ++q) {
    const double st = std::sin(grid.theta[q]), ct = std::cos(grid.theta[q]);
    fx[q] = st * st * std::cos(grid.phi[q]) * std::cos(grid.phi[q]);
    fy[q] = st * st * std::sin(grid.phi[q]) * std::sin(grid.phi[q]);
    fz[q] = ct * ct;
  }

  const BasisSpec spec{j_limit};
  const SparseOperator ox = cos2theta_x_matrix(spec), oy = cos2theta_y_matrix(spec), oz = cos2theta_z_matrix(spec);
  double worst = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      Complex ix{}, iy{}, iz{};
      for (std::size_t q = 0; q < nodes; ++q) {
        const Complex p = std::conj(y[r][q]) * y[c][q] * grid.weight[q];
        ix += p * fx[q];
        iy += p * fy[q];
        iz += p * fz[q];
      }
      const auto ri = static_cast<Eigen::Index>(r), ci = static_cast<Eigen::Index>(c);
      worst = std::max({worst, std::abs(ix - ox.coeff(ri, ci)), std::abs(iy - oy.coeff(ri, ci)),
                        std::abs(iz - oz.coeff(ri, ci))});

      // fixed-M block elements from the same quadrature
      const int jr = basis.j_of(r), jc = basis.j_of(c), m = basis.m_of(r);
      if (m != basis.m_of(c)) continue;
      const Cos2Block block(m, j_limit);
      double closed = 0.0;
      if (jr == jc) closed = block.diagonal(jr);
      else if (jr == jc + 2) closed = block.coupling(jc);
      else if (jc == jr + 2) closed = block.coupling(jr);
      worst = std::max(worst, std::abs(iz - closed));
    }
  return worst;
}

PropagatorComparison compare_sudden_tdse(const MoleculeSpec& molecule, double temperature, double intensity,
                                         double tau_fwhm, const SimulationOptions& options, std::size_t time_points) {
  const auto ensemble = boltzmann_ensemble(molecule, temperature, options.cutoff);
  const auto pulse = PulseSpec::linear(intensity, tau_fwhm);
  SimulationOptions tdse = options, sudden = options;
  tdse.propagator = Propagator::tdse;
  sudden.propagator = Propagator::sudden;
  const auto pt = propagate_linear_ensemble(molecule, ensemble, pulse, tdse);
  const auto ps = propagate_linear_ensemble(molecule, ensemble, pulse, sudden);
  const auto times = TimeGrid::one_revival(molecule, pulse.t0, time_points).times();
  const auto at = reconstruct(fourier_decompose(pt, Axis::y), times);
  const auto as = reconstruct(fourier_decompose(ps, Axis::y), times);

  PropagatorComparison out;
  out.xi = pt.xi;
  out.peak_amplitude = at.peak_amplitude();
  out.max_norm_error = std::max(pt.max_norm_error, ps.max_norm_error);
  double sum = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) sum += std::pow(at.values[i] - as.values[i], 2);
  out.rms_relative = std::sqrt(sum / static_cast<double>(times.size())) / out.peak_amplitude;
  return out;
}

EllipticComparison compare_elliptic(const MoleculeSpec& molecule, double temperature, double intensity, double a2,
                                    const SimulationOptions& options, std::size_t time_points) {
  const auto ensemble = boltzmann_ensemble(molecule, temperature, options.cutoff);
  PulseSpec pulse = PulseSpec::linear(intensity, 0.1);
  const auto times = TimeGrid::one_revival(molecule, pulse.t0, time_points).times();

  const auto linear = propagate_linear_ensemble(molecule, ensemble, pulse, options);
  const auto l_trace = reconstruct(fourier_decompose(linear, Axis::y), times);
  const double b2 = 1.0 - a2;
  const auto approx = elliptic_approx(l_trace, a2, b2);

  pulse.pol_a = std::sqrt(a2);
  pulse.pol_b = std::sqrt(b2);
  const auto full = propagate_elliptic_ensemble(molecule, ensemble, pulse, options);

  EllipticComparison out;
  out.a2 = a2;
  out.b2 = b2;
  out.xi = full.xi;
  out.max_norm_error = std::max(linear.max_norm_error, full.max_norm_error);
  out.reference_peak = l_trace.peak_amplitude();
  out.oracle_x = reconstruct(fourier_decompose(full, Axis::x), times);
  out.oracle_y = reconstruct(fourier_decompose(full, Axis::y), times);
  out.oracle_z = reconstruct(fourier_decompose(full, Axis::z), times);
  out.error_x = max_trace_difference(approx.x, out.oracle_x) / out.reference_peak;
  out.error_y = max_trace_difference(approx.y, out.oracle_y) / out.reference_peak;
  out.error_z = max_trace_difference(approx.z, out.oracle_z) / out.reference_peak;
  for (std::size_t i = 0; i < times.size(); ++i)
    out.sum_rule =
        std::max(out.sum_rule, std::abs(out.oracle_x.values[i] + out.oracle_y.values[i] + out.oracle_z.values[i]));
  return out;
}

std::vector<CheckResult> run_validation(const ValidationOptions& o) {
  std::vector<CheckResult> out;
  const auto& mol = o.molecule;

  {
    const double d = operator_quadrature_deviation(10);
    out.push_back({"operator matrix elements vs quadrature (J <= 10)", d < 1e-10, d, "< 1e-10", ""});
  }

  // TDSE ensemble shared by the norm, periodicity and Fourier checks.
  std::optional<PropagatedEnsemble> tdse;
  out.push_back(guarded("norm conservation and basis edge (TDSE)", "|1 - norm| < 1e-9", [&] {
    SimulationOptions s = o.simulation;
    s.propagator = Propagator::tdse;
    const auto ensemble = boltzmann_ensemble(mol, o.temperature, s.cutoff);
    tdse = propagate_linear_ensemble(mol, ensemble, PulseSpec::linear(o.intensity, 0.1), s);
    return CheckResult{"norm conservation and basis edge (TDSE)", tdse->max_norm_error < kNormTolerance,
                       tdse->max_norm_error, "|1 - norm| < 1e-9",
                       fmt("j_max %.0f, edge population %.3g", tdse->j_max, tdse->max_edge_population)};
  }));

  if (tdse) {
    const auto grid = TimeGrid::one_revival(mol, 0.0, o.time_points);
    const auto times = grid.times();
    const auto direct = alignment_trace(*tdse, Axis::y, times, o.simulation.threads);
    const auto rebuilt = reconstruct(fourier_decompose(*tdse, Axis::y), times);
    const double e = max_abs_difference(direct, rebuilt);
    out.push_back({"Fourier reconstruction vs direct trace", e < 1e-10, e, "< 1e-10", ""});

    auto shifted = times;
    for (auto& t : shifted) t += revival_period(mol);
    const double p = max_abs_difference(direct, alignment_trace(*tdse, Axis::y, shifted, o.simulation.threads));
    out.push_back({"revival periodicity", p < 1e-9, p, "< 1e-9", ""});
  }

  out.push_back(guarded("sudden vs TDSE", "RMS <= 2% of peak", [&] {
    const auto c = compare_sudden_tdse(mol, o.temperature, o.intensity, 0.1, o.simulation, o.time_points);
    return CheckResult{"sudden vs TDSE", c.rms_relative <= 0.02, c.rms_relative, "RMS <= 2% of peak",
                       fmt("T = %.0f K, xi = %.3g", o.temperature, c.xi)};
  }));

  std::vector<EllipticComparison> elliptic;
  SimulationOptions elliptic_options = o.simulation;
  elliptic_options.propagator = o.elliptic_propagator;
  for (double a2 : {1.0, 2.0 / 3.0, 0.5}) {
    const std::string name = fmt("elliptic superposition vs oracle, A^2 = %.3f", a2);
    out.push_back(guarded(name, "<= 5% of peak", [&] {
      elliptic.push_back(compare_elliptic(mol, o.elliptic_temperature, o.elliptic_intensity, a2, elliptic_options,
                                          o.time_points));
      const auto& c = elliptic.back();
      const double e = std::max({c.error_x, c.error_y, c.error_z});
      return CheckResult{name, e <= 0.05, e, "<= 5% of peak",
                         std::string(to_string(o.elliptic_propagator)) + ", " +
                             fmt("T = %.0f K, xi = %.3g, sum rule %.2g", o.elliptic_temperature, c.xi, c.sum_rule)};
    }));
  }
  if (elliptic.size() == 3) {
    const double ratio = elliptic[1].oracle_y.peak_amplitude() / elliptic[0].oracle_y.peak_amplitude();
    out.push_back({"y trace at A^2 = 2/3 vs A^2 = 1", ratio <= 0.05, ratio, "<= 5%", ""});
    const double ref = elliptic[0].oracle_z.peak_amplitude();
    double spread = 0.0;
    for (std::size_t i = 1; i < 3; ++i)
      spread = std::max(spread, max_abs_difference(elliptic[i].oracle_z, elliptic[0].oracle_z) / ref);
    out.push_back({"z trace independent of ellipticity", spread <= 0.05, spread, "<= 5%", ""});
  }

  {
    RegimeScanOptions r;
    r.windows = {{2.0, 20.0}, {40.0, 80.0}, {2.0, 30.0}};
    r.time_points = o.time_points;
    r.simulation = o.simulation;
    r.simulation.propagator = o.regime_propagator;
    std::optional<RegimeScanResult> scan;
    out.push_back(guarded("regime scan", "", [&] {
      scan = regime_scan(mol, o.regime_temperature, o.regime_intensities, PulseSpec::linear(0.0, 0.1), r);
      return CheckResult{"regime scan", true, static_cast<double>(scan->intensities.size()), "completes",
                         fmt("T = %.0f K", o.regime_temperature)};
    }));
    if (scan) {
      const auto& f = scan->fits;
      out.push_back({"C slope on [2, 20] TW/cm^2", std::abs(f[0].slope_c - 2.0) <= 0.1, f[0].slope_c, "2.0 +- 0.1",
                     ""});
      // affine diagnostic: C = a + b I on the same window
      std::vector<double> x, y;
      for (std::size_t i = 0; i < scan->intensities.size(); ++i)
        if (scan->intensities[i] >= 40.0 && scan->intensities[i] <= 80.0) {
          x.push_back(scan->intensities[i]);
          y.push_back(scan->c_values[i]);
        }
      std::string detail;
      if (x.size() >= 3) {
        const double n = static_cast<double>(x.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
          sx += x[i];
          sy += y[i];
          sxx += x[i] * x[i];
          sxy += x[i] * y[i];
          syy += y[i] * y[i];
        }
        const double cov = sxy - sx * sy / n, vx = sxx - sx * sx / n, vy = syy - sy * sy / n;
        detail = fmt("affine fit C = a + b I: b = %.3g per TW/cm^2, R^2 = %.6f", cov / vx, cov * cov / (vx * vy));
      }
      out.push_back({"C slope on [40, 80] TW/cm^2", std::abs(f[1].slope_c - 1.0) <= 0.15, f[1].slope_c,
                     "1.0 +- 0.15", detail});
      out.push_back({"max - C slope below 30 TW/cm^2", std::abs(f[2].slope_max_minus_c - 1.0) <= 0.1,
                     f[2].slope_max_minus_c, "1.0 +- 0.1", ""});
    }
  }
  return out;
}

}  // namespace rotorgrating
