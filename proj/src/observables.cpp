#include "rotorgrating/observables.hpp"

#include "rotorgrating/error.hpp"
#include "rotorgrating/parallel.hpp"
#include "rotorgrating/units.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>

namespace rotorgrating {
namespace {

using Complex = std::complex<double>;

double wrap_phase(double phi) {
  phi = std::remainder(phi, 2.0 * units::pi);
  if (phi <= -units::pi) phi += 2.0 * units::pi;
  return phi;
}

TraceMetadata metadata_of(const PropagatedEnsemble& ensemble) {
  return {ensemble.molecule.name, ensemble.temperature, ensemble.pulse.peak_intensity,
          ensemble.pulse.tau_fwhm, ensemble.xi, ensemble.j_max};
}

// In the fixed-M representation only the polarization axis is computed
// directly; the other two follow from cylindrical symmetry and the sum rule.
double axis_factor(const PropagatedEnsemble& ensemble, Axis axis) {
  if (ensemble.representation == Representation::full || axis == ensemble.quantization_axis) return 1.0;
  return -0.5;
}

std::vector<Cos2Block> blocks_for(const PropagatedEnsemble& ensemble) {
  int m_max = 0;
  for (const auto& c : ensemble.channels) m_max = std::max(m_max, std::abs(c.state.m));
  std::vector<Cos2Block> blocks;
  blocks.reserve(static_cast<std::size_t>(m_max + 1));
  for (int m = 0; m <= m_max; ++m) blocks.emplace_back(m, ensemble.j_max);
  return blocks;
}

void require_common_reference(const PropagatedEnsemble& ensemble) {
  for (const auto& c : ensemble.channels) {
    if (c.state.reference_time != ensemble.reference_time || c.state.j_max != ensemble.j_max ||
        c.state.representation != ensemble.representation)
      throw ConfigError("propagated channels do not share one basis and reference time");
  }
}

}  // namespace

std::vector<double> TimeGrid::times() const {
  if (points == 0) throw ConfigError("time grid needs at least one point");
  if (!(end > begin)) throw ConfigError("time grid requires end > begin");
  std::vector<double> t(points);
  const double dt = (end - begin) / static_cast<double>(points);
  for (std::size_t i = 0; i < points; ++i) t[i] = begin + dt * static_cast<double>(i);
  return t;
}

TimeGrid TimeGrid::one_revival(const MoleculeSpec& molecule, double t_pulse, std::size_t points, double offset) {
  const double start = t_pulse + offset;
  return {start, start + revival_period(molecule), points};
}

double AlignmentTrace::peak_amplitude() const {
  double peak = 0.0;
  for (double v : values) peak = std::max(peak, std::abs(v));
  return peak;
}

double AlignmentTrace::max_value() const {
  if (values.empty()) throw ConfigError("empty trace");
  return *std::max_element(values.begin(), values.end());
}

AlignmentTrace alignment_trace(const PropagatedEnsemble& ensemble, Axis axis, const std::vector<double>& times,
                               unsigned threads) {
  require_common_reference(ensemble);
  AlignmentTrace trace;
  trace.times = times;
  trace.values.assign(times.size(), 0.0);
  trace.axis = axis;
  trace.metadata = metadata_of(ensemble);

  const int j_max = ensemble.j_max;
  std::vector<double> level_omega(static_cast<std::size_t>(j_max + 1));
  for (int j = 0; j <= j_max; ++j) level_omega[static_cast<std::size_t>(j)] = level_frequency(j, ensemble.molecule);
  const double factor = axis_factor(ensemble, axis);

  if (ensemble.representation == Representation::fixed_m) {
    const auto blocks = blocks_for(ensemble);
    parallel_for(times.size(), threads, [&](std::size_t it) {
      const double dt = times[it] - ensemble.reference_time;
      std::vector<Complex> v;
      double sum = 0.0;
      for (const auto& ch : ensemble.channels) {
        const auto& block = blocks[static_cast<std::size_t>(std::abs(ch.state.m))];
        const auto n = static_cast<std::size_t>(ch.state.amplitudes.size());
        const int j_min = block.j_min();
        v.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
          const Complex a = ch.state.amplitudes(static_cast<Eigen::Index>(k));
          v[k] = a == Complex{} ? a : a * std::polar(1.0, -level_omega[static_cast<std::size_t>(j_min) + k] * dt);
        }
        double expectation = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const int j = j_min + static_cast<int>(k);
          expectation += block.diagonal(j) * std::norm(v[k]);
          if (k + 2 < n) expectation += 2.0 * block.coupling(j) * std::real(std::conj(v[k]) * v[k + 2]);
        }
        sum += ch.weight * expectation;
      }
      trace.values[it] = factor * (sum - 1.0 / 3.0);
    });
    return trace;
  }

  const SparseOperator op = cos2theta_matrix_full(BasisSpec{j_max}, axis);
  const FullBasis basis(j_max);
  std::vector<int> j_index(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) j_index[i] = basis.j_of(i);
  parallel_for(times.size(), threads, [&](std::size_t it) {
    const double dt = times[it] - ensemble.reference_time;
    std::vector<Complex> phase(level_omega.size());
    for (std::size_t j = 0; j < level_omega.size(); ++j) phase[j] = std::polar(1.0, -level_omega[j] * dt);
    double sum = 0.0;
    for (const auto& ch : ensemble.channels) {
      const auto& a = ch.state.amplitudes;
      double expectation = 0.0;
      for (Eigen::Index r = 0; r < op.outerSize(); ++r) {
        const Complex ar = a(r);
        if (ar == Complex{}) continue;
        Complex row{};
        for (SparseOperator::InnerIterator e(op, r); e; ++e) {
          const Complex ac = a(e.col());
          if (ac == Complex{}) continue;
          row += e.value() * ac * phase[static_cast<std::size_t>(j_index[static_cast<std::size_t>(e.col())])];
        }
        expectation += std::real(std::conj(ar * phase[static_cast<std::size_t>(j_index[static_cast<std::size_t>(r)])]) * row);
      }
      sum += ch.weight * expectation;
    }
    trace.values[it] = sum - 1.0 / 3.0;
  });
  return trace;
}

FourierDecomposition fourier_decompose(const PropagatedEnsemble& ensemble, Axis axis) {
  require_common_reference(ensemble);
  double c_raw = 0.0;
  std::map<int, Complex> coherence;  // keyed by the lower J of the pair

  if (ensemble.representation == Representation::fixed_m) {
    const auto blocks = blocks_for(ensemble);
    for (const auto& ch : ensemble.channels) {
      const auto& block = blocks[static_cast<std::size_t>(std::abs(ch.state.m))];
      const auto& a = ch.state.amplitudes;
      const auto n = a.size();
      for (Eigen::Index k = 0; k < n; ++k) {
        const int j = block.j_min() + static_cast<int>(k);
        c_raw += ch.weight * block.diagonal(j) * std::norm(a(k));
        if (k + 2 < n) {
          const Complex z = 2.0 * ch.weight * block.coupling(j) * std::conj(a(k)) * a(k + 2);
          if (z != Complex{}) coherence[j] += z;
        }
      }
    }
  } else {
    const SparseOperator op = cos2theta_matrix_full(BasisSpec{ensemble.j_max}, axis);
    const FullBasis basis(ensemble.j_max);
    for (const auto& ch : ensemble.channels) {
      const auto& a = ch.state.amplitudes;
      for (Eigen::Index r = 0; r < op.outerSize(); ++r) {
        if (a(r) == Complex{}) continue;
        const int jr = basis.j_of(static_cast<std::size_t>(r));
        for (SparseOperator::InnerIterator e(op, r); e; ++e) {
          if (e.col() < r) continue;
          const Complex term = std::conj(a(r)) * e.value() * a(e.col());
          const int jc = basis.j_of(static_cast<std::size_t>(e.col()));
          if (e.col() == r) {
            c_raw += ch.weight * std::real(term);
          } else if (jc == jr) {
            c_raw += 2.0 * ch.weight * std::real(term);
          } else if (term != Complex{}) {
            coherence[jr] += 2.0 * ch.weight * term;
          }
        }
      }
    }
  }

  const double factor = axis_factor(ensemble, axis);
  FourierDecomposition out;
  out.axis = axis;
  out.reference_time = ensemble.pulse.t0;
  out.c = factor * (c_raw - 1.0 / 3.0);
  const double shift = ensemble.reference_time - ensemble.pulse.t0;
  for (const auto& [j, z] : coherence) {
    if (z == Complex{}) continue;
    FourierComponent comp;
    comp.j = j;
    comp.omega = raman_frequency(j, ensemble.molecule);
    comp.amplitude = std::abs(factor) * std::abs(z);
    double phi = -std::arg(z) - comp.omega * shift;
    if (factor < 0.0) phi += units::pi;
    comp.phase = wrap_phase(phi);
    out.components.push_back(comp);
  }
  return out;
}

AlignmentTrace reconstruct(const FourierDecomposition& decomposition, const std::vector<double>& times) {
  AlignmentTrace trace;
  trace.times = times;
  trace.axis = decomposition.axis;
  trace.values.resize(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double tau = times[i] - decomposition.reference_time;
    double v = decomposition.c;
    for (const auto& comp : decomposition.components) v += comp.amplitude * std::cos(comp.omega * tau + comp.phase);
    trace.values[i] = v;
  }
  return trace;
}

double max_abs_difference(const AlignmentTrace& a, const AlignmentTrace& b) {
  if (a.values.size() != b.values.size()) throw ConfigError("traces have different lengths");
  double d = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) d = std::max(d, std::abs(a.values[i] - b.values[i]));
  return d;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("slope fit needs at least two points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw NumericalError("log-log fit requires positive values");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

RegimeScanResult regime_scan(const MoleculeSpec& molecule, double temperature,
                             const std::vector<double>& intensities, const PulseSpec& pulse_template,
                             const RegimeScanOptions& options) {
  if (intensities.empty()) throw ConfigError("regime scan needs at least one intensity");
  if (!std::is_sorted(intensities.begin(), intensities.end()))
    throw ConfigError("regime scan intensities must be sorted ascending");
  const auto ensemble = boltzmann_ensemble(molecule, temperature, options.simulation.cutoff);
  const auto times =
      TimeGrid::one_revival(molecule, pulse_template.t0, options.time_points, options.window_offset).times();

  RegimeScanResult result;
  for (double intensity : intensities) {
    PulseSpec pulse = pulse_template;
    pulse.peak_intensity = intensity;
    const auto propagated = propagate_linear_ensemble(molecule, ensemble, pulse, options.simulation);
    const auto decomposition = fourier_decompose(propagated, propagated.quantization_axis);
    const auto trace = reconstruct(decomposition, times);
    const double peak = trace.max_value();
    result.intensities.push_back(intensity);
    result.c_values.push_back(decomposition.c);
    result.max_minus_c_values.push_back(peak - decomposition.c);
    result.max_cos2_values.push_back(peak + 1.0 / 3.0);
    result.xi_values.push_back(propagated.xi);
    result.j_max_values.push_back(propagated.j_max);
  }

  for (const auto& [lo, hi] : options.windows) {
    std::vector<double> x, c, mc;
    for (std::size_t i = 0; i < result.intensities.size(); ++i) {
      if (result.intensities[i] < lo || result.intensities[i] > hi) continue;
      x.push_back(result.intensities[i]);
      c.push_back(result.c_values[i]);
      mc.push_back(result.max_minus_c_values[i]);
    }
    RegimeWindowFit fit{lo, hi, x.size(), 0.0, 0.0};
    if (x.size() >= 2) {
      fit.slope_c = loglog_slope(x, c);
      fit.slope_max_minus_c = loglog_slope(x, mc);
    }
    result.fits.push_back(fit);
  }
  return result;
}

EllipticApproximation elliptic_approx(const AlignmentTrace& linear, double a2, double b2) {
  if (a2 < 0.0 || b2 < 0.0 || std::abs(a2 + b2 - 1.0) > 1e-12)
    throw ConfigError("elliptic weights must satisfy A^2 + B^2 = 1");
  auto scaled = [&](double s, Axis axis) {
    AlignmentTrace t = linear;
    t.axis = axis;
    for (auto& v : t.values) v *= s;
    return t;
  };
  EllipticApproximation out;
  out.x = scaled(a2 - 0.5 * b2, Axis::x);
  out.y = scaled(b2 - 0.5 * a2, Axis::y);
  out.z = scaled(-0.5, Axis::z);
  out.difference = scaled(1.5 * (a2 - b2), Axis::x);
  return out;
}

}  // namespace rotorgrating
