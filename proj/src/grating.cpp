#include "rotorgrating/grating.hpp"

#include "rotorgrating/error.hpp"
#include "rotorgrating/units.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rotorgrating {
namespace {

constexpr double kDegree = units::pi / 180.0;

bool uniform_grid(const std::vector<double>& t) {
  if (t.size() < 3) return true;
  const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  for (std::size_t i = 1; i < t.size(); ++i)
    if (std::abs((t[i] - t[i - 1]) - dt) > 1e-6 * std::abs(dt)) return false;
  return true;
}

// Linear alignment decomposition at the theoretical intensity, or an empty
// decomposition when the pump is off.
struct LinearResult {
  FourierDecomposition decomposition;
  double xi = 0.0;
  int j_max = 0;
};

LinearResult simulate_linear(const MoleculeSpec& molecule, double temperature, const PulseSpec& pulse,
                             const SimulationOptions& options) {
  LinearResult out;
  out.decomposition.axis = pulse.linear_axis();
  out.decomposition.reference_time = pulse.t0;
  if (pulse.peak_intensity == 0.0) return out;
  const auto ensemble = boltzmann_ensemble(molecule, temperature, options.cutoff);
  const auto propagated = propagate_linear_ensemble(molecule, ensemble, pulse, options);
  out.decomposition = fourier_decompose(propagated, propagated.quantization_axis);
  out.xi = propagated.xi;
  out.j_max = propagated.j_max;
  return out;
}

AlignmentTrace gated_trace(const FourierDecomposition& decomposition, const std::vector<double>& times) {
  AlignmentTrace trace = reconstruct(decomposition, times);
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] < decomposition.reference_time) trace.values[i] = 0.0;
  return trace;
}

GratingSimulation simulate_scheme(const MoleculeSpec& molecule, double temperature, const GratingConfig& config,
                                  const std::vector<double>& times, const SimulationOptions& options) {
  config.validate();
  const PulseSpec pulse = config.linear_pump();
  const auto linear = simulate_linear(molecule, temperature, pulse, options);

  GratingSimulation out;
  out.decomposition = linear.decomposition;
  out.alignment = gated_trace(linear.decomposition, times);
  out.alignment.metadata = {molecule.name, temperature, pulse.peak_intensity, pulse.tau_fwhm, linear.xi, linear.j_max};
  out.signal = signal_from_decomposition(linear.decomposition, config, times);
  out.signal.metadata.temperature = temperature;
  out.signal.metadata.xi = linear.xi;
  out.signal.metadata.j_max = linear.j_max;
  return out;
}

}  // namespace

std::string_view to_string(IntensityMapping mapping) {
  return mapping == IntensityMapping::point ? "point" : "transverse_half";
}

IntensityMapping parse_intensity_mapping(std::string_view text) {
  if (text == "point") return IntensityMapping::point;
  if (text == "transverse_half") return IntensityMapping::transverse_half;
  throw ConfigError("unknown intensity mapping '" + std::string(text) + "' (expected point or transverse_half)");
}

double theoretical_intensity_factor(Scheme scheme, IntensityMapping mapping) {
  const double point = scheme == Scheme::parallel ? 2.0 : 1.0;
  return mapping == IntensityMapping::point ? point : 0.5 * point;
}

void GratingConfig::validate() const {
  if (!(wavelength > 0.0) || !std::isfinite(wavelength)) throw ConfigError("wavelength must be positive");
  if (!(crossing_angle_deg > 0.0 && crossing_angle_deg < 20.0))
    throw ConfigError("crossing angle must lie in (0, 20) degrees, got " + std::to_string(crossing_angle_deg));
  if (!(single_pump_peak_intensity >= 0.0) || !std::isfinite(single_pump_peak_intensity))
    throw ConfigError("single-pump peak intensity must be >= 0");
  if (!(pump_tau_fwhm > 0.0)) throw ConfigError("pump duration must be positive");
  if (probe_tau_fwhm && !(*probe_tau_fwhm > 0.0)) throw ConfigError("probe duration must be positive");
  if (plasma_background && scheme != Scheme::parallel)
    throw ConfigError("a plasma background applies to the parallel scheme only");
}

double GratingConfig::theoretical_intensity() const {
  return theoretical_intensity_factor(scheme, mapping) * single_pump_peak_intensity;
}

PulseSpec GratingConfig::linear_pump() const {
  return PulseSpec::linear(theoretical_intensity(), pump_tau_fwhm, Axis::y, pump_t0, wavelength);
}

std::vector<double> grating_field(const FourierDecomposition& linear, Scheme scheme,
                                  const std::vector<double>& times) {
  const double factor = scheme == Scheme::parallel ? 1.0 : 1.5;
  auto trace = gated_trace(linear, times);
  for (auto& v : trace.values) v *= factor;
  return trace.values;
}

std::vector<double> heterodyne_with_background(const std::vector<double>& field, std::complex<double> background) {
  std::vector<double> out(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) out[i] = std::norm(field[i] + background);
  return out;
}

SignalTrace probe_convolve(const SignalTrace& signal, double probe_tau_fwhm) {
  if (!(probe_tau_fwhm > 0.0)) throw ConfigError("probe duration must be positive");
  if (!uniform_grid(signal.times)) throw ConfigError("probe convolution requires a uniform time grid");
  SignalTrace out = signal;
  const std::size_t n = signal.values.size();
  if (n < 2) return out;
  const double dt = signal.times[1] - signal.times[0];
  const double sigma = probe_tau_fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  if (sigma < 1e-3 * dt) return out;

  const auto half = static_cast<std::ptrdiff_t>(std::ceil(6.0 * sigma / dt));
  std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
  for (std::ptrdiff_t k = -half; k <= half; ++k) {
    const double x = static_cast<double>(k) * dt / sigma;
    kernel[static_cast<std::size_t>(k + half)] = std::exp(-0.5 * x * x);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0, norm = 0.0;
    for (std::ptrdiff_t k = -half; k <= half; ++k) {
      const auto j = static_cast<std::ptrdiff_t>(i) + k;
      if (j < 0 || j >= static_cast<std::ptrdiff_t>(n)) continue;
      const double w = kernel[static_cast<std::size_t>(k + half)];
      acc += w * signal.values[static_cast<std::size_t>(j)];
      norm += w;
    }
    out.values[i] = acc / norm;
  }
  return out;
}

SignalTrace signal_from_decomposition(const FourierDecomposition& linear, const GratingConfig& config,
                                      const std::vector<double>& times) {
  config.validate();
  SignalTrace out;
  out.times = times;
  out.metadata.scheme = config.scheme;
  out.metadata.mapping = config.mapping;
  out.metadata.single_pump_intensity = config.single_pump_peak_intensity;
  out.metadata.theoretical_intensity = config.theoretical_intensity();

  const auto field = grating_field(linear, config.scheme, times);
  if (config.plasma_background) {
    out.values = heterodyne_with_background(field, *config.plasma_background);
    for (std::size_t i = 0; i < times.size(); ++i)
      if (times[i] < config.pump_t0) out.values[i] = 0.0;
  } else {
    out.values.resize(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) out.values[i] = field[i] * field[i];
  }
  if (config.probe_tau_fwhm) out = probe_convolve(out, *config.probe_tau_fwhm);

  if (4.0 * config.single_pump_peak_intensity > units::co2_ionization_saturation)
    out.warnings.push_back("peak pump intensity 4 I0 = " + std::to_string(4.0 * config.single_pump_peak_intensity) +
                           " TW/cm^2 exceeds the ionization saturation intensity (200 TW/cm^2)");
  return out;
}

GratingSimulation intensity_grating_signal(const MoleculeSpec& molecule, double temperature,
                                           const GratingConfig& config, const std::vector<double>& times,
                                           const SimulationOptions& options) {
  if (config.scheme != Scheme::parallel) throw ConfigError("intensity grating requires the parallel scheme");
  return simulate_scheme(molecule, temperature, config, times, options);
}

GratingSimulation polarization_grating_signal(const MoleculeSpec& molecule, double temperature,
                                              const GratingConfig& config, const std::vector<double>& times,
                                              const SimulationOptions& options) {
  if (config.scheme != Scheme::perpendicular)
    throw ConfigError("polarization grating requires the perpendicular scheme");
  return simulate_scheme(molecule, temperature, config, times, options);
}

GratingSimulation grating_signal(const MoleculeSpec& molecule, double temperature, const GratingConfig& config,
                                 const std::vector<double>& times, const SimulationOptions& options) {
  return config.scheme == Scheme::parallel ? intensity_grating_signal(molecule, temperature, config, times, options)
                                           : polarization_grating_signal(molecule, temperature, config, times, options);
}

GratingGeometry grating_geometry(const GratingConfig& config) {
  config.validate();
  const double half = 0.5 * config.crossing_angle_deg * kDegree;
  const double s = std::sin(half);
  const double lambda_um = config.wavelength * 1e-3;

  // The probe travels along one pump, at -Theta/2; a grating of period P
  // sends order 1 to sin(theta) = -sin(Theta/2) + lambda / P.
  auto deflection = [&](double period_um) {
    const double arg = -s + lambda_um / period_um;
    if (arg > 1.0) throw ConfigError("order-1 diffraction is evanescent for this geometry");
    return (std::asin(arg) + half) / kDegree;
  };

  GratingGeometry g;
  g.fringe_period_um = lambda_um / (2.0 * s);
  g.alignment_order1_angle_deg = deflection(g.fringe_period_um);
  g.plasma_period_um = config.scheme == Scheme::parallel ? g.fringe_period_um : 0.5 * g.fringe_period_um;
  g.plasma_order1_angle_deg = deflection(g.plasma_period_um);
  return g;
}

double polarization_grating_factor(double kx_x) {
  const auto p = polarization_at(kx_x, Scheme::perpendicular);
  return p.a * p.a - p.b * p.b;
}

ModulationReport spatial_modulation_check(const MoleculeSpec& molecule, double temperature,
                                          double single_pump_intensity, const std::vector<double>& times,
                                          std::size_t positions, const SimulationOptions& options,
                                          double threshold, double pump_tau_fwhm) {
  if (positions < 2) throw ConfigError("spatial modulation check needs at least two positions");
  if (!(single_pump_intensity >= 0.0)) throw ConfigError("single-pump intensity must be >= 0");

  auto trace_at = [&](double intensity) {
    const auto pulse = PulseSpec::linear(intensity, pump_tau_fwhm);
    return gated_trace(simulate_linear(molecule, temperature, pulse, options).decomposition, times);
  };

  ModulationReport report;
  report.single_pump_intensity = single_pump_intensity;
  report.threshold = threshold;
  const auto reference = trace_at(2.0 * single_pump_intensity);

  std::vector<AlignmentTrace> full(positions);
  for (std::size_t i = 0; i < positions; ++i) {
    ModulationSample sample;
    sample.kx_x = units::pi * static_cast<double>(i) / static_cast<double>(positions - 1);
    const auto p = polarization_at(sample.kx_x, Scheme::parallel);
    sample.local_intensity = p.fluence_factor * single_pump_intensity;
    // cos^2 at the dark fringe is ~1e-33, not zero
    if (sample.local_intensity < 1e-12 * single_pump_intensity) sample.local_intensity = 0.0;
    full[i] = trace_at(sample.local_intensity);
    report.samples.push_back(sample);
  }
  report.peak_amplitude = full.front().peak_amplitude();

  for (std::size_t i = 0; i < positions; ++i) {
    auto& sample = report.samples[i];
    const double modulation = 1.0 + std::cos(2.0 * sample.kx_x);
    double d = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k)
      d = std::max(d, std::abs(full[i].values[k] - modulation * reference.values[k]));
    sample.max_deviation = report.peak_amplitude > 0.0 ? d / report.peak_amplitude : 0.0;
    report.max_relative_deviation = std::max(report.max_relative_deviation, sample.max_deviation);
  }
  report.passed = report.max_relative_deviation <= threshold;
  return report;
}

}  // namespace rotorgrating
