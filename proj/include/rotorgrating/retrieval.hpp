#pragma once

// Experimental DFWM traces and least-squares retrieval of (I_theory, T,
// scale, delay offset, plasma background) against simulated signals.

#include "rotorgrating/grating.hpp"

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace rotorgrating {

struct ExperimentalMetadata {
  std::optional<double> pressure;                  // as recorded, unit free
  std::optional<double> nominal_single_pump_intensity;  // TW/cm^2
  std::optional<Scheme> scheme;
  std::optional<double> temperature_guess;         // K
  std::map<std::string, std::string> extra;
};

struct ExperimentalTrace {
  std::vector<double> delays;  // ps, strictly increasing
  std::vector<double> signal;
  ExperimentalMetadata metadata;

  void validate() const;
};

enum class TraceFormat { csv, whitespace };

TraceFormat parse_trace_format(std::string_view text);

/// Header row names the columns: delay_ps | delay_fs | ps | fs, then
/// signal_au | au. Lines starting with '#' carry `key: value` metadata.
ExperimentalTrace load_trace(const std::string& path, TraceFormat format = TraceFormat::csv);
ExperimentalTrace parse_trace(const std::string& text, TraceFormat format = TraceFormat::csv);

struct FitParameter {
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool free = false;
};

struct FitParameters {
  double intensity = 20.0;  // theoretical, TW/cm^2
  double temperature = 293.0;
  double scale = 1.0;
  double t_offset = 0.0;
  std::complex<double> background{};
};

struct FitOptions {
  std::size_t grid_intensities = 6;
  std::size_t grid_temperatures = 4;
  std::size_t max_evaluations = 1500;
  double simplex_tolerance = 1e-4;  // diameter in scaled parameter space
  double exclusion_halfwidth = -1.0;  // ps; negative selects 2 tau
  unsigned threads = 0;
};

struct FitProblem {
  MoleculeSpec molecule;
  Scheme scheme = Scheme::parallel;
  IntensityMapping mapping = IntensityMapping::point;
  double pump_tau_fwhm = 0.1;
  double pump_t0 = 0.0;
  FitParameter intensity{20.0, 1.0, 60.0, true};
  FitParameter temperature{293.0, 200.0, 350.0, true};
  FitParameter scale{1.0, 0.0, 1e12, true};
  FitParameter t_offset{0.0, -0.5, 0.5, false};
  FitParameter background_re{0.0, -1.0, 1.0, false};
  FitParameter background_im{0.0, -1.0, 1.0, false};
  SimulationOptions simulation{Propagator::sudden, 1e-8};
  FitOptions options;

  void validate() const;
  FitParameters initial() const;
};

/// Caches linear-alignment decompositions per quantized (I, T) on a fixed
/// basis. Safe for concurrent use.
class SignalModel {
 public:
  explicit SignalModel(const FitProblem& problem);

  int j_max() const { return j_max_; }
  std::shared_ptr<const FourierDecomposition> decomposition(double intensity, double temperature) const;
  std::size_t cache_size() const;

  /// Unscaled field s(t - t_offset) at the given delays.
  std::vector<double> field(const FitParameters& params, const std::vector<double>& delays) const;
  /// scale |s + b|^2 with b on after the pump.
  std::vector<double> signal(const FitParameters& params, const std::vector<double>& delays) const;

 private:
  FitProblem problem_;
  int j_max_ = 0;
  mutable std::shared_mutex mutex_;
  mutable std::map<std::pair<std::int64_t, std::int64_t>, std::shared_ptr<const FourierDecomposition>> cache_;
  mutable std::vector<std::unique_ptr<LinearKick>> kicks_;
  mutable std::mutex kick_mutex_;

  const LinearKick& kick(int m) const;
  FourierDecomposition compute(double intensity, double temperature) const;
};

SignalTrace model_signal(const FitParameters& params, const FitProblem& problem, const std::vector<double>& delays);

struct FitResult {
  FitParameters parameters;
  double residual = 0.0;  // mean squared residual / peak^2 over the fit window
  std::size_t evaluations = 0;
  bool converged = false;
  bool flat_objective = false;
  std::map<std::string, double> sensitivity;  // d^2 residual / d p^2 in physical units
  std::vector<double> residual_history;       // best value after each accepted simplex step
  double single_pump_intensity = 0.0;         // I_theory mapped back through the convention
  std::vector<double> model;                  // at the trace delays
  std::size_t window_points = 0;
};

FitResult fit_trace(const FitProblem& problem, const ExperimentalTrace& trace);

/// Least-squares scale of g onto d, sum d g / sum g^2 (0 when g vanishes).
double best_scale(const std::vector<double>& data, const std::vector<double>& shape);

/// Multiplicative Gaussian noise, d (1 + level n).
std::vector<double> add_multiplicative_noise(const std::vector<double>& signal, double level, std::uint64_t seed);

}  // namespace rotorgrating
