#include "rotorgrating/retrieval.hpp"

#include "rotorgrating/error.hpp"
#include "rotorgrating/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace rotorgrating {
namespace {

constexpr double kQuantum = 1e-6;  // cache resolution in TW/cm^2 and K
constexpr std::size_t kMinimumSamples = 50;
constexpr int kMaxBasisEnlargements = 5;

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split(const std::string& line, TraceFormat format) {
  std::vector<std::string> out;
  if (format == TraceFormat::csv) {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
  } else {
    std::stringstream ss(line);
    std::string field;
    while (ss >> field) out.push_back(field);
  }
  return out;
}

std::optional<double> to_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

double delay_unit_factor(std::string tag, std::size_t line) {
  tag = lower(tag);
  if (tag.rfind("delay_", 0) == 0) tag = tag.substr(6);
  if (tag == "ps") return 1.0;
  if (tag == "fs") return 1e-3;
  throw ConfigError("line " + std::to_string(line) + ": unknown delay unit tag '" + tag + "' (expected ps or fs)");
}

void check_signal_tag(std::string tag, std::size_t line) {
  tag = lower(tag);
  if (tag == "signal_au" || tag == "au" || tag == "signal") return;
  throw ConfigError("line " + std::to_string(line) + ": unknown signal column tag '" + tag + "' (expected signal_au)");
}

void read_metadata(const std::string& body, ExperimentalMetadata& meta, std::size_t line) {
  const auto sep = body.find_first_of(":=");
  if (sep == std::string::npos) return;  // free-form comment
  const std::string key = lower(trim(body.substr(0, sep)));
  const std::string value = trim(body.substr(sep + 1));
  auto number = [&] {
    std::stringstream ss(value);
    double v = 0.0;
    if (!(ss >> v)) throw ConfigError("line " + std::to_string(line) + ": metadata '" + key + "' is not a number");
    return v;
  };
  if (key == "pressure") {
    meta.pressure = number();
  } else if (key == "nominal_intensity" || key == "single_pump_intensity" || key == "i0") {
    meta.nominal_single_pump_intensity = number();
  } else if (key == "scheme") {
    meta.scheme = parse_scheme(lower(value));
  } else if (key == "temperature" || key == "temperature_guess") {
    meta.temperature_guess = number();
  } else {
    meta.extra[key] = value;
  }
}

double clamp(double v, const FitParameter& p) { return std::clamp(v, p.lower, p.upper); }

std::int64_t quantize(double v) { return static_cast<std::int64_t>(std::llround(v / kQuantum)); }

// Free parameters other than the scale, mapped to [0, 1].
struct ParameterSpace {
  enum Slot { intensity, temperature, t_offset, background_re, background_im };
  std::vector<Slot> slots;
  std::vector<const FitParameter*> specs;

  explicit ParameterSpace(const FitProblem& p) {
    const std::pair<Slot, const FitParameter*> all[] = {{intensity, &p.intensity},
                                                        {temperature, &p.temperature},
                                                        {t_offset, &p.t_offset},
                                                        {background_re, &p.background_re},
                                                        {background_im, &p.background_im}};
    for (const auto& [slot, spec] : all)
      if (spec->free) {
        slots.push_back(slot);
        specs.push_back(spec);
      }
  }

  std::size_t size() const { return slots.size(); }

  FitParameters apply(FitParameters base, const std::vector<double>& u) const {
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const double v = specs[i]->lower + std::clamp(u[i], 0.0, 1.0) * (specs[i]->upper - specs[i]->lower);
      switch (slots[i]) {
        case intensity: base.intensity = v; break;
        case temperature: base.temperature = v; break;
        case t_offset: base.t_offset = v; break;
        case background_re: base.background = {v, base.background.imag()}; break;
        case background_im: base.background = {base.background.real(), v}; break;
      }
    }
    return base;
  }

  std::vector<double> scaled(const FitParameters& p) const {
    std::vector<double> u(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
      double v = 0.0;
      switch (slots[i]) {
        case intensity: v = p.intensity; break;
        case temperature: v = p.temperature; break;
        case t_offset: v = p.t_offset; break;
        case background_re: v = p.background.real(); break;
        case background_im: v = p.background.imag(); break;
      }
      u[i] = (v - specs[i]->lower) / (specs[i]->upper - specs[i]->lower);
    }
    return u;
  }

  static std::string name(Slot s) {
    switch (s) {
      case intensity: return "intensity";
      case temperature: return "temperature";
      case t_offset: return "t_offset";
      case background_re: return "background_re";
      case background_im: return "background_im";
    }
    return "";
  }
};

class Objective {
 public:
  Objective(const FitProblem& problem, const ExperimentalTrace& trace, const SignalModel& model)
      : problem_(problem), model_(model) {
    const double half = problem.options.exclusion_halfwidth >= 0.0 ? problem.options.exclusion_halfwidth
                                                                   : 2.0 * problem.pump_tau_fwhm;
    for (std::size_t i = 0; i < trace.delays.size(); ++i) {
      if (std::abs(trace.delays[i] - problem.pump_t0) < half) continue;
      delays_.push_back(trace.delays[i]);
      data_.push_back(trace.signal[i]);
    }
    if (delays_.size() < 2) throw ConfigError("fewer than two samples remain outside the pulse-overlap window");
    for (double d : data_) peak_ = std::max(peak_, std::abs(d));
    if (peak_ == 0.0) peak_ = 1.0;
  }

  std::size_t points() const { return delays_.size(); }

  // Evaluates at `params`; a free scale is replaced by its optimum.
  double operator()(FitParameters& params) const {
    ++evaluations_;
    auto shape = model_.signal(FitParameters{params.intensity, params.temperature, 1.0, params.t_offset,
                                             params.background},
                               delays_);
    if (problem_.scale.free) params.scale = clamp(best_scale(data_, shape), problem_.scale);
    return misfit(shape, params.scale);
  }

  double misfit(const std::vector<double>& shape, double scale) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) {
      const double r = (data_[i] - scale * shape[i]) / peak_;
      sum += r * r;
    }
    return sum / static_cast<double>(data_.size());
  }

  // d^2 f / d scale^2
  double scale_curvature(const FitParameters& params) const {
    auto shape = model_.signal(FitParameters{params.intensity, params.temperature, 1.0, params.t_offset,
                                             params.background},
                               delays_);
    double g2 = 0.0;
    for (double g : shape) g2 += g * g;
    return 2.0 * g2 / (peak_ * peak_ * static_cast<double>(data_.size()));
  }

  std::size_t evaluations() const { return evaluations_.load(); }

 private:
  const FitProblem& problem_;
  const SignalModel& model_;
  std::vector<double> delays_;
  std::vector<double> data_;
  double peak_ = 0.0;
  mutable std::atomic<std::size_t> evaluations_{0};
};

double simplex_diameter(const std::vector<std::vector<double>>& simplex) {
  double d = 0.0;
  for (std::size_t i = 0; i < simplex.size(); ++i)
    for (std::size_t j = i + 1; j < simplex.size(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < simplex[i].size(); ++k) s += std::pow(simplex[i][k] - simplex[j][k], 2);
      d = std::max(d, std::sqrt(s));
    }
  return d;
}

std::vector<double> clamp_unit(std::vector<double> u) {
  for (auto& v : u) v = std::clamp(v, 0.0, 1.0);
  return u;
}

}  // namespace

void ExperimentalTrace::validate() const {
  if (delays.size() != signal.size()) throw ConfigError("trace delay and signal columns differ in length");
  if (delays.size() < kMinimumSamples)
    throw ConfigError("trace has " + std::to_string(delays.size()) + " samples, at least " +
                      std::to_string(kMinimumSamples) + " are required");
  for (std::size_t i = 0; i < delays.size(); ++i) {
    if (!std::isfinite(delays[i]) || !std::isfinite(signal[i])) throw ConfigError("trace contains non-finite values");
    if (i > 0 && !(delays[i] > delays[i - 1]))
      throw ConfigError("trace delays are not strictly increasing at sample " + std::to_string(i));
  }
}

TraceFormat parse_trace_format(std::string_view text) {
  if (text == "csv") return TraceFormat::csv;
  if (text == "whitespace" || text == "tsv" || text == "dat") return TraceFormat::whitespace;
  throw ConfigError("unknown trace format '" + std::string(text) + "'");
}

ExperimentalTrace parse_trace(const std::string& text, TraceFormat format) {
  ExperimentalTrace trace;
  std::stringstream in(text);
  std::string line;
  std::size_t number = 0;
  bool have_header = false;
  double unit = 1.0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      read_metadata(t.substr(1), trace.metadata, number);
      continue;
    }
    const auto fields = split(t, format);
    if (fields.size() != 2)
      throw ConfigError("line " + std::to_string(number) + ": expected 2 columns, found " +
                        std::to_string(fields.size()));
    if (!have_header) {
      if (to_number(fields[0])) throw ConfigError("line " + std::to_string(number) + ": missing header row");
      unit = delay_unit_factor(fields[0], number);
      check_signal_tag(fields[1], number);
      have_header = true;
      continue;
    }
    const auto d = to_number(fields[0]);
    const auto s = to_number(fields[1]);
    if (!d || !s) throw ConfigError("line " + std::to_string(number) + ": malformed row '" + t + "'");
    trace.delays.push_back(*d * unit);
    trace.signal.push_back(*s);
  }
  if (!have_header) throw ConfigError("trace has no header row");
  trace.validate();
  return trace;
}

ExperimentalTrace load_trace(const std::string& path, TraceFormat format) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_trace(buffer.str(), format);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void FitProblem::validate() const {
  molecule.validate();
  if (!(pump_tau_fwhm > 0.0)) throw ConfigError("pump duration must be positive");
  const std::pair<const char*, const FitParameter*> all[] = {{"intensity", &intensity},
                                                             {"temperature", &temperature},
                                                             {"scale", &scale},
                                                             {"t_offset", &t_offset},
                                                             {"background_re", &background_re},
                                                             {"background_im", &background_im}};
  bool any_free = false;
  for (const auto& [name, p] : all) {
    const std::string n = name;
    if (!std::isfinite(p->lower) || !std::isfinite(p->upper) || !std::isfinite(p->value))
      throw ConfigError("parameter " + n + ": bounds must be finite");
    if (p->lower > p->upper) throw ConfigError("parameter " + n + ": lower bound exceeds upper bound");
    if (p->value < p->lower || p->value > p->upper) throw ConfigError("parameter " + n + ": value outside its bounds");
    if (p->free && !(p->upper > p->lower)) throw ConfigError("parameter " + n + ": free parameter needs lower < upper");
    any_free = any_free || p->free;
  }
  if (!any_free) throw ConfigError("fit problem has no free parameter");
  if (intensity.lower < 0.0) throw ConfigError("intensity bounds must be >= 0");
  if (temperature.lower < 0.0) throw ConfigError("temperature bounds must be >= 0");
  if (scale.lower < 0.0) throw ConfigError("scale must be >= 0");
  if (scheme == Scheme::perpendicular &&
      (background_re.free || background_im.free || background_re.value != 0.0 || background_im.value != 0.0))
    throw ConfigError("a plasma background applies to the parallel scheme only");
  if (options.grid_intensities == 0 || options.grid_temperatures == 0 || options.max_evaluations == 0)
    throw ConfigError("multistart grid and evaluation budget must be positive");
  if (!(options.simplex_tolerance > 0.0)) throw ConfigError("simplex tolerance must be positive");
}

FitParameters FitProblem::initial() const {
  return {intensity.value, temperature.value, scale.value, t_offset.value, {background_re.value, background_im.value}};
}

SignalModel::SignalModel(const FitProblem& problem) : problem_(problem) {
  problem_.validate();
  const auto hot = boltzmann_ensemble(problem_.molecule, problem_.temperature.upper, problem_.simulation.cutoff);
  const double xi_max =
      effective_area(PulseSpec::linear(problem_.intensity.upper, problem_.pump_tau_fwhm), problem_.molecule).xi;
  j_max_ = problem_.simulation.j_max > 0 ? problem_.simulation.j_max : suggested_j_max(hot, xi_max);

  // The strongest, hottest corner sets the basis for every evaluation.
  for (int tries = 0;; ++tries) {
    try {
      compute(problem_.intensity.upper, problem_.temperature.upper);
      break;
    } catch (const BasisTooSmallError&) {
      if (problem_.simulation.j_max > 0 || tries >= kMaxBasisEnlargements) throw;
      j_max_ += std::max(10, j_max_ / 2);
      std::lock_guard lock(kick_mutex_);
      kicks_.clear();
    }
  }
}

const LinearKick& SignalModel::kick(int m) const {
  std::lock_guard lock(kick_mutex_);
  if (kicks_.size() <= static_cast<std::size_t>(m)) kicks_.resize(static_cast<std::size_t>(m) + 1);
  auto& slot = kicks_[static_cast<std::size_t>(m)];
  if (!slot) slot = std::make_unique<LinearKick>(m, j_max_);
  return *slot;
}

FourierDecomposition SignalModel::compute(double intensity, double temperature) const {
  const PulseSpec pulse = PulseSpec::linear(intensity, problem_.pump_tau_fwhm, Axis::y, problem_.pump_t0);
  if (intensity == 0.0) {
    FourierDecomposition empty;
    empty.axis = Axis::y;
    empty.reference_time = pulse.t0;
    return empty;
  }
  const auto ensemble = boltzmann_ensemble(problem_.molecule, temperature, problem_.simulation.cutoff);
  if (ensemble.max_j() > j_max_)
    throw ConfigError("temperature " + std::to_string(temperature) + " K populates J above the fit basis");

  SimulationOptions options = problem_.simulation;
  options.j_max = j_max_;
  if (options.propagator == Propagator::tdse) {
    const auto propagated = propagate_linear_ensemble(problem_.molecule, ensemble, pulse, options);
    return fourier_decompose(propagated, Axis::y);
  }

  PropagatedEnsemble result;
  result.molecule = problem_.molecule;
  result.temperature = temperature;
  result.pulse = pulse;
  result.xi = effective_area(pulse, problem_.molecule).xi;
  result.j_max = j_max_;
  result.representation = Representation::fixed_m;
  result.quantization_axis = Axis::y;
  result.reference_time = pulse.t0;
  for (const auto& ch : fold_mirror_channels(ensemble)) {
    WeightedWavepacket w{ch.weight, Wavepacket::basis_state(ch.j0, ch.m0, j_max_, pulse.t0)};
    w.state.amplitudes = kick(ch.m0).apply(w.state.amplitudes, result.xi);
    const double edge = w.state.edge_population();
    if (edge > kEdgePopulationLimit)
      throw BasisTooSmallError("fit basis j_max = " + std::to_string(j_max_) + " too small at I = " +
                                   std::to_string(intensity) + " TW/cm^2, T = " + std::to_string(temperature) + " K",
                               j_max_, edge);
    result.channels.push_back(std::move(w));
  }
  return fourier_decompose(result, Axis::y);
}

std::shared_ptr<const FourierDecomposition> SignalModel::decomposition(double intensity, double temperature) const {
  const auto key = std::make_pair(quantize(intensity), quantize(temperature));
  {
    std::shared_lock lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  auto value = std::make_shared<const FourierDecomposition>(
      compute(static_cast<double>(key.first) * kQuantum, static_cast<double>(key.second) * kQuantum));
  std::unique_lock lock(mutex_);
  return cache_.try_emplace(key, std::move(value)).first->second;
}

std::size_t SignalModel::cache_size() const {
  std::shared_lock lock(mutex_);
  return cache_.size();
}

std::vector<double> SignalModel::field(const FitParameters& params, const std::vector<double>& delays) const {
  const auto d = decomposition(params.intensity, params.temperature);
  std::vector<double> shifted(delays.size());
  for (std::size_t i = 0; i < delays.size(); ++i) shifted[i] = delays[i] - params.t_offset;
  return grating_field(*d, problem_.scheme, shifted);
}

std::vector<double> SignalModel::signal(const FitParameters& params, const std::vector<double>& delays) const {
  const auto s = field(params, delays);
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool after = delays[i] - params.t_offset >= problem_.pump_t0;
    out[i] = params.scale * (after ? std::norm(s[i] + params.background) : 0.0);
  }
  return out;
}

SignalTrace model_signal(const FitParameters& params, const FitProblem& problem, const std::vector<double>& delays) {
  const SignalModel model(problem);
  SignalTrace out;
  out.times = delays;
  out.values = model.signal(params, delays);
  out.metadata.scheme = problem.scheme;
  out.metadata.mapping = problem.mapping;
  out.metadata.theoretical_intensity = params.intensity;
  out.metadata.single_pump_intensity = params.intensity / theoretical_intensity_factor(problem.scheme, problem.mapping);
  out.metadata.temperature = params.temperature;
  out.metadata.xi = effective_area(PulseSpec::linear(params.intensity, problem.pump_tau_fwhm), problem.molecule).xi;
  out.metadata.j_max = model.j_max();
  return out;
}

double best_scale(const std::vector<double>& data, const std::vector<double>& shape) {
  if (data.size() != shape.size()) throw ConfigError("scale fit: length mismatch");
  double dg = 0.0, gg = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    dg += data[i] * shape[i];
    gg += shape[i] * shape[i];
  }
  return gg > 0.0 ? dg / gg : 0.0;
}

std::vector<double> add_multiplicative_noise(const std::vector<double>& signal, double level, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) out[i] = signal[i] * (1.0 + level * normal(rng));
  return out;
}

FitResult fit_trace(const FitProblem& problem, const ExperimentalTrace& trace) {
  problem.validate();
  trace.validate();
  const SignalModel model(problem);
  const Objective objective(problem, trace, model);
  const ParameterSpace space(problem);
  const FitOptions& opt = problem.options;
  const std::size_t n = space.size();

  FitResult result;
  result.window_points = objective.points();
  FitParameters base = problem.initial();

  auto evaluate = [&](const std::vector<double>& u, FitParameters* out = nullptr) {
    FitParameters p = space.apply(base, u);
    const double f = objective(p);
    if (out) *out = p;
    return f;
  };

  // Multistart over (I, T); other free parameters start at their values.
  std::vector<std::vector<double>> starts;
  {
    std::vector<double> grid_i{problem.intensity.value}, grid_t{problem.temperature.value};
    if (problem.intensity.free) {
      grid_i.clear();
      const double lo = problem.intensity.lower, hi = problem.intensity.upper;
      for (std::size_t k = 0; k < opt.grid_intensities; ++k) {
        const double f = opt.grid_intensities == 1 ? 0.5 : static_cast<double>(k) / (opt.grid_intensities - 1);
        grid_i.push_back(lo > 0.0 ? lo * std::pow(hi / lo, f) : lo + f * (hi - lo));
      }
    }
    if (problem.temperature.free) {
      grid_t.clear();
      const double lo = problem.temperature.lower, hi = problem.temperature.upper;
      for (std::size_t k = 0; k < opt.grid_temperatures; ++k) {
        const double f = opt.grid_temperatures == 1 ? 0.5 : static_cast<double>(k) / (opt.grid_temperatures - 1);
        grid_t.push_back(lo + f * (hi - lo));
      }
    }
    for (double i : grid_i)
      for (double t : grid_t) {
        FitParameters p = base;
        p.intensity = i;
        p.temperature = t;
        starts.push_back(clamp_unit(space.scaled(p)));
      }
  }
  std::vector<double> start_values(starts.size());
  parallel_for(starts.size(), opt.threads, [&](std::size_t k) { start_values[k] = evaluate(starts[k]); });
  const auto best_start =
      static_cast<std::size_t>(std::min_element(start_values.begin(), start_values.end()) - start_values.begin());
  const auto [lo_it, hi_it] = std::minmax_element(start_values.begin(), start_values.end());
  result.flat_objective =
      starts.size() > 1 && (*hi_it - *lo_it) <= 1e-12 * std::max(std::abs(*lo_it), std::numeric_limits<double>::min());

  std::vector<double> best_u = starts[best_start];
  double best_f = start_values[best_start];

  if (n == 0) {
    result.converged = true;
  } else {
    // Nelder-Mead in the unit box; trial points are projected onto it.
    std::vector<std::vector<double>> simplex{best_u};
    std::vector<double> values{best_f};
    for (std::size_t k = 0; k < n; ++k) {
      auto v = best_u;
      v[k] += v[k] + 0.1 <= 1.0 ? 0.1 : -0.1;
      simplex.push_back(v);
      values.push_back(evaluate(v));
    }
    auto order = [&] {
      std::vector<std::size_t> idx(simplex.size());
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return values[a] < values[b]; });
      std::vector<std::vector<double>> s;
      std::vector<double> f;
      for (auto i : idx) {
        s.push_back(simplex[i]);
        f.push_back(values[i]);
      }
      simplex = std::move(s);
      values = std::move(f);
    };
    auto combine = [&](const std::vector<double>& c, const std::vector<double>& w, double t) {
      std::vector<double> out(n);
      for (std::size_t k = 0; k < n; ++k) out[k] = c[k] + t * (w[k] - c[k]);
      return clamp_unit(out);
    };

    order();
    result.residual_history.push_back(values.front());
    while (objective.evaluations() < opt.max_evaluations) {
      if (simplex_diameter(simplex) < opt.simplex_tolerance) {
        result.converged = true;
        break;
      }
      std::vector<double> centroid(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / static_cast<double>(n);

      const auto reflected = combine(centroid, simplex[n], -1.0);
      const double fr = evaluate(reflected);
      if (fr < values.front()) {
        const auto expanded = combine(centroid, simplex[n], -2.0);
        const double fe = evaluate(expanded);
        if (fe < fr) {
          simplex[n] = expanded;
          values[n] = fe;
        } else {
          simplex[n] = reflected;
          values[n] = fr;
        }
      } else if (fr < values[n - 1]) {
        simplex[n] = reflected;
        values[n] = fr;
      } else {
        const bool outside = fr < values[n];
        const auto contracted = combine(centroid, outside ? reflected : simplex[n], 0.5);
        const double fc = evaluate(contracted);
        if (fc < std::min(fr, values[n])) {
          simplex[n] = contracted;
          values[n] = fc;
        } else {
          for (std::size_t i = 1; i <= n; ++i) {
            simplex[i] = combine(simplex[0], simplex[i], 0.5);
            values[i] = evaluate(simplex[i]);
          }
        }
      }
      order();
      result.residual_history.push_back(values.front());
    }
    if (!result.converged && simplex_diameter(simplex) < opt.simplex_tolerance) result.converged = true;
    best_u = simplex.front();
    best_f = values.front();
  }

  FitParameters best;
  best_f = evaluate(best_u, &best);
  result.parameters = best;
  result.residual = best_f;

  // Curvature diagonal by central differences in scaled space; the stencil
  // is shifted inward at the bounds.
  const double h = 1e-3;
  for (std::size_t k = 0; k < n; ++k) {
    auto mid = best_u;
    mid[k] = std::clamp(mid[k], h, 1.0 - h);
    auto up = mid, down = mid;
    up[k] += h;
    down[k] -= h;
    const double range = space.specs[k]->upper - space.specs[k]->lower;
    result.sensitivity[ParameterSpace::name(space.slots[k])] =
        (evaluate(up) - 2.0 * evaluate(mid) + evaluate(down)) / (h * h * range * range);
  }
  if (problem.scale.free) result.sensitivity["scale"] = objective.scale_curvature(best);

  result.evaluations = objective.evaluations();
  result.single_pump_intensity =
      best.intensity / theoretical_intensity_factor(problem.scheme, problem.mapping);
  result.model = model.signal(best, trace.delays);
  return result;
}

}  // namespace rotorgrating
