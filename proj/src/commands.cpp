#include "rotorgrating/cli.hpp"

#include "rotorgrating/error.hpp"
#include "rotorgrating/io.hpp"
#include "rotorgrating/validation.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace rotorgrating::cli {
namespace {

namespace fs = std::filesystem;

struct Loaded {
  Json json;
  fs::path base_dir;
};

Loaded load_config(const Options& options, bool required) {
  if (!options.config) {
    if (required) throw ConfigError("--config is required for this subcommand");
    return {Json::object(), fs::current_path()};
  }
  Loaded l{load_json_file(*options.config), options.config->parent_path()};
  if (l.base_dir.empty()) l.base_dir = fs::current_path();
  if (!l.json.is_object()) throw ConfigError(options.config->string() + ": top level must be an object");
  return l;
}

fs::path out_dir(const Options& options) { return options.out_dir.value_or(fs::current_path()); }

MoleculeSpec read_molecule(ConfigObject& root, const fs::path& base) {
  const Json* ref = root.raw("molecule");
  return resolve_molecule(ref ? *ref : Json("CO2"), base);
}

double non_negative(double v, const std::string& path) {
  if (v < 0.0) throw ConfigError(path + ": must be >= 0");
  return v;
}

SimulationOptions read_simulation(ConfigObject& root, const Options& cli, Propagator fallback) {
  SimulationOptions s;
  s.propagator = fallback;
  s.threads = cli.threads;
  const Json* j = root.object("simulation");
  if (!j) return s;
  ConfigObject o(*j, root.child_path("simulation"));
  s.propagator = parse_propagator(o.string("propagator", std::string(to_string(fallback))));
  s.cutoff = o.number("cutoff", s.cutoff);
  if (!(s.cutoff > 0.0 && s.cutoff < 0.1)) throw ConfigError(o.child_path("cutoff") + ": must lie in (0, 0.1)");
  const auto j_max = o.integer("j_max", 0);
  if (j_max < 0 || (j_max > 0 && j_max < 2)) throw ConfigError(o.child_path("j_max") + ": must be 0 (automatic) or >= 2");
  s.j_max = static_cast<int>(j_max);
  s.relative_tolerance = o.number("relative_tolerance", s.relative_tolerance);
  if (!(s.relative_tolerance > 0.0 && s.relative_tolerance < 1e-3))
    throw ConfigError(o.child_path("relative_tolerance") + ": must lie in (0, 1e-3)");
  o.finish();
  return s;
}

Json to_json(const SimulationOptions& s) {
  return Json{{"propagator", std::string(to_string(s.propagator))},
              {"cutoff", s.cutoff},
              {"j_max", s.j_max},
              {"relative_tolerance", s.relative_tolerance}};
}

GratingConfig read_grating(ConfigObject& root) {
  GratingConfig g;
  const Json* j = root.object("grating");
  if (!j) return g;
  ConfigObject o(*j, root.child_path("grating"));
  g.wavelength = o.number("wavelength", g.wavelength);
  g.crossing_angle_deg = o.number("crossing_angle_deg", g.crossing_angle_deg);
  g.scheme = parse_scheme(o.string("scheme", "parallel"));
  g.mapping = parse_intensity_mapping(o.string("intensity_mapping", "point"));
  const auto i0 = o.optional_number("single_pump_peak_intensity");
  const auto it = o.optional_number("theoretical_intensity");
  if (i0 && it) throw ConfigError(o.child_path("theoretical_intensity") + ": give either it or single_pump_peak_intensity");
  if (i0) g.single_pump_peak_intensity = non_negative(*i0, o.child_path("single_pump_peak_intensity"));
  if (it)
    g.single_pump_peak_intensity = non_negative(*it, o.child_path("theoretical_intensity")) /
                                   theoretical_intensity_factor(g.scheme, g.mapping);
  g.pump_tau_fwhm = o.number("pump_tau_fwhm", g.pump_tau_fwhm);
  g.pump_t0 = o.number("pump_t0", g.pump_t0);
  if (auto p = o.optional_number("probe_tau_fwhm")) g.probe_tau_fwhm = *p;
  if (const Json* b = o.raw("plasma_background")) {
    if (!b->is_array() || b->size() != 2 || !(*b)[0].is_number() || !(*b)[1].is_number())
      throw ConfigError(o.child_path("plasma_background") + ": expected [re, im]");
    g.plasma_background = std::complex<double>((*b)[0].get<double>(), (*b)[1].get<double>());
  }
  o.finish();
  try {
    g.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(root.child_path("grating") + ": " + e.what());
  }
  return g;
}

Json to_json(const GratingConfig& g) {
  Json j{{"wavelength", g.wavelength},
         {"crossing_angle_deg", g.crossing_angle_deg},
         {"scheme", std::string(to_string(g.scheme))},
         {"intensity_mapping", std::string(to_string(g.mapping))},
         {"single_pump_peak_intensity", g.single_pump_peak_intensity},
         {"theoretical_intensity", g.theoretical_intensity()},
         {"pump_tau_fwhm", g.pump_tau_fwhm},
         {"pump_t0", g.pump_t0}};
  j["probe_tau_fwhm"] = g.probe_tau_fwhm ? Json(*g.probe_tau_fwhm) : Json(nullptr);
  j["plasma_background"] =
      g.plasma_background ? Json::array({g.plasma_background->real(), g.plasma_background->imag()}) : Json(nullptr);
  return j;
}

TimeGrid read_time_grid(ConfigObject& root, const MoleculeSpec& molecule, double t_pulse, const Options& cli) {
  TimeGrid grid = TimeGrid::one_revival(molecule, t_pulse);
  if (const Json* j = root.object("time_grid")) {
    ConfigObject o(*j, root.child_path("time_grid"));
    grid.begin = o.number("begin", grid.begin);
    grid.end = o.number("end", grid.begin + revival_period(molecule));
    const auto points = o.integer("points", static_cast<long long>(grid.points));
    if (points < 2) throw ConfigError(o.child_path("points") + ": must be >= 2");
    grid.points = static_cast<std::size_t>(points);
    o.finish();
    if (!(grid.end > grid.begin)) throw ConfigError(root.child_path("time_grid") + ": end must exceed begin");
  }
  if (cli.time_points > 0) grid.points = cli.time_points;
  if (grid.points < 2) throw ConfigError("--time-grid must be >= 2");
  return grid;
}

Json to_json(const TimeGrid& g) { return Json{{"begin", g.begin}, {"end", g.end}, {"points", g.points}}; }

Json provenance(const std::string& command, const Json& resolved) {
  return Json{{"tool", "rotorgrating"}, {"version", version()}, {"command", command}, {"config", resolved}};
}

void report_written(std::ostream& out, const std::vector<fs::path>& files) {
  for (const auto& f : files) out << "wrote " << f.string() << "\n";
}

std::string describe_mapping(Scheme scheme, IntensityMapping mapping) {
  const double f = theoretical_intensity_factor(scheme, mapping);
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s scheme, %s mapping: I_theory = %g x I0", std::string(to_string(scheme)).c_str(),
                std::string(to_string(mapping)).c_str(), f);
  return buf;
}

FitParameter read_parameter(ConfigObject& parent, const std::string& key, FitParameter p) {
  const Json* j = parent.object(key);
  if (!j) return p;
  ConfigObject o(*j, parent.child_path(key));
  p.value = o.number("value", p.value);
  p.lower = o.number("lower", p.lower);
  p.upper = o.number("upper", p.upper);
  p.free = o.boolean("free", p.free);
  o.finish();
  return p;
}

Json to_json(const FitParameter& p) {
  return Json{{"value", p.value}, {"lower", p.lower}, {"upper", p.upper}, {"free", p.free}};
}

}  // namespace

int simulate(const Options& options, std::ostream& out, std::ostream& err) {
  const auto cfg = load_config(options, true);
  ConfigObject root(cfg.json, "config");
  const MoleculeSpec molecule = read_molecule(root, cfg.base_dir);
  const double temperature = non_negative(root.number("temperature", 293.0), "config.temperature");
  const GratingConfig grating = read_grating(root);
  const TimeGrid grid = read_time_grid(root, molecule, grating.pump_t0, options);
  const SimulationOptions sim = read_simulation(root, options, Propagator::tdse);
  const auto seed = root.integer("seed", 0);
  root.finish();

  const Json resolved{{"molecule", to_json(molecule)}, {"temperature", temperature}, {"grating", to_json(grating)},
                      {"time_grid", to_json(grid)},     {"simulation", to_json(sim)},  {"seed", seed}};
  const auto times = grid.times();
  const auto result = grating_signal(molecule, temperature, grating, times, sim);
  for (const auto& w : result.signal.warnings) err << "warning: " << w << "\n";

  const Json prov = provenance("simulate", resolved);
  const auto dir = out_dir(options);
  const std::string alignment = csv_text({{"t_ps", "value"}, {result.alignment.times, result.alignment.values}}, prov);
  const std::string signal = csv_text({{"delay_ps", "signal_au"}, {result.signal.times, result.signal.values}}, prov);
  Json meta = prov;
  meta["signal"] = to_json(result.signal.metadata);
  meta["intensity_convention"] = describe_mapping(grating.scheme, grating.mapping);
  meta["permanent_alignment_C"] = result.decomposition.c;
  meta["warnings"] = result.signal.warnings;

  write_text(dir / "alignment.csv", alignment);
  write_text(dir / "signal.csv", signal);
  write_text(dir / "metadata.json", json_text(meta));
  report_written(out, {dir / "alignment.csv", dir / "signal.csv", dir / "metadata.json"});
  return exit_ok;
}

int fourier(const Options& options, std::ostream& out, std::ostream&) {
  const auto cfg = load_config(options, true);
  ConfigObject root(cfg.json, "config");
  const MoleculeSpec molecule = read_molecule(root, cfg.base_dir);
  const double temperature = non_negative(root.number("temperature", 293.0), "config.temperature");
  PulseSpec pulse = PulseSpec::linear(0.0, 0.1);
  if (const Json* j = root.object("pulse")) {
    ConfigObject o(*j, "config.pulse");
    pulse.peak_intensity = non_negative(o.required_number("peak_intensity"), "config.pulse.peak_intensity");
    pulse.tau_fwhm = o.number("tau_fwhm", pulse.tau_fwhm);
    pulse.wavelength = o.number("wavelength", pulse.wavelength);
    pulse.t0 = o.number("t0", pulse.t0);
    o.finish();
  } else {
    throw ConfigError("config.pulse: required");
  }
  pulse.validate();
  const Axis axis = parse_axis(root.string("axis", "y"));
  const TimeGrid grid = read_time_grid(root, molecule, pulse.t0, options);
  const SimulationOptions sim = read_simulation(root, options, Propagator::tdse);
  root.finish();

  const Json resolved{{"molecule", to_json(molecule)},
                      {"temperature", temperature},
                      {"pulse",
                       {{"peak_intensity", pulse.peak_intensity},
                        {"tau_fwhm", pulse.tau_fwhm},
                        {"wavelength", pulse.wavelength},
                        {"t0", pulse.t0},
                        {"polarization", "y"}}},
                      {"axis", std::string(to_string(axis))},
                      {"time_grid", to_json(grid)},
                      {"simulation", to_json(sim)}};

  const auto ensemble = boltzmann_ensemble(molecule, temperature, sim.cutoff);
  const auto propagated = propagate_linear_ensemble(molecule, ensemble, pulse, sim);
  const auto decomposition = fourier_decompose(propagated, axis);
  const auto times = grid.times();
  const double error =
      max_abs_difference(alignment_trace(propagated, axis, times, sim.threads), reconstruct(decomposition, times));

  Json doc = provenance("fourier", resolved);
  doc["decomposition"] = to_json(decomposition);
  doc["reconstruction_max_error"] = error;
  doc["xi"] = propagated.xi;
  doc["j_max"] = propagated.j_max;
  doc["max_norm_error"] = propagated.max_norm_error;
  const auto path = out_dir(options) / "fourier.json";
  write_text(path, json_text(doc));
  char buf[128];
  std::snprintf(buf, sizeof buf, "C = %.6e, %zu components, reconstruction max error %.3e\n", decomposition.c,
                decomposition.components.size(), error);
  out << buf;
  report_written(out, {path});
  return exit_ok;
}

int geometry(const Options& options, std::ostream& out, std::ostream&) {
  const auto cfg = load_config(options, false);
  ConfigObject root(cfg.json, "config");
  const GratingConfig grating = read_grating(root);
  root.finish();
  const auto g = grating_geometry(grating);
  Json doc = provenance("geometry", Json{{"grating", to_json(grating)}});
  doc["geometry"] = to_json(g);
  out << json_text(doc);
  if (options.out_dir) {
    const auto path = *options.out_dir / "geometry.json";
    write_text(path, json_text(doc));
  }
  return exit_ok;
}

int validate(const Options& options, std::ostream& out, std::ostream&) {
  const auto cfg = load_config(options, false);
  ConfigObject root(cfg.json, "config");
  ValidationOptions v;
  v.molecule = read_molecule(root, cfg.base_dir);
  v.temperature = non_negative(root.number("temperature", v.temperature), "config.temperature");
  v.intensity = non_negative(root.number("intensity", v.intensity), "config.intensity");
  v.elliptic_intensity = non_negative(root.number("elliptic_intensity", v.elliptic_intensity), "config.elliptic_intensity");
  v.regime_temperature =
      non_negative(root.number("regime_temperature", v.regime_temperature), "config.regime_temperature");
  if (const Json* r = root.raw("regime_intensities")) {
    if (!r->is_array()) throw ConfigError("config.regime_intensities: expected an array");
    v.regime_intensities.clear();
    for (const auto& x : *r) {
      if (!x.is_number() || !(x.get<double>() > 0.0))
        throw ConfigError("config.regime_intensities: entries must be positive numbers");
      v.regime_intensities.push_back(x.get<double>());
    }
  }
  v.elliptic_temperature =
      non_negative(root.number("elliptic_temperature", v.elliptic_temperature), "config.elliptic_temperature");
  v.elliptic_propagator = parse_propagator(root.string("elliptic_propagator", "sudden"));
  v.regime_propagator = parse_propagator(root.string("regime_propagator", "sudden"));
  v.simulation = read_simulation(root, options, Propagator::tdse);
  if (options.time_points > 0) v.time_points = options.time_points;
  root.finish();

  const auto checks = run_validation(v);
  bool all = true;
  Json list = Json::array();
  for (const auto& c : checks) {
    all = all && c.passed;
    char buf[512];
    std::snprintf(buf, sizeof buf, "[%s] %s: %.6g (target %s)%s%s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                  c.measured, c.target.c_str(), c.detail.empty() ? "" : "; ", c.detail.c_str());
    out << buf;
    list.push_back({{"name", c.name},
                    {"passed", c.passed},
                    {"measured", std::isfinite(c.measured) ? Json(c.measured) : Json(nullptr)},
                    {"target", c.target},
                    {"detail", c.detail}});
  }
  out << (all ? "all checks passed\n" : "some checks failed\n");
  if (options.out_dir) {
    Json doc = provenance("validate", Json{{"molecule", to_json(v.molecule)},
                                           {"temperature", v.temperature},
                                           {"intensity", v.intensity},
                                           {"elliptic_intensity", v.elliptic_intensity},
                                           {"elliptic_temperature", v.elliptic_temperature},
                                           {"elliptic_propagator", std::string(to_string(v.elliptic_propagator))},
                                           {"regime_temperature", v.regime_temperature},
                                           {"regime_intensities", v.regime_intensities},
                                           {"regime_propagator", std::string(to_string(v.regime_propagator))},
                                           {"time_points", v.time_points},
                                           {"simulation", to_json(v.simulation)}});
    doc["checks"] = list;
    write_text(*options.out_dir / "validation.json", json_text(doc));
  }
  return all ? exit_ok : exit_numerical;
}

int fit(const Options& options, std::ostream& out, std::ostream& err) {
  const auto cfg = load_config(options, true);
  ConfigObject root(cfg.json, "config");
  FitProblem problem;
  problem.molecule = read_molecule(root, cfg.base_dir);
  problem.scheme = parse_scheme(root.string("scheme", "parallel"));
  problem.mapping = parse_intensity_mapping(root.string("intensity_mapping", "point"));
  problem.pump_tau_fwhm = root.number("pump_tau_fwhm", problem.pump_tau_fwhm);
  problem.pump_t0 = root.number("pump_t0", problem.pump_t0);
  if (const Json* j = root.object("parameters")) {
    ConfigObject p(*j, "config.parameters");
    problem.intensity = read_parameter(p, "intensity", problem.intensity);
    problem.temperature = read_parameter(p, "temperature", problem.temperature);
    problem.scale = read_parameter(p, "scale", problem.scale);
    problem.t_offset = read_parameter(p, "t_offset", problem.t_offset);
    problem.background_re = read_parameter(p, "background_re", problem.background_re);
    problem.background_im = read_parameter(p, "background_im", problem.background_im);
    p.finish();
  }
  problem.simulation = read_simulation(root, options, Propagator::sudden);
  if (!root.object("simulation")) problem.simulation.cutoff = 1e-8;
  if (const Json* j = root.object("options")) {
    ConfigObject o(*j, "config.options");
    auto count = [&](const char* key, std::size_t fallback) {
      const auto v = o.integer(key, static_cast<long long>(fallback));
      if (v < 1) throw ConfigError(o.child_path(key) + ": must be >= 1");
      return static_cast<std::size_t>(v);
    };
    problem.options.grid_intensities = count("grid_intensities", problem.options.grid_intensities);
    problem.options.grid_temperatures = count("grid_temperatures", problem.options.grid_temperatures);
    problem.options.max_evaluations = count("max_evaluations", problem.options.max_evaluations);
    problem.options.simplex_tolerance = o.number("simplex_tolerance", problem.options.simplex_tolerance);
    problem.options.exclusion_halfwidth = o.number("exclusion_halfwidth", problem.options.exclusion_halfwidth);
    o.finish();
  }
  problem.options.threads = options.threads;
  const TraceFormat format = parse_trace_format(root.string("trace_format", "csv"));
  std::optional<fs::path> trace_path = options.trace;
  if (const Json* t = root.raw("trace")) {
    if (!t->is_string()) throw ConfigError("config.trace: expected a path");
    if (!trace_path) {
      trace_path = fs::path(t->get<std::string>());
      if (trace_path->is_relative()) trace_path = cfg.base_dir / *trace_path;
    }
  }
  root.finish();
  if (!trace_path) throw ConfigError("no trace given (use --trace or config.trace)");
  problem.validate();
  const ExperimentalTrace trace = load_trace(trace_path->string(), format);

  const Json resolved{{"molecule", to_json(problem.molecule)},
                      {"scheme", std::string(to_string(problem.scheme))},
                      {"intensity_mapping", std::string(to_string(problem.mapping))},
                      {"pump_tau_fwhm", problem.pump_tau_fwhm},
                      {"pump_t0", problem.pump_t0},
                      {"parameters",
                       {{"intensity", to_json(problem.intensity)},
                        {"temperature", to_json(problem.temperature)},
                        {"scale", to_json(problem.scale)},
                        {"t_offset", to_json(problem.t_offset)},
                        {"background_re", to_json(problem.background_re)},
                        {"background_im", to_json(problem.background_im)}}},
                      {"simulation", to_json(problem.simulation)},
                      {"options",
                       {{"grid_intensities", problem.options.grid_intensities},
                        {"grid_temperatures", problem.options.grid_temperatures},
                        {"max_evaluations", problem.options.max_evaluations},
                        {"simplex_tolerance", problem.options.simplex_tolerance},
                        {"exclusion_halfwidth", problem.options.exclusion_halfwidth}}},
                      {"trace", trace_path->string()},
                      {"trace_format", format == TraceFormat::csv ? "csv" : "whitespace"}};

  const FitResult result = fit_trace(problem, trace);
  Json doc = provenance("fit", resolved);
  doc["result"] = to_json(result);
  doc["intensity_convention"] = describe_mapping(problem.scheme, problem.mapping);
  if (trace.metadata.nominal_single_pump_intensity)
    doc["nominal_single_pump_intensity_TW_cm2"] = *trace.metadata.nominal_single_pump_intensity;

  std::vector<double> residual(trace.delays.size());
  for (std::size_t i = 0; i < residual.size(); ++i) residual[i] = trace.signal[i] - result.model[i];
  const auto dir = out_dir(options);
  write_text(dir / "fit_result.json", json_text(doc));
  write_text(dir / "fit_trace.csv",
             csv_text({{"delay_ps", "data", "model", "residual"}, {trace.delays, trace.signal, result.model, residual}},
                      provenance("fit", resolved)));

  char buf[256];
  std::snprintf(buf, sizeof buf, "I_theory = %.4f TW/cm^2 (I0 = %.4f), T = %.2f K, scale = %.6g, residual %.3e, %zu evaluations\n",
                result.parameters.intensity, result.single_pump_intensity, result.parameters.temperature,
                result.parameters.scale, result.residual, result.evaluations);
  out << buf;
  report_written(out, {dir / "fit_result.json", dir / "fit_trace.csv"});
  if (result.flat_objective) err << "warning: the objective is flat over the multistart grid\n";
  if (!result.converged) {
    err << "fit did not converge within the evaluation budget; best-so-far written\n";
    return exit_fit_not_converged;
  }
  return exit_ok;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rotational alignment and transient-grating signals of linear molecules", "rotorgrating"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);
  app.fallthrough();

  Options options;
  std::string config, out_path, trace;
  app.add_option("--config", config, "JSON configuration file");
  app.add_option("--out", out_path, "Output directory");
  app.add_option("--threads", options.threads, "Worker threads (0 = all available)");
  app.add_option("--time-grid", options.time_points, "Number of time samples");

  auto* sim = app.add_subcommand("simulate", "Alignment and DFWM signal traces");
  auto* four = app.add_subcommand("fourier", "Exact Fourier decomposition of the alignment trace");
  auto* geo = app.add_subcommand("geometry", "Grating period and diffraction angles");
  auto* val = app.add_subcommand("validate", "Run the numerical self-checks");
  auto* fit_cmd = app.add_subcommand("fit", "Retrieve parameters from a measured trace");
  fit_cmd->add_option("--trace", trace, "Trace CSV (delay_ps,signal_au)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_config;
  }
  if (!config.empty()) options.config = config;
  if (!out_path.empty()) options.out_dir = out_path;
  if (!trace.empty()) options.trace = trace;

  try {
    if (sim->parsed()) return simulate(options, out, err);
    if (four->parsed()) return fourier(options, out, err);
    if (geo->parsed()) return geometry(options, out, err);
    if (val->parsed()) return validate(options, out, err);
    if (fit_cmd->parsed()) return fit(options, out, err);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return exit_config;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return exit_numerical;
  } catch (const nlohmann::json::exception& e) {
    err << "configuration error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "file error: " << e.what() << "\n";
    return exit_config;
  }
  return exit_config;
}

}  // namespace rotorgrating::cli
