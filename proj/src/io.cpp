#include "rotorgrating/io.hpp"

#include "rotorgrating/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace rotorgrating {
namespace {

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

std::string type_name(const Json& j) { return j.type_name(); }

}  // namespace

std::string version() { return ROTORGRATING_VERSION; }

Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::string what = e.what();
    if (auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
    throw ConfigError(source + ": " + line_column(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + what);
  }
}

Json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_json_text(buffer.str(), path.string());
}

ConfigObject::ConfigObject(const Json& json, std::string path) : json_(json), path_(std::move(path)) {
  if (!json_.is_object()) throw ConfigError(path_ + ": expected an object, found " + type_name(json_));
}

bool ConfigObject::has(const std::string& key) const { return json_.contains(key) && !json_.at(key).is_null(); }

const Json* ConfigObject::find(const std::string& key) {
  used_.insert(key);
  auto it = json_.find(key);
  if (it == json_.end() || it->is_null()) return nullptr;
  return &*it;
}

std::optional<double> ConfigObject::optional_number(const std::string& key) {
  const Json* v = find(key);
  if (!v) return std::nullopt;
  if (!v->is_number()) throw ConfigError(child_path(key) + ": expected a number, found " + type_name(*v));
  const double d = v->get<double>();
  if (!std::isfinite(d)) throw ConfigError(child_path(key) + ": not finite");
  return d;
}

double ConfigObject::number(const std::string& key, double fallback) {
  return optional_number(key).value_or(fallback);
}

double ConfigObject::required_number(const std::string& key) {
  auto v = optional_number(key);
  if (!v) throw ConfigError(child_path(key) + ": required");
  return *v;
}

long long ConfigObject::integer(const std::string& key, long long fallback) {
  const Json* v = find(key);
  if (!v) return fallback;
  if (!v->is_number_integer()) throw ConfigError(child_path(key) + ": expected an integer, found " + type_name(*v));
  return v->get<long long>();
}

bool ConfigObject::boolean(const std::string& key, bool fallback) {
  const Json* v = find(key);
  if (!v) return fallback;
  if (!v->is_boolean()) throw ConfigError(child_path(key) + ": expected true or false, found " + type_name(*v));
  return v->get<bool>();
}

std::string ConfigObject::string(const std::string& key, const std::string& fallback) {
  const Json* v = find(key);
  if (!v) return fallback;
  if (!v->is_string()) throw ConfigError(child_path(key) + ": expected a string, found " + type_name(*v));
  return v->get<std::string>();
}

const Json* ConfigObject::object(const std::string& key) {
  const Json* v = find(key);
  if (v && !v->is_object()) throw ConfigError(child_path(key) + ": expected an object, found " + type_name(*v));
  return v;
}

const Json* ConfigObject::raw(const std::string& key) { return find(key); }

void ConfigObject::finish() const {
  for (auto it = json_.begin(); it != json_.end(); ++it)
    if (!used_.count(it.key())) throw ConfigError(child_path(it.key()) + ": unknown key");
}

MoleculeSpec molecule_from_json(const Json& json, const std::string& path) {
  ConfigObject o(json, path);
  MoleculeSpec m;
  m.name = o.string("name", "unnamed");
  m.b_cm1 = o.required_number("B_cm1");
  m.delta_alpha_a3 = o.required_number("delta_alpha_A3");
  m.alpha_bar_a3 = o.number("alpha_bar_A3", 0.0);
  m.g_even = o.number("g_even", 1.0);
  m.g_odd = o.number("g_odd", 1.0);
  o.finish();
  try {
    m.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return m;
}

Json to_json(const MoleculeSpec& m) {
  return Json{{"name", m.name},           {"B_cm1", m.b_cm1}, {"delta_alpha_A3", m.delta_alpha_a3},
              {"alpha_bar_A3", m.alpha_bar_a3}, {"g_even", m.g_even}, {"g_odd", m.g_odd}};
}

MoleculeSpec resolve_molecule(const Json& reference, const std::filesystem::path& base_dir) {
  namespace fs = std::filesystem;
  if (reference.is_object()) return molecule_from_json(reference);
  if (!reference.is_string()) throw ConfigError("molecule: expected a name, a file path or an object");
  const std::string ref = reference.get<std::string>();
  if (ref.empty()) throw ConfigError("molecule: empty reference");

  const bool looks_like_path = ref.find('/') != std::string::npos || fs::path(ref).extension() == ".json";
  if (looks_like_path) {
    fs::path p(ref);
    if (p.is_relative()) p = base_dir / p;
    if (!fs::exists(p)) throw ConfigError("molecule: file '" + p.string() + "' not found");
    return molecule_from_json(load_json_file(p), p.string());
  }

  std::vector<fs::path> dirs;
  if (const char* env = std::getenv("ROTORGRATING_MOLECULE_PATH"); env && *env) dirs.emplace_back(env);
  dirs.emplace_back(fs::path(ROTORGRATING_DATA_DIR) / "molecules");
  for (const auto& d : dirs) {
    const fs::path p = d / (ref + ".json");
    if (fs::exists(p)) return molecule_from_json(load_json_file(p), p.string());
  }
  if (ref == "CO2") return co2();
  throw ConfigError("molecule: '" + ref + "' not found in the molecule library");
}

std::string format_number(double value) {
  if (value == 0.0) return "0";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, r.ptr);
}

std::string csv_text(const CsvTable& table, const Json& provenance) {
  if (table.header.size() != table.columns.size()) throw ConfigError("csv: header and column count differ");
  std::string out = "# rotorgrating " + version() + "\n";
  out += "# config: " + provenance.dump() + "\n";
  for (std::size_t c = 0; c < table.header.size(); ++c) out += (c ? "," : "") + table.header[c];
  out += "\n";
  const std::size_t rows = table.columns.empty() ? 0 : table.columns.front().size();
  for (const auto& col : table.columns)
    if (col.size() != rows) throw ConfigError("csv: columns differ in length");
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (c) out += ",";
      out += format_number(table.columns[c][r]);
    }
    out += "\n";
  }
  return out;
}

std::string json_text(const Json& document) { return document.dump(2) + "\n"; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw NumericalError("write to '" + path.string() + "' failed");
}

Json to_json(const FourierDecomposition& d) {
  Json components = Json::array();
  for (const auto& c : d.components)
    components.push_back({{"J", c.j}, {"amp", c.amplitude}, {"phase", c.phase}, {"omega", c.omega}});
  return Json{{"C", d.c},
              {"axis", std::string(to_string(d.axis))},
              {"reference_time_ps", d.reference_time},
              {"components", components}};
}

Json to_json(const GratingGeometry& g) {
  return Json{{"fringe_period_um", g.fringe_period_um},
              {"alignment_order1_angle_deg", g.alignment_order1_angle_deg},
              {"plasma_period_um", g.plasma_period_um},
              {"plasma_order1_angle_deg", g.plasma_order1_angle_deg}};
}

Json to_json(const SignalMetadata& m) {
  return Json{{"scheme", std::string(to_string(m.scheme))},
              {"intensity_mapping", std::string(to_string(m.mapping))},
              {"single_pump_intensity_TW_cm2", m.single_pump_intensity},
              {"theoretical_intensity_TW_cm2", m.theoretical_intensity},
              {"temperature_K", m.temperature},
              {"xi", m.xi},
              {"j_max", m.j_max}};
}

Json to_json(const FitParameters& p) {
  return Json{{"intensity", p.intensity},
              {"temperature", p.temperature},
              {"scale", p.scale},
              {"t_offset", p.t_offset},
              {"background_re", p.background.real()},
              {"background_im", p.background.imag()}};
}

Json to_json(const FitResult& r) {
  Json sensitivity = Json::object();
  for (const auto& [k, v] : r.sensitivity) sensitivity[k] = v;
  return Json{{"parameters", to_json(r.parameters)},
              {"single_pump_intensity_TW_cm2", r.single_pump_intensity},
              {"residual", r.residual},
              {"evaluations", r.evaluations},
              {"converged", r.converged},
              {"flat_objective", r.flat_objective},
              {"window_points", r.window_points},
              {"sensitivity", sensitivity}};
}

}  // namespace rotorgrating
