#pragma once

// JSON configuration access with path-qualified errors, molecule lookup and
// deterministic CSV/JSON emission.

#include "rotorgrating/grating.hpp"
#include "rotorgrating/retrieval.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rotorgrating {

using Json = nlohmann::ordered_json;

std::string version();

/// Parses JSON text; syntax errors report line and column.
Json parse_json_text(const std::string& text, const std::string& source);
Json load_json_file(const std::filesystem::path& path);

/// Typed, strict view of one JSON object. Unknown keys are rejected by finish().
class ConfigObject {
 public:
  ConfigObject(const Json& json, std::string path);

  bool has(const std::string& key) const;
  double number(const std::string& key, double fallback);
  std::optional<double> optional_number(const std::string& key);
  double required_number(const std::string& key);
  long long integer(const std::string& key, long long fallback);
  bool boolean(const std::string& key, bool fallback);
  std::string string(const std::string& key, const std::string& fallback);
  /// Child object, or nullptr when absent.
  const Json* object(const std::string& key);
  const Json* raw(const std::string& key);
  std::string child_path(const std::string& key) const { return path_ + "." + key; }
  void finish() const;

 private:
  const Json* find(const std::string& key);
  const Json& json_;
  std::string path_;
  std::set<std::string> used_;
};

MoleculeSpec molecule_from_json(const Json& json, const std::string& path = "molecule");
Json to_json(const MoleculeSpec& molecule);

/// A molecule reference is an inline object, a path to a JSON file, or a name
/// looked up in $ROTORGRATING_MOLECULE_PATH, then the shipped data directory.
/// "CO2" falls back to the built-in definition.
MoleculeSpec resolve_molecule(const Json& reference, const std::filesystem::path& base_dir);

/// Fixed-format number: shortest round-trip representation.
std::string format_number(double value);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
};

/// "# rotorgrating <version>" and "# config: <json>" lines, then the table.
std::string csv_text(const CsvTable& table, const Json& provenance);
std::string json_text(const Json& document);

void write_text(const std::filesystem::path& path, const std::string& text);

Json to_json(const FourierDecomposition& decomposition);
Json to_json(const GratingGeometry& geometry);
Json to_json(const SignalMetadata& metadata);
Json to_json(const FitParameters& parameters);
Json to_json(const FitResult& result);

}  // namespace rotorgrating
