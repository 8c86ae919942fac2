#include "rotorgrating/cli.hpp"
#include "rotorgrating/retrieval.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using rotorgrating::cli::run;

namespace {

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("rotorgrating_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }

  fs::path write(const std::string& file, const std::string& text) const {
    std::ofstream(dir / file) << text;
    return dir / file;
  }
};

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "rotorgrating");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

constexpr const char* kSimulate = R"({
  "molecule": "CO2",
  "temperature": 293,
  "grating": {"scheme": "parallel", "single_pump_peak_intensity": 10},
  "time_grid": {"begin": -1, "end": 45, "points": 300},
  "simulation": {"propagator": "sudden"}
})";

}  // namespace

TEST_CASE("argument errors") {
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"frobnicate"}).code == 2);
  CHECK(invoke({"--version"}).code == 0);
  CHECK(invoke({"simulate"}).code == 2);
  CHECK(invoke({"simulate", "--config", "/nonexistent/config.json"}).code == 2);
}

TEST_CASE("configuration errors leave no output") {
  Scratch s("config");
  const auto out = (s.dir / "out").string();

  const auto bad = s.write("bad.json", "{\n  \"temperature\": 293,,\n}");
  auto r = invoke({"simulate", "--config", bad.string(), "--out", out});
  CHECK(r.code == 2);
  CHECK(r.err.find("line 2") != std::string::npos);

  const auto unknown = s.write("unknown.json", R"({"temprature": 293})");
  r = invoke({"simulate", "--config", unknown.string(), "--out", out});
  CHECK(r.code == 2);
  CHECK(r.err.find("temprature") != std::string::npos);

  const auto molecule = s.write("molecule.json", R"({"molecule": "missing/N2O.json"})");
  CHECK(invoke({"simulate", "--config", molecule.string(), "--out", out}).code == 2);

  const auto angle = s.write("angle.json", R"({"grating": {"crossing_angle_deg": 30}})");
  CHECK(invoke({"geometry", "--config", angle.string()}).code == 2);

  const auto scheme = s.write("scheme.json", R"({"grating": {"scheme": "crossed"}})");
  CHECK(invoke({"simulate", "--config", scheme.string(), "--out", out}).code == 2);

  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("simulate writes deterministic outputs") {
  Scratch s("simulate");
  const auto cfg = s.write("sim.json", kSimulate);
  const auto a = (s.dir / "a").string(), b = (s.dir / "b").string();
  REQUIRE(invoke({"simulate", "--config", cfg.string(), "--out", a}).code == 0);
  REQUIRE(invoke({"simulate", "--config", cfg.string(), "--out", b, "--threads", "1"}).code == 0);
  for (const char* f : {"alignment.csv", "signal.csv", "metadata.json"}) {
    REQUIRE(fs::exists(fs::path(a) / f));
    CHECK(slurp(fs::path(a) / f) == slurp(fs::path(b) / f));
  }
  const auto meta = nlohmann::json::parse(slurp(fs::path(a) / "metadata.json"));
  CHECK(meta.contains("intensity_convention"));
  const auto signal = slurp(fs::path(a) / "signal.csv");
  CHECK(signal.find("delay_ps,signal_au") != std::string::npos);

  const auto trace = rotorgrating::load_trace((fs::path(a) / "signal.csv").string());
  CHECK(trace.delays.size() == 300);
}

TEST_CASE("zero intensity gives a flat signal") {
  Scratch s("zero");
  const auto cfg = s.write("zero.json", R"({
    "grating": {"single_pump_peak_intensity": 0},
    "time_grid": {"begin": 0, "end": 10, "points": 60},
    "simulation": {"propagator": "sudden"}
  })");
  REQUIRE(invoke({"simulate", "--config", cfg.string(), "--out", s.dir.string()}).code == 0);
  const auto t = rotorgrating::load_trace((s.dir / "signal.csv").string());
  for (double v : t.signal) CHECK(v == 0.0);
}

TEST_CASE("geometry and fourier") {
  Scratch s("geometry");
  const auto cfg = s.write("g.json", R"({"grating": {"scheme": "perpendicular", "crossing_angle_deg": 1}})");
  auto r = invoke({"geometry", "--config", cfg.string()});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["geometry"]["fringe_period_um"].get<double>() == doctest::Approx(45.837).epsilon(1e-4));
  CHECK_FALSE(fs::exists(s.dir / "geometry.json"));

  const auto f = s.write("f.json", R"({
    "temperature": 30,
    "pulse": {"peak_intensity": 25},
    "time_grid": {"points": 512},
    "simulation": {"propagator": "sudden"}
  })");
  r = invoke({"fourier", "--config", f.string(), "--out", s.dir.string()});
  REQUIRE(r.code == 0);
  const auto four = nlohmann::json::parse(slurp(s.dir / "fourier.json"));
  CHECK(four["reconstruction_max_error"].get<double>() < 1e-10);

  const auto nopulse = s.write("np.json", R"({"temperature": 30})");
  CHECK(invoke({"fourier", "--config", nopulse.string(), "--out", s.dir.string()}).code == 2);
}

TEST_CASE("fit") {
  Scratch s("fit");
  const auto sim = s.write("sim.json", R"({
    "grating": {"scheme": "parallel", "single_pump_peak_intensity": 12},
    "time_grid": {"begin": -1, "end": 44, "points": 400},
    "simulation": {"propagator": "sudden", "cutoff": 1e-8}
  })");
  REQUIRE(invoke({"simulate", "--config", sim.string(), "--out", s.dir.string()}).code == 0);

  const auto cfg = s.write("fit.json", R"({
    "parameters": {"temperature": {"value": 293, "free": false}},
    "options": {"grid_intensities": 4, "grid_temperatures": 1}
  })");
  CHECK(invoke({"fit", "--config", cfg.string(), "--out", s.dir.string()}).code == 2);
  CHECK(invoke({"fit", "--config", cfg.string(), "--trace", (s.dir / "none.csv").string()}).code == 2);

  const auto r = invoke({"fit", "--config", cfg.string(), "--trace", (s.dir / "signal.csv").string(), "--out",
                         s.dir.string()});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(slurp(s.dir / "fit_result.json"));
  CHECK(doc["result"]["single_pump_intensity_TW_cm2"].get<double>() == doctest::Approx(12.0).epsilon(1e-3));
  CHECK(fs::exists(s.dir / "fit_trace.csv"));
}
