#pragma once

// Subcommands of the rotorgrating tool. Each reads a JSON configuration,
// validates it completely, computes, and only then writes its outputs.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>

namespace rotorgrating::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_config = 2,
  exit_numerical = 3,
  exit_fit_not_converged = 4,
};

struct Options {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> out_dir;
  unsigned threads = 0;
  std::size_t time_points = 0;  // 0 keeps the configured value
  std::optional<std::filesystem::path> trace;
};

int simulate(const Options& options, std::ostream& out, std::ostream& err);
int fourier(const Options& options, std::ostream& out, std::ostream& err);
int geometry(const Options& options, std::ostream& out, std::ostream& err);
int validate(const Options& options, std::ostream& out, std::ostream& err);
int fit(const Options& options, std::ostream& out, std::ostream& err);

/// Parses argv, dispatches, and maps errors to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rotorgrating::cli
