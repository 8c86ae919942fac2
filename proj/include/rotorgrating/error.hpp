#pragma once

#include <stdexcept>
#include <string>

namespace rotorgrating {

/// Invalid input: malformed configuration, out-of-range parameters,
/// violated preconditions.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical contract could not be honoured (basis too small,
/// integrator tolerance not met, non-normalized state).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Population reached the top of the truncated rotational basis.
class BasisTooSmallError : public NumericalError {
 public:
  BasisTooSmallError(const std::string& what, int j_max, double edge_population)
      : NumericalError(what), j_max_(j_max), edge_population_(edge_population) {}

  int j_max() const { return j_max_; }
  double edge_population() const { return edge_population_; }

 private:
  int j_max_;
  double edge_population_;
};

class IntegrationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace rotorgrating
