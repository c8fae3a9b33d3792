#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace antiito {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation
/// (invalid model parameters, negative cell counts, x <= 0 for ln Gamma, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// No proper stationary density exists: sigma^2 <= 2(c - q), the stationary
/// law is the point mass at zero.
class DegenerateDensity : public Error {
 public:
  using Error::Error;
};

/// A trajectory produced a non-finite state.
class NumericalBlowup : public Error {
 public:
  NumericalBlowup(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Too many trajectories of an ensemble blew up.
class EnsembleBlowup : public Error {
 public:
  EnsembleBlowup(const std::string& what, std::size_t blown, double first_time)
      : Error(what), blown_(blown), first_time_(first_time) {}
  std::size_t blown_paths() const noexcept { return blown_; }
  double first_blowup_time() const noexcept { return first_time_; }

 private:
  std::size_t blown_;
  double first_time_;
};

/// Explicit Fokker-Planck step exceeded its stability limit.
class StabilityError : public Error {
 public:
  using Error::Error;
};

/// A truncation ladder reached its deepest level without a verdict.
class Inconclusive : public Error {
 public:
  using Error::Error;
};

/// Malformed experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace antiito
