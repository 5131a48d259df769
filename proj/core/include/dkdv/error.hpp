#pragma once

#include <stdexcept>
#include <string>

namespace dkdv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters, mismatched sizes, malformed configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Singular banded system or Newton failure.
class NumericalBreakdown : public Error {
 public:
  using Error::Error;
};

/// Non-finite values appeared during time stepping.
class BlowUp : public Error {
 public:
  BlowUp(double time, const std::string& what)
      : Error(what + " (t = " + std::to_string(time) + ")"), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// The Duhamel fixed-point iteration stopped contracting.
class PanelTooLong : public Error {
 public:
  PanelTooLong(double panel, const std::string& what)
      : Error(what), panel_(panel) {}
  double panel() const noexcept { return panel_; }

 private:
  double panel_;
};

/// An iterative eigenvalue estimate did not converge.
class IterationError : public Error {
 public:
  IterationError(double last_estimate, const std::string& what)
      : Error(what), last_estimate_(last_estimate) {}
  double last_estimate() const noexcept { return last_estimate_; }

 private:
  double last_estimate_;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class InsufficientResolution : public Error {
 public:
  using Error::Error;
};

/// A ratio or normalised statistic has a zero denominator.
class UndefinedStatistic : public Error {
 public:
  using Error::Error;
};

}  // namespace dkdv
