#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ltci {

// Base for every error raised by the library. Callers that only care about
// "something in ltci failed" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the domain of a kinematic or numeric law
// (target at the radar origin, negative radicand, bad RadarParams).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A target trajectory leaves the synthesis window at a given pulse.
class WindowError : public Error {
 public:
  WindowError(std::size_t pulse, double range, double lo, double hi);
  std::size_t pulse() const noexcept { return pulse_; }

 private:
  std::size_t pulse_;
};

// Operation called on the wrong kind of object (raw cube fed to an integrator,
// mismatched grid/window, unknown method).
class UsageError : public Error {
 public:
  using Error::Error;
};

// Empty or inverted search-axis bounds.
class BoundsError : public Error {
 public:
  using Error::Error;
};

class UnsupportedOrderError : public Error {
 public:
  using Error::Error;
};

// Scenario/config validation; message is prefixed with a JSON-pointer path.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& what);
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Malformed or incompatible binary/CSV file.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace ltci
