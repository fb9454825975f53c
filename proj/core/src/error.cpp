#include "ltci/error.hpp"

#include <sstream>

namespace ltci {

namespace {

std::string window_message(std::size_t pulse, double range, double lo, double hi) {
  std::ostringstream os;
  os.precision(12);
  os << "window too small: trajectory at pulse " << pulse << " is at " << range
     << " m, outside [" << lo << ", " << hi << "] m";
  return os.str();
}

}  // namespace

WindowError::WindowError(std::size_t pulse, double range, double lo, double hi)
    : Error(window_message(pulse, range, lo, hi)), pulse_(pulse) {}

ConfigError::ConfigError(const std::string& path, const std::string& what)
    : Error("config " + (path.empty() ? std::string("/") : path) + ": " + what), path_(path) {}

}  // namespace ltci
