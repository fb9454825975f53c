#include "ltci/random.hpp"

#include <cmath>

namespace ltci {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  return mix64(mix64(mix64(master) ^ stream) ^ index);
}

ComplexGaussian::ComplexGaussian(std::uint64_t seed, double variance)
    : engine_(seed), normal_(0.0, std::sqrt(variance / 2.0)) {}

std::complex<double> ComplexGaussian::operator()() {
  const double re = normal_(engine_);
  const double im = normal_(engine_);
  return {re, im};
}

}  // namespace ltci
