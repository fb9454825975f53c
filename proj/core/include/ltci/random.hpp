#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace ltci {

// splitmix64 finalizer; used to derive independent stream seeds by counter.
std::uint64_t mix64(std::uint64_t x);

// Seed for (master, stream, index). Distinct triples give statistically
// independent generators; the mapping is fixed across runs and platforms.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

// Circularly-symmetric complex Gaussian source with E|z|^2 = variance.
class ComplexGaussian {
 public:
  explicit ComplexGaussian(std::uint64_t seed, double variance = 1.0);
  std::complex<double> operator()();

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace ltci
