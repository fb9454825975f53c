#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ltci {

using cdouble = std::complex<double>;

// Uniform range axis: bin n sits at start + n * step.
struct RangeAxis {
  double start = 0.0;  // m
  double step = 1.0;   // m
  std::size_t count = 0;

  double at(std::size_t n) const { return start + step * static_cast<double>(n); }
  double end() const { return count == 0 ? start : at(count - 1); }
  bool operator==(const RangeAxis&) const = default;
};

enum class CubeDomain : std::uint8_t { raw = 1, compressed = 2 };

// Slow-time x range record, pulses in rows. Compressed cubes carry the
// normalized compression gain: a unit on-bin scatterer peaks at magnitude 1.
class DataCube {
 public:
  DataCube() = default;
  DataCube(std::size_t pulses, RangeAxis range, double prf, CubeDomain domain);

  std::size_t pulses() const { return pulses_; }
  std::size_t bins() const { return range_.count; }
  const RangeAxis& range_axis() const { return range_; }
  double range_axis_start() const { return range_.start; }
  double range_bin() const { return range_.step; }
  double prf() const { return prf_; }
  CubeDomain domain() const { return domain_; }

  std::uint64_t config_hash() const { return config_hash_; }
  void set_config_hash(std::uint64_t h) { config_hash_ = h; }

  cdouble& at(std::size_t m, std::size_t n) { return samples_[m * range_.count + n]; }
  const cdouble& at(std::size_t m, std::size_t n) const { return samples_[m * range_.count + n]; }

  std::span<cdouble> row(std::size_t m) { return {samples_.data() + m * range_.count, range_.count}; }
  std::span<const cdouble> row(std::size_t m) const {
    return {samples_.data() + m * range_.count, range_.count};
  }

  std::span<cdouble> samples() { return samples_; }
  std::span<const cdouble> samples() const { return samples_; }

  // Bin index nearest to range r, rounding half away from zero.
  std::int64_t nearest_bin(double r) const;

  DataCube& operator+=(const DataCube& other);
  DataCube& operator*=(double scale);

  bool operator==(const DataCube&) const = default;

 private:
  std::size_t pulses_ = 0;
  RangeAxis range_{};
  double prf_ = 1.0;
  CubeDomain domain_ = CubeDomain::compressed;
  std::uint64_t config_hash_ = 0;
  std::vector<cdouble> samples_;
};

}  // namespace ltci
