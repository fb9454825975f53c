#include "ltci/cube.hpp"

#include <cmath>

#include "ltci/error.hpp"

namespace ltci {

DataCube::DataCube(std::size_t pulses, RangeAxis range, double prf, CubeDomain domain)
    : pulses_(pulses), range_(range), prf_(prf), domain_(domain), samples_(pulses * range.count) {
  if (pulses == 0 || range.count == 0) throw UsageError("DataCube: need at least one pulse and one bin");
  if (!(range.step > 0.0)) throw UsageError("DataCube: range step must be positive");
  if (!(prf > 0.0)) throw UsageError("DataCube: prf must be positive");
}

std::int64_t DataCube::nearest_bin(double r) const {
  return static_cast<std::int64_t>(std::round((r - range_.start) / range_.step));
}

DataCube& DataCube::operator+=(const DataCube& other) {
  if (pulses_ != other.pulses_ || !(range_ == other.range_) || domain_ != other.domain_) {
    throw UsageError("DataCube: shape or domain mismatch in +=");
  }
  for (std::size_t k = 0; k < samples_.size(); ++k) samples_[k] += other.samples_[k];
  return *this;
}

DataCube& DataCube::operator*=(double scale) {
  for (auto& s : samples_) s *= scale;
  return *this;
}

}  // namespace ltci
