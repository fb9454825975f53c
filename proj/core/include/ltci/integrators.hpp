#pragma once

// Coherent-integration transforms over a compressed DataCube:
//   arem_grft  - square-root range law over (range, radial velocity, speed)
//   poly_grft  - polynomial range law of order 1 (RFT), 2 or 3
//   mtd        - per-range-bin slow-time DFT, no migration handling
//
// Every searched cell extracts one sample per pulse at the nearest range bin
// (round half away from zero) along its trajectory, compensates the phase
// and sums. Cells whose trajectory leaves the cube window are marked
// outside; AREM cells with speed < |radial velocity| are pruned.

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ltci/cube.hpp"
#include "ltci/grid.hpp"
#include "ltci/scene.hpp"

namespace ltci {

enum class Method : std::uint8_t { arem = 1, poly = 2, mtd = 3 };

struct MethodTag {
  Method method = Method::arem;
  int order = 0;  // polynomial order for Method::poly, 0 otherwise

  static MethodTag arem() { return {Method::arem, 0}; }
  static MethodTag poly(int order) { return {Method::poly, order}; }
  static MethodTag mtd() { return {Method::mtd, 0}; }

  // "arem", "poly1".."poly3", "mtd"
  std::string name() const;
  static MethodTag parse(const std::string& s);  // throws UsageError
  bool operator==(const MethodTag&) const = default;
};

enum class CellState : std::uint8_t { valid = 0, pruned = 1, outside = 2 };

class IntegrationMap {
 public:
  IntegrationMap() = default;
  IntegrationMap(SearchGrid grid, MethodTag tag);

  const SearchGrid& grid() const { return grid_; }
  MethodTag tag() const { return tag_; }
  std::size_t size() const { return values_.size(); }

  // Invalid cells hold a quiet NaN value; never read them as data.
  std::span<const cdouble> values() const { return values_; }
  std::span<cdouble> values() { return values_; }
  std::span<const CellState> states() const { return states_; }
  std::span<CellState> states() { return states_; }

  bool valid(std::size_t flat) const { return states_[flat] == CellState::valid; }
  double magnitude(std::size_t flat) const { return std::abs(values_[flat]); }
  void set(std::size_t flat, cdouble v) {
    values_[flat] = v;
    states_[flat] = CellState::valid;
  }
  void invalidate(std::size_t flat, CellState why);

  std::size_t count(CellState s) const;
  // Flat index of the largest valid magnitude. Throws UsageError if no cell is valid.
  std::size_t peak() const;

  std::uint64_t config_hash() const { return config_hash_; }
  void set_config_hash(std::uint64_t h) { config_hash_ = h; }

  // NaN payloads compare unequal; equality here is bitwise on values.
  bool bitwise_equal(const IntegrationMap& other) const;

 private:
  SearchGrid grid_;
  MethodTag tag_;
  std::vector<cdouble> values_;
  std::vector<CellState> states_;
  std::uint64_t config_hash_ = 0;
};

inline const cdouble kInvalidValue{std::numeric_limits<double>::quiet_NaN(),
                                   std::numeric_limits<double>::quiet_NaN()};

struct IntegrateOptions {
  std::size_t threads = 0;  // 0 = default_thread_count()
};

IntegrationMap arem_grft(const DataCube& cube, const SearchGrid& grid, const RadarParams& p,
                         const IntegrateOptions& opt = {});

IntegrationMap poly_grft(const DataCube& cube, const SearchGrid& grid, const RadarParams& p, int order,
                         const IntegrateOptions& opt = {});

// Range x radial-velocity map; velocity axis lambda * f_d / 2 centred on zero.
IntegrationMap mtd(const DataCube& cube, const RadarParams& p, const IntegrateOptions& opt = {});

// Runs the integrator named by `tag`; `grid` is ignored for MTD.
IntegrationMap integrate(const DataCube& cube, const SearchGrid& grid, const RadarParams& p, MethodTag tag,
                         const IntegrateOptions& opt = {});

struct TrajectoryPoint {
  std::size_t pulse;
  std::int64_t bin;  // may fall outside [0, bins) for cells marked outside
  double range;      // m, searched range at this pulse
};

// The extraction path arem_grft / poly_grft use for a cell.
std::vector<TrajectoryPoint> trajectory_of_cell(const SearchGrid& grid, MethodTag tag, const CellIndex& cell,
                                                const RadarParams& p, const RangeAxis& range_axis);

// exp(j 2 pi cycles) as evaluated inside the integrators.
cdouble unit_phasor_cycles(double cycles);

// Nearest-bin rule shared by every integrator.
inline std::int64_t extraction_bin(double r, double start, double inv_step) {
  const double u = (r - start) * inv_step;
  return u >= 0.0 ? static_cast<std::int64_t>(u + 0.5) : -static_cast<std::int64_t>(-u + 0.5);
}
inline std::int64_t extraction_bin(double r, const RangeAxis& axis) {
  return extraction_bin(r, axis.start, 1.0 / axis.step);
}

}  // namespace ltci
