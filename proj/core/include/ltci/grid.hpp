#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "ltci/scene.hpp"

namespace ltci {

enum class AxisKind : std::uint8_t {
  range = 1,            // m
  radial_velocity = 2,  // m/s
  speed = 3,            // m/s
  acceleration = 4,     // m/s^2
  jerk = 5,             // m/s^3
};

std::string_view axis_name(AxisKind k);
// Accepts the names returned by axis_name plus the short forms r, rdot, v, a, jerk.
std::optional<AxisKind> parse_axis_name(std::string_view s);

// Uniform, strictly increasing search axis.
struct Axis {
  AxisKind kind = AxisKind::range;
  double start = 0.0;
  double step = 1.0;
  std::size_t count = 1;

  double at(std::size_t k) const { return start + step * static_cast<double>(k); }
  double back() const { return at(count - 1); }
  // Nearest index to x, or nullopt when x lies more than half a step outside the axis.
  std::optional<std::size_t> nearest(double x) const;
  bool operator==(const Axis&) const = default;
};

// Points min, min + step, ... <= max. max == min gives a single point.
// Throws BoundsError when max < min or step <= 0.
Axis make_axis(AxisKind kind, double min, double max, double step);
// 2 * half_cells + 1 points centred on `center`.
Axis centered_axis(AxisKind kind, double center, double step, std::size_t half_cells);

inline constexpr std::size_t kMaxRank = 4;
using CellIndex = std::array<std::size_t, kMaxRank>;

// Cartesian product of axes, last axis varying fastest in flat indexing.
class SearchGrid {
 public:
  SearchGrid() = default;
  explicit SearchGrid(std::vector<Axis> axes);

  std::size_t rank() const { return axes_.size(); }
  std::size_t size() const { return size_; }
  const std::vector<Axis>& axes() const { return axes_; }
  const Axis& axis(std::size_t d) const { return axes_[d]; }
  // Index of the first axis of this kind, if any.
  std::optional<std::size_t> find(AxisKind k) const;

  std::size_t flat(const CellIndex& idx) const;
  CellIndex unflat(std::size_t flat) const;
  // Axis values at a cell, one per axis.
  std::vector<double> coords(const CellIndex& idx) const;

  bool operator==(const SearchGrid&) const = default;

 private:
  std::vector<Axis> axes_;
  std::size_t size_ = 0;
};

// Resolution-matched spacings. Range: c/(2B). Radial velocity and speed:
// lambda/(2T). Polynomial baselines: lambda/(2T^2) * 2! and lambda/(2T^3) * 3!.
double range_spacing(const RadarParams& p);
double radial_velocity_spacing(const RadarParams& p);
double speed_spacing(const RadarParams& p);
double acceleration_spacing(const RadarParams& p);
double jerk_spacing(const RadarParams& p);

struct Interval {
  double min;
  double max;
};

struct SearchBounds {
  Interval range;
  Interval radial_velocity;
  Interval speed;
};

// (range, radial velocity, speed) grid at the matched spacings divided by
// `oversample`. Throws BoundsError on r_min <= 0, v_min < 0, inverted bounds
// or oversample < 1.
SearchGrid build_search_grid(const RadarParams& p, const SearchBounds& b, double oversample = 1.0);

struct PolyBounds {
  Interval range;
  Interval radial_velocity;
  std::optional<Interval> acceleration;  // required for order >= 2
  std::optional<Interval> jerk;          // required for order 3
};

// (range, radial velocity[, acceleration[, jerk]]) grid for a polynomial baseline.
SearchGrid build_poly_grid(const RadarParams& p, const PolyBounds& b, int order, double oversample = 1.0);

// Taylor-equivalent polynomial parameters (r0, rdot0, 2 c2, 6 c3) of a CCV
// triple, i.e. where a polynomial search centred on the truth should sit.
std::array<double, 4> polynomial_equivalent(const RangeTriple& k);

}  // namespace ltci
