#include "ltci/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ltci/error.hpp"

namespace ltci {

std::string_view axis_name(AxisKind k) {
  switch (k) {
    case AxisKind::range: return "range";
    case AxisKind::radial_velocity: return "radial_velocity";
    case AxisKind::speed: return "speed";
    case AxisKind::acceleration: return "acceleration";
    case AxisKind::jerk: return "jerk";
  }
  return "unknown";
}

std::optional<AxisKind> parse_axis_name(std::string_view s) {
  if (s == "range" || s == "r") return AxisKind::range;
  if (s == "radial_velocity" || s == "rdot") return AxisKind::radial_velocity;
  if (s == "speed" || s == "v") return AxisKind::speed;
  if (s == "acceleration" || s == "a") return AxisKind::acceleration;
  if (s == "jerk") return AxisKind::jerk;
  return std::nullopt;
}

std::optional<std::size_t> Axis::nearest(double x) const {
  const double u = (x - start) / step;
  if (u < -0.5 || u > static_cast<double>(count) - 0.5) return std::nullopt;
  const auto k = static_cast<std::int64_t>(std::round(u));
  return static_cast<std::size_t>(std::clamp<std::int64_t>(k, 0, static_cast<std::int64_t>(count) - 1));
}

Axis make_axis(AxisKind kind, double min, double max, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw BoundsError("axis step must be positive");
  if (!(max >= min)) {
    throw BoundsError(std::string("empty ") + std::string(axis_name(kind)) + " axis: max < min");
  }
  const auto count = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
  return {kind, min, step, count};
}

Axis centered_axis(AxisKind kind, double center, double step, std::size_t half_cells) {
  if (!(step > 0.0)) throw BoundsError("axis step must be positive");
  return {kind, center - step * static_cast<double>(half_cells), step, 2 * half_cells + 1};
}

SearchGrid::SearchGrid(std::vector<Axis> axes) : axes_(std::move(axes)) {
  if (axes_.empty() || axes_.size() > kMaxRank) throw UsageError("SearchGrid: rank must be 1..4");
  size_ = 1;
  for (const auto& a : axes_) {
    if (a.count == 0 || !(a.step > 0.0)) throw BoundsError("SearchGrid: axis must be non-empty and increasing");
    size_ *= a.count;
  }
}

std::optional<std::size_t> SearchGrid::find(AxisKind k) const {
  for (std::size_t d = 0; d < axes_.size(); ++d) {
    if (axes_[d].kind == k) return d;
  }
  return std::nullopt;
}

std::size_t SearchGrid::flat(const CellIndex& idx) const {
  std::size_t f = 0;
  for (std::size_t d = 0; d < axes_.size(); ++d) f = f * axes_[d].count + idx[d];
  return f;
}

CellIndex SearchGrid::unflat(std::size_t f) const {
  CellIndex idx{};
  for (std::size_t d = axes_.size(); d-- > 0;) {
    idx[d] = f % axes_[d].count;
    f /= axes_[d].count;
  }
  return idx;
}

std::vector<double> SearchGrid::coords(const CellIndex& idx) const {
  std::vector<double> c(axes_.size());
  for (std::size_t d = 0; d < axes_.size(); ++d) c[d] = axes_[d].at(idx[d]);
  return c;
}

double range_spacing(const RadarParams& p) { return kSpeedOfLight / (2.0 * p.bandwidth); }
double radial_velocity_spacing(const RadarParams& p) { return p.wavelength() / (2.0 * p.cpi()); }
double speed_spacing(const RadarParams& p) { return p.wavelength() / (2.0 * p.cpi()); }
double acceleration_spacing(const RadarParams& p) {
  const double T = p.cpi();
  return p.wavelength() / (2.0 * T * T) * 2.0;
}
double jerk_spacing(const RadarParams& p) {
  const double T = p.cpi();
  return p.wavelength() / (2.0 * T * T * T) * 6.0;
}

namespace {

void check_oversample(double os) {
  if (!(os >= 1.0) || !std::isfinite(os)) throw BoundsError("oversample factor must be >= 1");
}

}  // namespace

SearchGrid build_search_grid(const RadarParams& p, const SearchBounds& b, double oversample) {
  check_oversample(oversample);
  if (!(b.range.min > 0.0)) throw BoundsError("range search must start above 0 m");
  if (!(b.speed.min >= 0.0)) throw BoundsError("speed search must start at or above 0 m/s");
  return SearchGrid({
      make_axis(AxisKind::range, b.range.min, b.range.max, range_spacing(p) / oversample),
      make_axis(AxisKind::radial_velocity, b.radial_velocity.min, b.radial_velocity.max,
                radial_velocity_spacing(p) / oversample),
      make_axis(AxisKind::speed, b.speed.min, b.speed.max, speed_spacing(p) / oversample),
  });
}

SearchGrid build_poly_grid(const RadarParams& p, const PolyBounds& b, int order, double oversample) {
  check_oversample(oversample);
  if (order < 1 || order > 3) throw UnsupportedOrderError("polynomial order must be 1, 2 or 3");
  if (!(b.range.min > 0.0)) throw BoundsError("range search must start above 0 m");
  std::vector<Axis> axes{
      make_axis(AxisKind::range, b.range.min, b.range.max, range_spacing(p) / oversample),
      make_axis(AxisKind::radial_velocity, b.radial_velocity.min, b.radial_velocity.max,
                radial_velocity_spacing(p) / oversample),
  };
  if (order >= 2) {
    if (!b.acceleration) throw BoundsError("order >= 2 needs acceleration bounds");
    axes.push_back(make_axis(AxisKind::acceleration, b.acceleration->min, b.acceleration->max,
                             acceleration_spacing(p) / oversample));
  }
  if (order >= 3) {
    if (!b.jerk) throw BoundsError("order 3 needs jerk bounds");
    axes.push_back(make_axis(AxisKind::jerk, b.jerk->min, b.jerk->max, jerk_spacing(p) / oversample));
  }
  return SearchGrid(std::move(axes));
}

std::array<double, 4> polynomial_equivalent(const RangeTriple& k) {
  const TaylorCoeffs c = taylor_coeffs(k, 3);
  return {c[0], c[1], 2.0 * c[2], 6.0 * c[3]};
}

}  // namespace ltci
