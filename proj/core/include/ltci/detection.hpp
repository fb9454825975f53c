#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ltci/integrators.hpp"

namespace ltci {

enum class ThresholdMode : std::uint8_t { empirical = 1, cell_averaging = 2 };

struct Threshold {
  ThresholdMode mode = ThresholdMode::empirical;
  double pfa = 1e-4;
  double value = 0.0;               // global magnitude threshold (empirical mode)
  std::vector<double> per_cell;     // magnitude threshold per flat cell (cell-averaging mode)
  std::vector<std::uint8_t> shrunk;  // 1 where the reference window had to shrink at an edge

  double at(std::size_t flat) const { return per_cell.empty() ? value : per_cell[flat]; }
  static Threshold fixed(double eta) { return {ThresholdMode::empirical, 0.0, eta, {}, {}}; }
};

// (1 - pfa) quantile (linear interpolation between order statistics) of the
// magnitudes. Requires pfa in (0, 0.5] and at least 10 / pfa samples.
Threshold calibrate_empirical(std::vector<double> magnitudes, double pfa);
// Same over every valid cell of a noise-only ensemble (or a single map).
Threshold calibrate_empirical(std::span<const IntegrationMap> noise_maps, double pfa);

struct CfarWindow {
  std::size_t reference = 16;  // per side
  std::size_t guard = 2;       // per side
};

// alpha such that a cell-averaging detector over n exponential-power reference
// cells has false-alarm probability pfa: n (pfa^(-1/n) - 1).
double ca_cfar_alpha(std::size_t n, double pfa);

// Cell-averaging CFAR along the range axis (axis 0). Per cell the threshold
// is sqrt(alpha * mean |ref|^2) over the valid reference cells. Near edges
// and invalid cells the window shrinks to whatever is available, alpha is
// recomputed for that count, and the cell is flagged in `shrunk`.
Threshold calibrate_ca_cfar(const IntegrationMap& map, double pfa, const CfarWindow& w = {});

struct Detection {
  CellIndex cell{};
  std::vector<double> coords;  // axis values at `cell`
  double amplitude = 0.0;
  double threshold_at_cell = 0.0;
  std::size_t component_size = 0;
  MethodTag method{};

  // Convenience accessors for AREM maps (range, radial velocity, speed).
  double r0() const { return coords.at(0); }
  double rdot0() const { return coords.at(1); }
  double speed() const { return coords.at(2); }
};

// Valid cells with |G| > threshold, merged into connected components
// (cells touching along any axis or diagonal). One detection per component at
// its magnitude maximum, sorted by amplitude descending.
std::vector<Detection> detect(const IntegrationMap& map, const Threshold& threshold);

// True when some above-threshold component has its magnitude maximum within
// `tolerance` cells (every axis) of `reference`. Same result as scanning
// detect(), but only components reachable from the neighbourhood are visited.
bool detected_near(const SearchGrid& grid, std::span<const double> magnitudes,
                   std::span<const CellState> states, double threshold, const CellIndex& reference,
                   std::size_t tolerance = 1);
// Same, with magnitudes computed on demand by `magnitude(flat)`.
bool detected_near(const SearchGrid& grid, const std::function<double(std::size_t)>& magnitude,
                   std::span<const CellState> states, double threshold, const CellIndex& reference,
                   std::size_t tolerance = 1);

// Chebyshev distance in cells.
std::size_t cell_distance(const CellIndex& a, const CellIndex& b, std::size_t rank);

struct Track {
  MethodTag method{};
  std::vector<double> params;  // (r0, rdot0, v) for AREM; polynomial terms otherwise
  std::vector<double> times;   // s, pulse times
  std::vector<double> ranges;  // m, estimated range at each pulse

  double range_at(double t) const;
};

// Trajectory implied by a detection's parameters: the square-root law for
// AREM, the searched polynomial for poly_grft, constant-velocity for MTD.
Track estimate(const Detection& det, const RadarParams& p);

}  // namespace ltci
