#pragma once

// Detection-probability experiments. Each trial draws one noise cube that
// every method integrates; because the integrators are linear, the map at
// amplitude A is A * (noise-free signal map) + (noise map), so one noise map
// per trial and method serves the whole SNR sweep (common random numbers).

#include <cstdint>
#include <string>
#include <vector>

#include "ltci/detection.hpp"
#include "ltci/echo.hpp"

namespace ltci {

struct MethodSetup {
  MethodTag tag;
  SearchGrid grid;  // ignored for MTD
};

struct PdScenario {
  RadarParams radar;
  RangeTriple target;
  RangeWindow window;
  std::vector<MethodSetup> methods;
  std::vector<double> snr_db;  // SNR after pulse compression
  // When positive, each method sweeps its own axis of centre +- bracket_db in
  // snr_step_db steps instead of snr_db. The centre is the method's transition
  // SNR, 20 log10(threshold / noise-free peak), rounded to the step.
  double bracket_db = 0.0;
  double snr_step_db = 1.0;
  std::size_t trials = 200;
  double pfa = 1e-4;
  std::uint64_t seed = 1;
  std::size_t tolerance_cells = 1;
  std::size_t threads = 0;
};

struct PdCurve {
  MethodTag method;
  std::vector<double> snr_db;
  std::vector<double> pd;
  std::size_t trials = 0;
  double pfa = 0.0;
  double threshold = 0.0;          // noise-only (1 - pfa) magnitude quantile
  CellIndex reference_cell{};      // noise-free peak; detections are counted within tolerance of it
  std::vector<double> reference_coords;
  double noise_free_peak = 0.0;    // |G| at reference for a unit-amplitude target
  std::size_t calibration_maps = 0;
};

// Throws UsageError on trials == 0, empty method list or empty SNR axis.
std::vector<PdCurve> monte_carlo_pd(const PdScenario& s);

// Interpolated SNR where the curve first reaches `pd`; NaN if it never does.
double snr_at_pd(const PdCurve& c, double pd);

// Linearly spaced SNR axis lo, lo + step, ..., <= hi.
std::vector<double> snr_axis(double lo, double hi, double step);

}  // namespace ltci
