#pragma once

// JSON scenario files. The schema is documented in docs/config.md; every
// object rejects unknown keys and errors carry a JSON-pointer path.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ltci/detection.hpp"
#include "ltci/echo.hpp"
#include "ltci/grid.hpp"
#include "ltci/integrators.hpp"
#include "ltci/montecarlo.hpp"

namespace ltci {

// One search axis: either explicit [min, max] or centre +- half_cells steps.
struct AxisSpec {
  std::optional<Interval> bounds;
  double center = 0.0;
  std::size_t half_cells = 0;

  Axis resolve(AxisKind kind, double step) const;
};

struct GridSpec {
  double oversample = 1.0;
  std::optional<AxisSpec> range;
  std::optional<AxisSpec> radial_velocity;
  std::optional<AxisSpec> speed;
  std::optional<AxisSpec> acceleration;
  std::optional<AxisSpec> jerk;
};

struct MethodSpec {
  MethodTag tag;
  GridSpec axes;  // overrides of the scenario-wide grid, axis by axis
};

struct MonteCarloSpec {
  std::size_t trials = 200;
  std::vector<double> snr_db;  // empty when bracket_db is set
  double bracket_db = 0.0;     // > 0: per-method sweep around each transition
  double step_db = 1.0;
  std::uint64_t seed = 1;
  std::size_t tolerance_cells = 1;
  std::size_t target = 0;  // index into targets; its SNR field is ignored
};

struct ScenarioConfig {
  RadarParams radar;
  std::vector<CcvTarget> targets;
  RangeWindow window{};
  NoiseSpec noise{};
  AmplitudeScale amplitude_scale = AmplitudeScale::unit_noise;
  int envelope_nulls = 4;
  GridSpec grid;
  std::vector<MethodSpec> methods;
  double pfa = 1e-4;
  ThresholdMode threshold = ThresholdMode::empirical;
  std::size_t calibration_maps = 0;  // 0 = enough maps for 20 / pfa cells
  std::optional<MonteCarloSpec> monte_carlo;

  std::uint64_t hash = 0;  // of the canonical JSON text

  SynthOptions synth_options(std::size_t threads = 0) const;
  const MethodSpec& method(MethodTag tag) const;  // throws UsageError if not listed
  // Scenario grid merged with the method's overrides. MTD has no search grid;
  // an empty grid is returned.
  SearchGrid grid_for(MethodTag tag) const;
  PdScenario pd_scenario(std::size_t threads = 0) const;  // throws ConfigError without a monte_carlo block
};

// Throws ConfigError ("config <path>: ..."); syntax errors report line:column.
ScenarioConfig parse_config(std::string_view json_text);
ScenarioConfig load_config(const std::filesystem::path& path);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace ltci
