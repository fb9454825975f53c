#include "ltci/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "ltci/error.hpp"

namespace ltci {

using nlohmann::json;

namespace {

constexpr std::size_t kDefaultHalfCells = 20;
constexpr double kWindowMarginBins = 64.0;

std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string child(const std::string& path, std::size_t i) { return path + "/" + std::to_string(i); }

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "/" : path, "expected an object");
}

void check_keys(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
  require_object(j, path);
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(child(path, key), "unknown key");
  }
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
  return v;
}

double number_or(const json& obj, const std::string& path, const char* key, double fallback) {
  const auto it = obj.find(key);
  return it == obj.end() ? fallback : get_number(*it, child(path, key));
}

double required_number(const json& obj, const std::string& path, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(child(path, key), "missing required key");
  return get_number(*it, child(path, key));
}

std::uint64_t get_unsigned(const json& j, const std::string& path) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0))
    throw ConfigError(path, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

std::uint64_t unsigned_or(const json& obj, const std::string& path, const char* key, std::uint64_t fallback) {
  const auto it = obj.find(key);
  return it == obj.end() ? fallback : get_unsigned(*it, child(path, key));
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

RadarParams parse_radar(const json& j, const std::string& path) {
  check_keys(j, path, {"carrier_frequency_hz", "pulse_duration_s", "bandwidth_hz", "sample_rate_hz", "prf_hz",
                       "pulses"});
  RadarParams p;
  p.carrier_frequency = number_or(j, path, "carrier_frequency_hz", p.carrier_frequency);
  p.pulse_duration = number_or(j, path, "pulse_duration_s", p.pulse_duration);
  p.bandwidth = number_or(j, path, "bandwidth_hz", p.bandwidth);
  p.sample_rate = number_or(j, path, "sample_rate_hz", p.sample_rate);
  p.prf = number_or(j, path, "prf_hz", p.prf);
  p.pulse_count = unsigned_or(j, path, "pulses", p.pulse_count);
  try {
    p.validate();
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
  return p;
}

CcvTarget parse_target(const json& j, const std::string& path) {
  check_keys(j, path, {"r0_m", "rdot0_mps", "speed_mps", "x0_m", "y0_m", "vx_mps", "vy_mps", "snr_db", "phase_rad"});
  const bool triple = j.contains("r0_m") || j.contains("rdot0_mps") || j.contains("speed_mps");
  const bool cart = j.contains("x0_m") || j.contains("y0_m") || j.contains("vx_mps") || j.contains("vy_mps");
  if (triple == cart) throw ConfigError(path, "give either r0_m/rdot0_mps/speed_mps or x0_m/y0_m/vx_mps/vy_mps");
  const double snr = number_or(j, path, "snr_db", 0.0);
  const double phase = number_or(j, path, "phase_rad", 0.0);
  try {
    CcvTarget t;
    if (triple) {
      const RangeTriple k{required_number(j, path, "r0_m"), required_number(j, path, "rdot0_mps"),
                          required_number(j, path, "speed_mps")};
      t = CcvTarget::from_triple(k, snr, phase);
    } else {
      const CartesianState s{required_number(j, path, "x0_m"), required_number(j, path, "y0_m"),
                             required_number(j, path, "vx_mps"), required_number(j, path, "vy_mps")};
      t = CcvTarget::from_cartesian(s, snr, phase);
    }
    t.validate();
    return t;
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
}

AxisSpec parse_axis(const json& j, const std::string& path) {
  AxisSpec a;
  a.half_cells = kDefaultHalfCells;
  if (j.is_array()) {
    if (j.size() != 2) throw ConfigError(path, "expected [min, max]");
    a.bounds = Interval{get_number(j[0], child(path, 0)), get_number(j[1], child(path, 1))};
    if (a.bounds->max < a.bounds->min) throw ConfigError(path, "max < min");
    return a;
  }
  check_keys(j, path, {"min", "max", "center", "half_cells"});
  const bool has_bounds = j.contains("min") || j.contains("max");
  const bool has_center = j.contains("center") || j.contains("half_cells");
  if (has_bounds && has_center) throw ConfigError(path, "give either min/max or center/half_cells");
  if (has_bounds) {
    a.bounds = Interval{required_number(j, path, "min"), required_number(j, path, "max")};
    if (a.bounds->max < a.bounds->min) throw ConfigError(path, "max < min");
  } else {
    a.center = number_or(j, path, "center", std::numeric_limits<double>::quiet_NaN());
    a.half_cells = unsigned_or(j, path, "half_cells", kDefaultHalfCells);
  }
  return a;
}

void parse_grid_axes(const json& j, const std::string& path, GridSpec& g) {
  const std::pair<const char*, std::optional<AxisSpec> GridSpec::*> fields[] = {
      {"range", &GridSpec::range},
      {"radial_velocity", &GridSpec::radial_velocity},
      {"speed", &GridSpec::speed},
      {"acceleration", &GridSpec::acceleration},
      {"jerk", &GridSpec::jerk},
  };
  for (const auto& [key, member] : fields) {
    const auto it = j.find(key);
    if (it != j.end()) g.*member = parse_axis(*it, child(path, key));
  }
}

GridSpec parse_grid(const json& j, const std::string& path) {
  check_keys(j, path, {"oversample", "range", "radial_velocity", "speed", "acceleration", "jerk"});
  GridSpec g;
  g.oversample = number_or(j, path, "oversample", 1.0);
  if (!(g.oversample >= 1.0)) throw ConfigError(child(path, "oversample"), "must be >= 1");
  parse_grid_axes(j, path, g);
  return g;
}

MethodSpec parse_method(const json& j, const std::string& path) {
  MethodSpec m;
  std::string name;
  if (j.is_string()) {
    name = j.get<std::string>();
  } else {
    check_keys(j, path, {"name", "range", "radial_velocity", "speed", "acceleration", "jerk"});
    const auto it = j.find("name");
    if (it == j.end()) throw ConfigError(child(path, "name"), "missing required key");
    name = get_string(*it, child(path, "name"));
    parse_grid_axes(j, path, m.axes);
  }
  try {
    m.tag = MethodTag::parse(name);
  } catch (const UsageError& e) {
    throw ConfigError(j.is_string() ? path : child(path, "name"), e.what());
  }
  return m;
}

void parse_snr_axis(const json& j, const std::string& path, MonteCarloSpec& mc) {
  std::vector<double>& out = mc.snr_db;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], child(path, i)));
  } else if (j.is_object() && j.contains("bracket")) {
    check_keys(j, path, {"bracket", "step"});
    mc.bracket_db = required_number(j, path, "bracket");
    mc.step_db = number_or(j, path, "step", 1.0);
    if (!(mc.bracket_db > 0.0)) throw ConfigError(child(path, "bracket"), "must be positive");
    if (!(mc.step_db > 0.0)) throw ConfigError(child(path, "step"), "must be positive");
    return;
  } else {
    check_keys(j, path, {"lo", "hi", "step"});
    const double lo = required_number(j, path, "lo");
    const double hi = required_number(j, path, "hi");
    const double step = number_or(j, path, "step", 1.0);
    if (!(step > 0.0)) throw ConfigError(child(path, "step"), "must be positive");
    if (hi < lo) throw ConfigError(path, "hi < lo");
    out = snr_axis(lo, hi, step);
  }
  if (out.empty()) throw ConfigError(path, "empty SNR axis");
}

MonteCarloSpec parse_monte_carlo(const json& j, const std::string& path, std::size_t targets) {
  check_keys(j, path, {"trials", "snr_db", "seed", "tolerance_cells", "target"});
  MonteCarloSpec mc;
  mc.trials = unsigned_or(j, path, "trials", mc.trials);
  if (mc.trials == 0) throw ConfigError(child(path, "trials"), "must be >= 1");
  const auto it = j.find("snr_db");
  if (it == j.end()) throw ConfigError(child(path, "snr_db"), "missing required key");
  parse_snr_axis(*it, child(path, "snr_db"), mc);
  mc.seed = unsigned_or(j, path, "seed", mc.seed);
  mc.tolerance_cells = unsigned_or(j, path, "tolerance_cells", mc.tolerance_cells);
  mc.target = unsigned_or(j, path, "target", 0);
  if (mc.target >= targets) throw ConfigError(child(path, "target"), "no such target");
  return mc;
}

RangeWindow auto_window(const RadarParams& p, const std::vector<CcvTarget>& targets) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& t : targets) {
    for (std::size_t m = 0; m < p.pulse_count; ++m) {
      const double r = range_at(t.motion, p.pulse_time(m));
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  }
  const double bin = p.range_bin();
  lo = (std::floor(lo / bin) - kWindowMarginBins) * bin;
  hi = lo + (std::ceil((hi - lo) / bin) + kWindowMarginBins) * bin;
  return {lo, hi};
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

Axis AxisSpec::resolve(AxisKind kind, double step) const {
  if (bounds) return make_axis(kind, bounds->min, bounds->max, step);
  return centered_axis(kind, center, step, half_cells);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

ScenarioConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    std::string msg = e.what();
    if (const auto pos = msg.find(": ", msg.find("column")); pos != std::string::npos) msg = msg.substr(pos + 2);
    throw ConfigError("/", "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg);
  }
  check_keys(root, "", {"radar", "targets", "window", "noise", "amplitude_scale", "envelope_nulls", "grid", "methods",
                        "pfa", "threshold", "calibration_maps", "monte_carlo"});

  ScenarioConfig c;
  if (const auto it = root.find("radar"); it != root.end()) c.radar = parse_radar(*it, "/radar");

  const auto targets = root.find("targets");
  if (targets == root.end()) throw ConfigError("/targets", "missing required key");
  if (!targets->is_array() || targets->empty()) throw ConfigError("/targets", "expected a non-empty array");
  for (std::size_t i = 0; i < targets->size(); ++i)
    c.targets.push_back(parse_target((*targets)[i], child("/targets", i)));

  if (const auto it = root.find("window"); it != root.end()) {
    check_keys(*it, "/window", {"lo_m", "hi_m"});
    c.window = {required_number(*it, "/window", "lo_m"), required_number(*it, "/window", "hi_m")};
    try {
      window_axis(c.radar, c.window);
    } catch (const UsageError& e) {
      throw ConfigError("/window", e.what());
    }
  } else {
    c.window = auto_window(c.radar, c.targets);
  }
  try {
    check_window(c.radar, c.targets, c.window);
  } catch (const WindowError& e) {
    throw ConfigError("/window", e.what());
  }

  if (const auto it = root.find("noise"); it != root.end()) {
    check_keys(*it, "/noise", {"enabled", "seed"});
    c.noise.enabled = true;
    if (const auto e = it->find("enabled"); e != it->end()) {
      if (!e->is_boolean()) throw ConfigError("/noise/enabled", "expected true or false");
      c.noise.enabled = e->get<bool>();
    }
    c.noise.seed = unsigned_or(*it, "/noise", "seed", 0);
  }

  if (const auto it = root.find("amplitude_scale"); it != root.end()) {
    const std::string s = get_string(*it, "/amplitude_scale");
    if (s == "unit_noise")
      c.amplitude_scale = AmplitudeScale::unit_noise;
    else if (s == "unit_signal")
      c.amplitude_scale = AmplitudeScale::unit_signal;
    else
      throw ConfigError("/amplitude_scale", "expected \"unit_noise\" or \"unit_signal\"");
  }
  const auto nulls = unsigned_or(root, "", "envelope_nulls", 4);
  if (nulls < 1 || nulls > 1000) throw ConfigError("/envelope_nulls", "must be in [1, 1000]");
  c.envelope_nulls = static_cast<int>(nulls);

  if (const auto it = root.find("grid"); it != root.end()) c.grid = parse_grid(*it, "/grid");

  if (const auto it = root.find("methods"); it != root.end()) {
    if (!it->is_array() || it->empty()) throw ConfigError("/methods", "expected a non-empty array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      MethodSpec m = parse_method((*it)[i], child("/methods", i));
      for (const auto& prev : c.methods)
        if (prev.tag == m.tag) throw ConfigError(child("/methods", i), "method listed twice");
      c.methods.push_back(std::move(m));
    }
  } else {
    c.methods = {{MethodTag::arem(), {}}};
  }

  c.pfa = number_or(root, "", "pfa", c.pfa);
  if (!(c.pfa > 0.0 && c.pfa <= 0.5)) throw ConfigError("/pfa", "must be in (0, 0.5]");
  if (const auto it = root.find("threshold"); it != root.end()) {
    const std::string s = get_string(*it, "/threshold");
    if (s == "empirical")
      c.threshold = ThresholdMode::empirical;
    else if (s == "ca_cfar")
      c.threshold = ThresholdMode::cell_averaging;
    else
      throw ConfigError("/threshold", "expected \"empirical\" or \"ca_cfar\"");
  }
  c.calibration_maps = unsigned_or(root, "", "calibration_maps", 0);

  if (const auto it = root.find("monte_carlo"); it != root.end())
    c.monte_carlo = parse_monte_carlo(*it, "/monte_carlo", c.targets.size());

  // Resolve every method grid now so bad bounds surface as config errors.
  for (std::size_t i = 0; i < c.methods.size(); ++i) {
    try {
      c.grid_for(c.methods[i].tag);
    } catch (const BoundsError& e) {
      throw ConfigError(child("/methods", i), e.what());
    }
  }

  c.hash = fnv1a64(root.dump());
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("/", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

SynthOptions ScenarioConfig::synth_options(std::size_t threads) const {
  return SynthOptions{noise, amplitude_scale, envelope_nulls, threads};
}

const MethodSpec& ScenarioConfig::method(MethodTag tag) const {
  for (const auto& m : methods)
    if (m.tag == tag) return m;
  throw UsageError("method " + tag.name() + " is not listed in the config");
}

SearchGrid ScenarioConfig::grid_for(MethodTag tag) const {
  if (tag.method == Method::mtd) return {};
  const MethodSpec& m = method(tag);
  const RangeTriple& truth = targets.front().motion;

  auto pick = [&](const std::optional<AxisSpec> GridSpec::*member, AxisKind kind, double spacing,
                  double default_center) {
    AxisSpec spec;
    spec.half_cells = kDefaultHalfCells;
    spec.center = default_center;
    if ((m.axes.*member))
      spec = *(m.axes.*member);
    else if (grid.*member)
      spec = *(grid.*member);
    if (!spec.bounds && std::isnan(spec.center)) spec.center = default_center;
    return spec.resolve(kind, spacing / grid.oversample);
  };

  std::vector<Axis> axes;
  if (tag.method == Method::arem) {
    axes.push_back(pick(&GridSpec::range, AxisKind::range, range_spacing(radar), truth.r0));
    axes.push_back(
        pick(&GridSpec::radial_velocity, AxisKind::radial_velocity, radial_velocity_spacing(radar), truth.rdot0));
    axes.push_back(pick(&GridSpec::speed, AxisKind::speed, speed_spacing(radar), truth.speed));
    if (!(axes[0].start > 0.0)) throw BoundsError("range axis must start above 0");
    if (axes[2].start < 0.0) throw BoundsError("speed axis must start at or above 0");
  } else {
    if (tag.order < 1 || tag.order > 3) throw UnsupportedOrderError("polynomial order must be 1..3");
    const auto eq = polynomial_equivalent(truth);
    axes.push_back(pick(&GridSpec::range, AxisKind::range, range_spacing(radar), eq[0]));
    axes.push_back(
        pick(&GridSpec::radial_velocity, AxisKind::radial_velocity, radial_velocity_spacing(radar), eq[1]));
    if (tag.order >= 2)
      axes.push_back(pick(&GridSpec::acceleration, AxisKind::acceleration, acceleration_spacing(radar), eq[2]));
    if (tag.order >= 3) axes.push_back(pick(&GridSpec::jerk, AxisKind::jerk, jerk_spacing(radar), eq[3]));
    if (!(axes[0].start > 0.0)) throw BoundsError("range axis must start above 0");
  }
  return SearchGrid(std::move(axes));
}

PdScenario ScenarioConfig::pd_scenario(std::size_t threads) const {
  if (!monte_carlo) throw ConfigError("/monte_carlo", "missing required key");
  PdScenario s;
  s.radar = radar;
  s.target = targets.at(monte_carlo->target).motion;
  s.window = window;
  for (const auto& m : methods) s.methods.push_back({m.tag, grid_for(m.tag)});
  s.snr_db = monte_carlo->snr_db;
  s.bracket_db = monte_carlo->bracket_db;
  s.snr_step_db = monte_carlo->step_db;
  s.trials = monte_carlo->trials;
  s.pfa = pfa;
  s.seed = monte_carlo->seed;
  s.tolerance_cells = monte_carlo->tolerance_cells;
  s.threads = threads;
  return s;
}

}  // namespace ltci
