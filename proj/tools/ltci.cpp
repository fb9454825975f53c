// Command-line front end: synthesize cubes, integrate them, slice maps,
// detect and run detection-probability sweeps.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ltci/config.hpp"
#include "ltci/detection.hpp"
#include "ltci/echo.hpp"
#include "ltci/error.hpp"
#include "ltci/integrators.hpp"
#include "ltci/io.hpp"
#include "ltci/montecarlo.hpp"
#include "ltci/parallel.hpp"
#include "ltci/random.hpp"

namespace {

using namespace ltci;

constexpr std::uint64_t kDetectCalibrationStream = 0x6465746563ULL;  // "detec"

SampleType parse_precision(const std::string& s) {
  return s == "f64" ? SampleType::complex128 : SampleType::complex64;
}

void require_hash(std::uint64_t file_hash, const ScenarioConfig& cfg, const std::string& what) {
  if (file_hash != cfg.hash) {
    throw UsageError(what + " was produced from a different config (" + format_hash(file_hash) + ", config is " +
                     format_hash(cfg.hash) + ")");
  }
}

std::string cell_text(const SearchGrid& g, const CellIndex& c) {
  std::ostringstream ss;
  ss << '[';
  for (std::size_t d = 0; d < g.rank(); ++d) ss << (d ? " " : "") << c[d];
  ss << "] (";
  const auto coords = g.coords(c);
  for (std::size_t d = 0; d < g.rank(); ++d) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%s=%.6g", d ? ", " : "", std::string(axis_name(g.axis(d).kind)).c_str(),
                  coords[d]);
    ss << buf;
  }
  ss << ')';
  return ss.str();
}

struct Common {
  std::size_t threads = 0;
  std::string precision = "f32";
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--threads", c.threads, "Worker threads (0: $LTCI_THREADS or all cores)");
  app->add_option("--precision", c.precision, "Sample storage in output files")
      ->check(CLI::IsMember({"f32", "f64"}));
}

int run_synth(const std::string& config_path, const std::string& out, bool raw, std::optional<std::uint64_t> seed,
              const Common& common) {
  const ScenarioConfig cfg = load_config(config_path);
  SynthOptions opt = cfg.synth_options(common.threads);
  if (seed) opt.noise = NoiseSpec::seeded(*seed);
  DataCube cube;
  if (raw) {
    cube = pulse_compress(synth_raw(cfg.radar, cfg.targets, cfg.window, opt), cfg.radar, common.threads);
  } else {
    cube = synth_compressed(cfg.radar, cfg.targets, cfg.window, opt);
  }
  cube.set_config_hash(cfg.hash);
  write_cube(out, cube, parse_precision(common.precision));
  std::printf("wrote %s: %zu pulses x %zu bins, range %.1f..%.1f m, noise %s\n", out.c_str(), cube.pulses(),
              cube.bins(), cube.range_axis().start, cube.range_axis().end(),
              opt.noise.enabled ? ("seed " + std::to_string(opt.noise.seed)).c_str() : "off");
  return 0;
}

int run_integrate(const std::string& cube_path, const std::string& config_path, const std::string& method,
                  const std::string& out, const Common& common) {
  const ScenarioConfig cfg = load_config(config_path);
  const DataCube cube = read_cube(cube_path);
  require_hash(cube.config_hash(), cfg, cube_path);
  const MethodTag tag = MethodTag::parse(method);
  const SearchGrid grid = cfg.grid_for(tag);

  const auto t0 = std::chrono::steady_clock::now();
  IntegrationMap map = integrate(cube, grid, cfg.radar, tag, IntegrateOptions{common.threads});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  map.set_config_hash(cfg.hash);
  write_map(out, map, parse_precision(common.precision));

  const std::size_t peak = map.peak();
  const double work = static_cast<double>(map.size()) * static_cast<double>(cube.pulses());
  std::printf("method %s, %zu cells (%zu pruned, %zu outside)\n", tag.name().c_str(), map.size(),
              map.count(CellState::pruned), map.count(CellState::outside));
  std::printf("peak cell %s\n", cell_text(map.grid(), map.grid().unflat(peak)).c_str());
  std::printf("peak magnitude %.4f\n", map.magnitude(peak));
  std::printf("wall time %.3f s, throughput %.4g cells*pulses/s\n", secs, secs > 0 ? work / secs : 0.0);
  return 0;
}

int run_slice(const std::string& map_path, const std::vector<std::string>& fixes, const std::string& out,
              bool db) {
  const IntegrationMap map = read_map(map_path);
  std::vector<AxisFix> parsed;
  for (const auto& f : fixes) parsed.push_back(parse_axis_fix(f));
  const MapSlice s = slice_map(map, parsed);
  write_slice_csv(std::filesystem::path(out), s, db);
  std::printf("wrote %s: %zu x %zu (%s x %s)\n", out.c_str(), s.rows.count, s.cols.count,
              std::string(axis_name(s.rows.kind)).c_str(), std::string(axis_name(s.cols.kind)).c_str());
  return 0;
}

Threshold empirical_threshold(const ScenarioConfig& cfg, const IntegrationMap& map, double pfa, std::size_t threads) {
  const SynthOptions opt = cfg.synth_options(threads);
  if (!opt.noise.enabled) throw UsageError("empirical threshold needs a noisy scenario; use --threshold ca_cfar");
  const double sigma = resolve_amplitudes(cfg.targets, opt).noise_sigma;
  const RangeAxis axis = window_axis(cfg.radar, cfg.window);
  std::size_t valid = map.size() - map.count(CellState::pruned) - map.count(CellState::outside);
  if (valid == 0) throw UsageError("map has no valid cells");
  std::size_t maps = cfg.calibration_maps;
  if (maps == 0) {
    const auto needed = static_cast<std::size_t>(std::ceil(20.0 / pfa));
    maps = std::max<std::size_t>(2, (needed + valid - 1) / valid);
  }
  const SearchGrid grid = map.grid();
  std::vector<double> mags;
  for (std::size_t c = 0; c < maps; ++c) {
    DataCube n(cfg.radar.pulse_count, axis, cfg.radar.prf, CubeDomain::compressed);
    add_noise(n, derive_seed(opt.noise.seed, kDetectCalibrationStream, c), sigma * sigma, threads);
    const IntegrationMap nm = integrate(n, grid, cfg.radar, map.tag(), IntegrateOptions{threads});
    for (std::size_t f = 0; f < nm.size(); ++f)
      if (nm.valid(f)) mags.push_back(nm.magnitude(f));
  }
  std::printf("calibrated on %zu noise-only maps (%zu cells)\n", maps, mags.size());
  return calibrate_empirical(std::move(mags), pfa);
}

int run_detect(const std::string& map_path, const std::string& config_path, const std::string& out,
               std::string mode, std::optional<double> pfa_opt, const Common& common) {
  const ScenarioConfig cfg = load_config(config_path);
  const IntegrationMap map = read_map(map_path);
  require_hash(map.config_hash(), cfg, map_path);
  const double pfa = pfa_opt.value_or(cfg.pfa);
  if (mode.empty()) mode = cfg.threshold == ThresholdMode::empirical ? "empirical" : "ca_cfar";
  const Threshold th = mode == "empirical" ? empirical_threshold(cfg, map, pfa, common.threads)
                                           : calibrate_ca_cfar(map, pfa);
  const auto dets = detect(map, th);
  if (mode == "empirical")
    std::printf("threshold empirical, pfa %g, eta %.4f\n", pfa, th.value);
  else
    std::printf("threshold ca_cfar, pfa %g\n", pfa);
  std::printf("%zu detections\n", dets.size());
  std::ostringstream ss;
  write_detections_jsonl(ss, dets, map.grid(), map.config_hash());
  if (out.empty()) {
    std::cout << ss.str();
  } else {
    write_file_atomic(out, ss.str());
    for (std::size_t k = 0; k < std::min<std::size_t>(dets.size(), 10); ++k)
      std::printf("  %.4f at %s\n", dets[k].amplitude, cell_text(map.grid(), dets[k].cell).c_str());
  }
  return 0;
}

int run_pd(const std::string& config_path, const std::string& out, std::optional<std::size_t> trials,
           std::optional<double> pfa, const Common& common) {
  const ScenarioConfig cfg = load_config(config_path);
  PdScenario s = cfg.pd_scenario(common.threads);
  if (trials) s.trials = *trials;
  if (pfa) s.pfa = *pfa;
  if (s.trials == 0) throw UsageError("--trials must be at least 1");
  const auto t0 = std::chrono::steady_clock::now();
  const auto curves = monte_carlo_pd(s);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_pd_csv(std::filesystem::path(out), curves);
  std::printf("wrote %s: %zu methods, %zu trials, pfa %g, %.1f s\n", out.c_str(), curves.size(), s.trials, s.pfa,
              secs);
  for (const auto& c : curves)
    std::printf("  %-6s threshold %.4f  SNR %g..%g dB  SNR at Pd=0.8: %.2f dB\n", c.method.name().c_str(),
                c.threshold, c.snr_db.front(), c.snr_db.back(), snr_at_pd(c, 0.8));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Long-time coherent integration for constant-velocity targets"};
  app.require_subcommand(1);
  Common common;

  auto* synth = app.add_subcommand("synth", "Synthesize a pulse-compressed data cube");
  std::string s_config, s_out;
  bool s_raw = false;
  std::optional<std::uint64_t> s_seed;
  synth->add_option("--config", s_config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  synth->add_option("--out", s_out, "Output cube file")->required();
  synth->add_flag("--raw", s_raw, "Synthesize raw chirp echoes and pulse-compress them");
  synth->add_option("--seed", s_seed, "Enable noise with this seed");
  add_common(synth, common);

  auto* integ = app.add_subcommand("integrate", "Integrate a cube over a search grid");
  std::string i_cube, i_config, i_method, i_out;
  integ->add_option("--cube", i_cube, "Input cube file")->required()->check(CLI::ExistingFile);
  integ->add_option("--config", i_config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  integ->add_option("--method", i_method, "Integrator")
      ->required()
      ->check(CLI::IsMember({"arem", "poly1", "poly2", "poly3", "mtd"}));
  integ->add_option("--out", i_out, "Output map file")->required();
  add_common(integ, common);

  auto* slice = app.add_subcommand("slice", "Write a 2-D magnitude slice of a map as CSV");
  std::string l_map, l_out;
  std::vector<std::string> l_fix;
  bool l_db = false;
  slice->add_option("--map", l_map, "Input map file")->required()->check(CLI::ExistingFile);
  slice->add_option("--fix", l_fix, "Fix an axis, e.g. speed=800 (repeatable)");
  slice->add_option("--out", l_out, "Output CSV")->required();
  slice->add_flag("--db", l_db, "Write 20 log10 magnitude");

  auto* det = app.add_subcommand("detect", "Threshold a map and write detections as JSON lines");
  std::string d_map, d_config, d_out, d_mode;
  std::optional<double> d_pfa;
  det->add_option("--map", d_map, "Input map file")->required()->check(CLI::ExistingFile);
  det->add_option("--config", d_config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  det->add_option("--out", d_out, "Output JSON-lines file (default: stdout)");
  det->add_option("--threshold", d_mode, "Threshold mode")->check(CLI::IsMember({"empirical", "ca_cfar"}));
  det->add_option("--pfa", d_pfa, "False-alarm probability (default: config pfa)");
  add_common(det, common);

  auto* pd = app.add_subcommand("pd-curve", "Monte Carlo detection probability versus SNR");
  std::string p_config, p_out;
  std::optional<std::size_t> p_trials;
  std::optional<double> p_pfa;
  pd->add_option("--config", p_config, "Scenario JSON with a monte_carlo block")->required()->check(CLI::ExistingFile);
  pd->add_option("--out", p_out, "Output CSV")->required();
  pd->add_option("--trials", p_trials, "Trials per SNR point (default: config)");
  pd->add_option("--pfa", p_pfa, "False-alarm probability (default: config pfa, 1e-4)");
  add_common(pd, common);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) return run_synth(s_config, s_out, s_raw, s_seed, common);
    if (*integ) return run_integrate(i_cube, i_config, i_method, i_out, common);
    if (*slice) return run_slice(l_map, l_fix, l_out, l_db);
    if (*det) return run_detect(d_map, d_config, d_out, d_mode, d_pfa, common);
    if (*pd) return run_pd(p_config, p_out, p_trials, p_pfa, common);
  } catch (const ltci::Error& e) {
    std::fprintf(stderr, "ltci: %s\n", e.what());
    return 1;
  }
  return 1;
}
