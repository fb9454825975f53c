#include "ltci/montecarlo.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

#include "ltci/error.hpp"
#include "ltci/random.hpp"

namespace ltci {

namespace {

constexpr std::uint64_t kTrialStream = 0x747269616cULL;     // "trial"
constexpr std::uint64_t kCalibrationStream = 0x63616cULL;   // "cal"

DataCube noise_cube(const RadarParams& p, const RangeAxis& axis, std::uint64_t seed, std::size_t threads) {
  DataCube c(p.pulse_count, axis, p.prf, CubeDomain::compressed);
  add_noise(c, seed, 1.0, threads);
  return c;
}

}  // namespace

std::vector<double> snr_axis(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw UsageError("snr_axis: need step > 0 and hi >= lo");
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (std::size_t k = 0; k < n; ++k) out.push_back(lo + step * static_cast<double>(k));
  return out;
}

std::vector<PdCurve> monte_carlo_pd(const PdScenario& s) {
  if (s.trials == 0) throw UsageError("monte_carlo_pd: trials must be >= 1");
  if (s.methods.empty()) throw UsageError("monte_carlo_pd: no methods");
  if (s.bracket_db > 0.0) {
    if (!(s.snr_step_db > 0.0)) throw UsageError("monte_carlo_pd: SNR step must be positive");
  } else if (s.snr_db.empty()) {
    throw UsageError("monte_carlo_pd: empty SNR axis");
  }
  const IntegrateOptions iopt{s.threads};
  const RangeAxis axis = window_axis(s.radar, s.window);

  const CcvTarget unit = CcvTarget::from_triple(s.target, 0.0);
  const DataCube signal = synth_compressed(s.radar, std::span(&unit, 1), s.window,
                                           SynthOptions{NoiseSpec::none(), AmplitudeScale::unit_noise, 4, s.threads});

  struct State {
    IntegrationMap signal_map;
    PdCurve curve;
    std::vector<std::size_t> hits;
  };
  std::vector<State> st;
  st.reserve(s.methods.size());
  for (const auto& ms : s.methods) {
    State x{integrate(signal, ms.grid, s.radar, ms.tag, iopt), {}, {}};
    const std::size_t ref = x.signal_map.peak();
    x.curve.method = ms.tag;
    x.curve.snr_db = s.snr_db;
    x.curve.trials = s.trials;
    x.curve.pfa = s.pfa;
    x.curve.reference_cell = x.signal_map.grid().unflat(ref);
    x.curve.reference_coords = x.signal_map.grid().coords(x.curve.reference_cell);
    x.curve.noise_free_peak = x.signal_map.magnitude(ref);
    st.push_back(std::move(x));
  }

  // Thresholds from an independent noise stream; enough maps for 20 / pfa cells.
  for (std::size_t k = 0; k < st.size(); ++k) {
    const std::size_t valid = st[k].signal_map.count(CellState::valid);
    const auto needed = static_cast<std::size_t>(std::ceil(20.0 / s.pfa));
    const std::size_t maps = std::max<std::size_t>(2, (needed + valid - 1) / std::max<std::size_t>(valid, 1));
    std::vector<double> mags;
    mags.reserve(maps * valid);
    for (std::size_t c = 0; c < maps; ++c) {
      const DataCube n = noise_cube(s.radar, axis, derive_seed(s.seed, kCalibrationStream, c), s.threads);
      const IntegrationMap nm = integrate(n, s.methods[k].grid, s.radar, s.methods[k].tag, iopt);
      for (std::size_t f = 0; f < nm.size(); ++f) {
        if (nm.valid(f)) mags.push_back(nm.magnitude(f));
      }
    }
    st[k].curve.threshold = calibrate_empirical(std::move(mags), s.pfa).value;
    st[k].curve.calibration_maps = maps;
  }

  std::vector<std::vector<double>> amps(st.size());
  for (std::size_t k = 0; k < st.size(); ++k) {
    PdCurve& c = st[k].curve;
    if (s.bracket_db > 0.0) {
      if (!(c.noise_free_peak > 0.0)) throw UsageError("monte_carlo_pd: target gives no signal on the " + c.method.name() + " grid");
      const double step = s.snr_step_db;
      const double centre = step * std::round(20.0 * std::log10(c.threshold / c.noise_free_peak) / step);
      c.snr_db = snr_axis(centre - s.bracket_db, centre + s.bracket_db, step);
    }
    st[k].hits.assign(c.snr_db.size(), 0);
    for (double snr : c.snr_db) amps[k].push_back(std::pow(10.0, snr / 20.0));
  }

  // Magnitudes are evaluated lazily: only cells the detector reaches are computed.
  std::vector<double> mags;
  std::vector<std::uint32_t> stamp;
  std::uint32_t generation = 0;
  for (std::size_t trial = 0; trial < s.trials; ++trial) {
    const DataCube n = noise_cube(s.radar, axis, derive_seed(s.seed, kTrialStream, trial), s.threads);
    for (std::size_t k = 0; k < st.size(); ++k) {
      const IntegrationMap nm = integrate(n, s.methods[k].grid, s.radar, s.methods[k].tag, iopt);
      const auto sig = st[k].signal_map.values();
      const auto noise = nm.values();
      mags.resize(nm.size());
      stamp.assign(nm.size(), 0);
      generation = 0;
      for (std::size_t a = 0; a < amps[k].size(); ++a) {
        ++generation;
        const double amp = amps[k][a];
        auto magnitude = [&](std::size_t f) {
          if (stamp[f] != generation) {
            mags[f] = std::abs(amp * sig[f] + noise[f]);
            stamp[f] = generation;
          }
          return mags[f];
        };
        if (detected_near(nm.grid(), magnitude, nm.states(), st[k].curve.threshold, st[k].curve.reference_cell,
                          s.tolerance_cells)) {
          ++st[k].hits[a];
        }
      }
    }
  }

  std::vector<PdCurve> out;
  for (auto& x : st) {
    x.curve.pd.resize(x.curve.snr_db.size());
    for (std::size_t a = 0; a < x.curve.snr_db.size(); ++a) {
      x.curve.pd[a] = static_cast<double>(x.hits[a]) / static_cast<double>(s.trials);
    }
    out.push_back(std::move(x.curve));
  }
  return out;
}

double snr_at_pd(const PdCurve& c, double pd) {
  for (std::size_t k = 0; k < c.pd.size(); ++k) {
    if (c.pd[k] >= pd) {
      if (k == 0) return c.snr_db[0];
      const double f = (pd - c.pd[k - 1]) / (c.pd[k] - c.pd[k - 1]);
      return c.snr_db[k - 1] + f * (c.snr_db[k] - c.snr_db[k - 1]);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace ltci
