#include "ltci/echo.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <vector>

#include "ltci/error.hpp"
#include "ltci/parallel.hpp"
#include "ltci/random.hpp"

namespace ltci {

namespace {

constexpr std::uint64_t kNoiseStream = 0x6e6f697365ULL;  // "noise"

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

struct FftwDeleter {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwDeleter>;

FftwBuffer fftw_buffer(std::size_t n) {
  return FftwBuffer(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
}

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  ~PlanPair() {
    std::lock_guard lock(fftw_plan_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

std::size_t next_fft_size(std::size_t n) {
  std::size_t s = 1;
  while (s < n) s <<= 1;
  return s;
}

}  // namespace

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = kPi * x;
  return std::sin(px) / px;
}

RangeAxis window_axis(const RadarParams& p, const RangeWindow& w) {
  const double step = p.range_bin();
  const double span = (w.hi - w.lo) / step;
  const double whole = std::round(span);
  if (!(w.lo > 0.0) || span < -1e-9 || std::abs(span - whole) > 1e-6) {
    throw UsageError("range window must satisfy 0 < lo <= hi with hi - lo a multiple of the range bin");
  }
  return {w.lo, step, static_cast<std::size_t>(whole) + 1};
}

Amplitudes resolve_amplitudes(std::span<const CcvTarget> targets, const SynthOptions& opt) {
  Amplitudes a{std::vector<double>(targets.size(), 1.0), 0.0};
  if (!opt.noise.enabled) return a;
  double ref = 1.0;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    a.target[k] = std::pow(10.0, targets[k].snr_after_pc / 20.0);
    ref = (k == 0) ? a.target[k] : std::max(ref, a.target[k]);
  }
  a.noise_sigma = 1.0;
  if (opt.scale == AmplitudeScale::unit_signal) {
    for (auto& x : a.target) x /= ref;
    a.noise_sigma = 1.0 / ref;
  }
  return a;
}

void check_window(const RadarParams& p, std::span<const CcvTarget> targets, const RangeWindow& w) {
  for (std::size_t m = 0; m < p.pulse_count; ++m) {
    const double t = p.pulse_time(m);
    for (const auto& tg : targets) {
      const double r = range_at(tg.motion, t);
      if (r < w.lo || r > w.hi) throw WindowError(m, r, w.lo, w.hi);
    }
  }
}

std::size_t reference_chirp_length(const RadarParams& p) {
  return 2 * raw_padding_bins(p) + 1;
}

std::size_t raw_padding_bins(const RadarParams& p) {
  // Fast-time samples l with |l / fs| <= Tp / 2.
  return static_cast<std::size_t>(std::floor(p.pulse_duration * p.sample_rate / 2.0 + 1e-9));
}

void add_noise(DataCube& cube, std::uint64_t seed, double variance, std::size_t threads) {
  parallel_for(cube.pulses(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t m = begin; m < end; ++m) {
      ComplexGaussian gen(derive_seed(seed, kNoiseStream, m), variance);
      for (auto& s : cube.row(m)) s += gen();
    }
  });
}

DataCube synth_compressed(const RadarParams& p, std::span<const CcvTarget> targets,
                          const RangeWindow& w, const SynthOptions& opt) {
  p.validate();
  for (const auto& t : targets) t.validate();
  const RangeAxis axis = window_axis(p, w);
  check_window(p, targets, w);
  const Amplitudes amp = resolve_amplitudes(targets, opt);

  DataCube cube(p.pulse_count, axis, p.prf, CubeDomain::compressed);
  const double lambda = p.wavelength();
  const double envelope_scale = 2.0 * p.bandwidth / kSpeedOfLight;
  const double half_width = opt.envelope_nulls * p.range_resolution();
  const auto nbins = static_cast<std::int64_t>(axis.count);

  parallel_for(p.pulse_count, opt.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t m = begin; m < end; ++m) {
      const double t = p.pulse_time(m);
      auto row = cube.row(m);
      for (std::size_t k = 0; k < targets.size(); ++k) {
        const double r = range_at(targets[k].motion, t);
        const cdouble phasor =
            std::polar(amp.target[k], -4.0 * kPi * r / lambda + targets[k].reflectivity_phase);
        const auto first = std::max<std::int64_t>(
            0, static_cast<std::int64_t>(std::ceil((r - half_width - axis.start) / axis.step)));
        const auto last = std::min<std::int64_t>(
            nbins - 1, static_cast<std::int64_t>(std::floor((r + half_width - axis.start) / axis.step)));
        for (std::int64_t n = first; n <= last; ++n) {
          const double rr = axis.at(static_cast<std::size_t>(n));
          row[static_cast<std::size_t>(n)] += phasor * sinc(envelope_scale * (rr - r));
        }
      }
    }
  });

  if (opt.noise.enabled) {
    add_noise(cube, opt.noise.seed, amp.noise_sigma * amp.noise_sigma, opt.threads);
  }
  return cube;
}

DataCube synth_raw(const RadarParams& p, std::span<const CcvTarget> targets, const RangeWindow& w,
                   const SynthOptions& opt) {
  p.validate();
  for (const auto& t : targets) t.validate();
  const RangeAxis out_axis = window_axis(p, w);
  check_window(p, targets, w);
  const Amplitudes amp = resolve_amplitudes(targets, opt);

  const std::size_t pad = raw_padding_bins(p);
  const RangeAxis axis{out_axis.start - static_cast<double>(pad) * out_axis.step, out_axis.step,
                       out_axis.count + 2 * pad};
  DataCube cube(p.pulse_count, axis, p.prf, CubeDomain::raw);

  const double mu = p.chirp_rate();
  const double fc = p.carrier_frequency;
  const double half_pulse = p.pulse_duration / 2.0;
  const double dt = 1.0 / p.sample_rate;
  const double t_start = 2.0 * axis.start / kSpeedOfLight;
  const auto nbins = static_cast<std::int64_t>(axis.count);

  parallel_for(p.pulse_count, opt.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t m = begin; m < end; ++m) {
      auto row = cube.row(m);
      for (std::size_t k = 0; k < targets.size(); ++k) {
        const double tau = 2.0 * range_at(targets[k].motion, p.pulse_time(m)) / kSpeedOfLight;
        const cdouble carrier =
            std::polar(amp.target[k], -2.0 * kPi * fc * tau + targets[k].reflectivity_phase);
        const auto first = std::max<std::int64_t>(
            0, static_cast<std::int64_t>(std::ceil((tau - half_pulse - t_start) / dt - 1e-9)));
        const auto last = std::min<std::int64_t>(
            nbins - 1, static_cast<std::int64_t>(std::floor((tau + half_pulse - t_start) / dt + 1e-9)));
        for (std::int64_t n = first; n <= last; ++n) {
          const double u = t_start + static_cast<double>(n) * dt - tau;
          if (std::abs(u) > half_pulse * (1.0 + 1e-12)) continue;
          row[static_cast<std::size_t>(n)] += carrier * std::polar(1.0, kPi * mu * u * u);
        }
      }
    }
  });

  if (opt.noise.enabled) {
    const double sigma2 = amp.noise_sigma * amp.noise_sigma;
    add_noise(cube, opt.noise.seed, sigma2 * static_cast<double>(reference_chirp_length(p)), opt.threads);
  }
  return cube;
}

DataCube pulse_compress(const DataCube& raw, const RadarParams& p, std::size_t threads) {
  if (raw.domain() != CubeDomain::raw) throw UsageError("pulse_compress: cube is not raw");
  const std::size_t pad = raw_padding_bins(p);
  if (std::abs(raw.range_bin() - p.range_bin()) > 1e-9 * p.range_bin() || raw.bins() <= 2 * pad) {
    throw UsageError("pulse_compress: raw cube geometry does not match radar parameters");
  }
  const std::size_t nref = reference_chirp_length(p);
  const std::size_t nraw = raw.bins();
  const std::size_t nout = nraw - 2 * pad;
  const std::size_t nfft = next_fft_size(nraw);

  auto spectrum = fftw_buffer(nfft);
  auto work_in = fftw_buffer(nfft);
  auto work_out = fftw_buffer(nfft);
  PlanPair plans;
  {
    std::lock_guard lock(fftw_plan_mutex());
    plans.forward = fftw_plan_dft_1d(static_cast<int>(nfft), work_in.get(), work_out.get(),
                                     FFTW_FORWARD, FFTW_ESTIMATE);
    plans.backward = fftw_plan_dft_1d(static_cast<int>(nfft), work_in.get(), work_out.get(),
                                      FFTW_BACKWARD, FFTW_ESTIMATE);
  }

  // Reference chirp h[i] = exp(j pi mu (l/fs)^2), l = i - pad.
  const double mu = p.chirp_rate();
  for (std::size_t i = 0; i < nfft; ++i) {
    work_in[i][0] = 0.0;
    work_in[i][1] = 0.0;
  }
  for (std::size_t i = 0; i < nref; ++i) {
    const double u = (static_cast<double>(i) - static_cast<double>(pad)) / p.sample_rate;
    const cdouble h = std::polar(1.0, kPi * mu * u * u);
    work_in[i][0] = h.real();
    work_in[i][1] = h.imag();
  }
  fftw_execute_dft(plans.forward, work_in.get(), spectrum.get());
  // conj(H) / (nfft * nref) folds both the inverse-FFT scale and the gain normalization in.
  const double norm = 1.0 / (static_cast<double>(nfft) * static_cast<double>(nref));
  for (std::size_t i = 0; i < nfft; ++i) {
    spectrum[i][0] *= norm;
    spectrum[i][1] *= -norm;
  }

  const RangeAxis out_axis{raw.range_axis_start() + static_cast<double>(pad) * raw.range_bin(),
                           raw.range_bin(), nout};
  DataCube out(raw.pulses(), out_axis, raw.prf(), CubeDomain::compressed);
  out.set_config_hash(raw.config_hash());

  parallel_for(raw.pulses(), threads, [&](std::size_t begin, std::size_t end) {
    auto in = fftw_buffer(nfft);
    auto freq = fftw_buffer(nfft);
    for (std::size_t m = begin; m < end; ++m) {
      const auto row = raw.row(m);
      for (std::size_t i = 0; i < nfft; ++i) {
        const cdouble x = i < nraw ? row[i] : cdouble{};
        in[i][0] = x.real();
        in[i][1] = x.imag();
      }
      fftw_execute_dft(plans.forward, in.get(), freq.get());
      for (std::size_t i = 0; i < nfft; ++i) {
        const cdouble prod = cdouble(freq[i][0], freq[i][1]) * cdouble(spectrum[i][0], spectrum[i][1]);
        freq[i][0] = prod.real();
        freq[i][1] = prod.imag();
      }
      fftw_execute_dft(plans.backward, freq.get(), in.get());
      auto dst = out.row(m);
      for (std::size_t k = 0; k < nout; ++k) dst[k] = cdouble(in[k][0], in[k][1]);
    }
  });
  return out;
}

}  // namespace ltci
