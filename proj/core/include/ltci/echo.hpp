#pragma once

// Echo synthesis for CCV targets: a direct compressed-domain path (sinc
// envelope with the range-law phase) and a raw LFM path followed by matched
// filtering. Both produce cubes on the same range axis.

#include <cstdint>
#include <span>

#include "ltci/cube.hpp"
#include "ltci/scene.hpp"

namespace ltci {

struct RangeWindow {
  double lo;  // m
  double hi;  // m
};

struct NoiseSpec {
  bool enabled = false;
  std::uint64_t seed = 0;

  static NoiseSpec none() { return {}; }
  static NoiseSpec seeded(std::uint64_t seed) { return {true, seed}; }
};

// unit_noise: noise variance 1, target amplitude 10^(SNR/20).
// unit_signal: the strongest target has amplitude 1 and the noise is scaled
//   down by the same factor, so integrated amplitudes read as pulse counts.
// Both give the same SNR; they differ by one global scale factor.
enum class AmplitudeScale : std::uint8_t { unit_noise, unit_signal };

struct SynthOptions {
  NoiseSpec noise{};
  AmplitudeScale scale = AmplitudeScale::unit_noise;
  int envelope_nulls = 4;  // sinc envelope truncated beyond this many nulls each side
  std::size_t threads = 0;
};

// Range bins covering [lo, hi] inclusive at the radar's range-bin size.
// Throws UsageError unless hi - lo is a non-negative multiple of the bin size.
RangeAxis window_axis(const RadarParams& p, const RangeWindow& w);

struct Amplitudes {
  std::vector<double> target;  // per-target compressed-domain peak amplitude
  double noise_sigma;          // compressed-domain noise standard deviation (E|n|^2 = sigma^2)
};

Amplitudes resolve_amplitudes(std::span<const CcvTarget> targets, const SynthOptions& opt);

// Throws WindowError at the first pulse where some trajectory leaves [lo, hi].
void check_window(const RadarParams& p, std::span<const CcvTarget> targets, const RangeWindow& w);

DataCube synth_compressed(const RadarParams& p, std::span<const CcvTarget> targets,
                          const RangeWindow& w, const SynthOptions& opt = {});

// Raw baseband echoes on a fast-time axis that extends the window by half a
// pulse on each side. Noise, when enabled, is scaled so that it has the
// compressed-domain variance after pulse_compress.
DataCube synth_raw(const RadarParams& p, std::span<const CcvTarget> targets,
                   const RangeWindow& w, const SynthOptions& opt = {});

// Matched filter via FFT against the reference chirp. A unit-amplitude
// full-duration chirp compresses to peak magnitude 1; white noise power is
// reduced by the number of reference samples. Output covers the original
// window. Throws UsageError on a cube that is not raw.
DataCube pulse_compress(const DataCube& raw, const RadarParams& p, std::size_t threads = 0);

// Reference chirp sample count; also the white-noise power reduction of pulse_compress.
std::size_t reference_chirp_length(const RadarParams& p);

// Half-length, in range bins, of the padding synth_raw adds on each side.
std::size_t raw_padding_bins(const RadarParams& p);

// Adds circular complex Gaussian noise with E|n|^2 = variance; pulse m draws
// from an independent stream derived from (seed, m).
void add_noise(DataCube& cube, std::uint64_t seed, double variance, std::size_t threads = 0);

// sin(pi x) / (pi x)
double sinc(double x);

}  // namespace ltci
