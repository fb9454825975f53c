#pragma once

// Radar constants, target kinematics and the square-root range law for
// targets moving with constant Cartesian velocity.

#include <cstddef>
#include <optional>
#include <vector>

namespace ltci {

// Propagation speed used everywhere in the model. The round value keeps the
// reference radar's derived quantities (0.2 m wavelength, 3 m range bins) exact.
inline constexpr double kSpeedOfLight = 3.0e8;
inline constexpr double kPi = 3.14159265358979323846;

struct RadarParams {
  double carrier_frequency = 1.5e9;  // Hz
  double pulse_duration = 10e-6;     // s
  double bandwidth = 20e6;           // Hz
  double sample_rate = 50e6;         // Hz
  double prf = 200.0;                // Hz
  std::size_t pulse_count = 500;

  // Throws DomainError when a field is non-positive or sample_rate < bandwidth.
  void validate() const;

  double wavelength() const { return kSpeedOfLight / carrier_frequency; }
  double range_resolution() const { return kSpeedOfLight / (2.0 * bandwidth); }
  double range_bin() const { return kSpeedOfLight / (2.0 * sample_rate); }
  double pulse_interval() const { return 1.0 / prf; }
  double cpi() const { return static_cast<double>(pulse_count) / prf; }
  double blind_speed() const { return wavelength() * prf / 2.0; }
  double chirp_rate() const { return bandwidth / pulse_duration; }
  double pulse_time(std::size_t m) const { return static_cast<double>(m) / prf; }

  bool operator==(const RadarParams&) const = default;
};

struct DerivedParams {
  double wavelength;        // m
  double range_resolution;  // m
  double range_bin;         // m
  double cpi;               // s
  double blind_speed;       // m/s
};

DerivedParams derived_params(const RadarParams& p);

// Kinematic state in the radar's Cartesian frame (radar at the origin).
struct CartesianState {
  double x0;  // m
  double y0;  // m
  double vx;  // m/s
  double vy;  // m/s
};

// The (r0, rdot0, v) triple that fully determines slant range over time.
struct RangeTriple {
  double r0;     // m, initial slant range
  double rdot0;  // m/s, initial radial velocity
  double speed;  // m/s, Cartesian speed magnitude

  bool operator==(const RangeTriple&) const = default;
};

// Throws DomainError when the target starts at the radar origin.
RangeTriple ccv_from_cartesian(const CartesianState& s);
RangeTriple ccv_from_cartesian(double x0, double y0, double vx, double vy);

// sqrt(r0^2 + 2 r0 rdot0 t + v^2 t^2). Throws DomainError on a negative radicand.
double range_at(double r0, double rdot0, double speed, double t);
inline double range_at(const RangeTriple& k, double t) { return range_at(k.r0, k.rdot0, k.speed, t); }

// Slant range along the Cartesian straight line; independent of the triple law.
double cartesian_range_at(const CartesianState& s, double t);

struct CcvTarget {
  RangeTriple motion;
  double snr_after_pc = 0.0;       // dB, peak power over noise variance after compression
  double reflectivity_phase = 0.0;  // rad
  std::optional<CartesianState> cartesian_truth;

  static CcvTarget from_triple(const RangeTriple& k, double snr_db, double phase = 0.0);
  static CcvTarget from_cartesian(const CartesianState& s, double snr_db, double phase = 0.0);

  // Throws DomainError when r0 <= 0, speed < 0, |rdot0| > speed, or the
  // Cartesian truth disagrees with the triple.
  void validate() const;
};

// Polynomial factors of t^l in the expansion of range_at around t = 0,
// l = 0..order (1/l! already absorbed).
struct TaylorCoeffs {
  std::vector<double> coefficients;

  std::size_t order() const { return coefficients.size() - 1; }
  double operator[](std::size_t l) const { return coefficients[l]; }
  double evaluate(double t) const;
};

// Closed forms exist through order 4; any other order throws UnsupportedOrderError.
TaylorCoeffs taylor_coeffs(const RangeTriple& k, int order);
inline TaylorCoeffs taylor_coeffs(double r0, double rdot0, double speed, int order) {
  return taylor_coeffs(RangeTriple{r0, rdot0, speed}, order);
}

}  // namespace ltci
