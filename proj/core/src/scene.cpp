#include "ltci/scene.hpp"

#include <cmath>
#include <string>

#include "ltci/error.hpp"

namespace ltci {

namespace {

// |rdot0| may exceed speed by rounding when the triple comes from Cartesian input.
constexpr double kSpeedSlack = 1e-9;

bool close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

void RadarParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw DomainError(std::string("RadarParams: ") + name + " must be positive and finite");
    }
  };
  positive(carrier_frequency, "carrier_frequency");
  positive(pulse_duration, "pulse_duration");
  positive(bandwidth, "bandwidth");
  positive(sample_rate, "sample_rate");
  positive(prf, "prf");
  if (pulse_count == 0) throw DomainError("RadarParams: pulse_count must be >= 1");
  if (sample_rate < bandwidth) throw DomainError("RadarParams: sample_rate must be >= bandwidth");
  if (pulse_duration >= 1.0 / prf) throw DomainError("RadarParams: pulse_duration must be shorter than 1/prf");
}

DerivedParams derived_params(const RadarParams& p) {
  p.validate();
  return {p.wavelength(), p.range_resolution(), p.range_bin(), p.cpi(), p.blind_speed()};
}

RangeTriple ccv_from_cartesian(const CartesianState& s) {
  const double r0 = std::hypot(s.x0, s.y0);
  if (r0 == 0.0) throw DomainError("ccv_from_cartesian: target at radar origin");
  const double rdot0 = (s.x0 * s.vx + s.y0 * s.vy) / r0;
  const double speed = std::hypot(s.vx, s.vy);
  return {r0, rdot0, speed};
}

RangeTriple ccv_from_cartesian(double x0, double y0, double vx, double vy) {
  return ccv_from_cartesian(CartesianState{x0, y0, vx, vy});
}

double range_at(double r0, double rdot0, double speed, double t) {
  const double radicand = r0 * r0 + 2.0 * r0 * rdot0 * t + speed * speed * t * t;
  if (radicand < 0.0) throw DomainError("range_at: negative radicand");
  return std::sqrt(radicand);
}

double cartesian_range_at(const CartesianState& s, double t) {
  return std::hypot(s.x0 + s.vx * t, s.y0 + s.vy * t);
}

CcvTarget CcvTarget::from_triple(const RangeTriple& k, double snr_db, double phase) {
  CcvTarget t{k, snr_db, phase, std::nullopt};
  t.validate();
  return t;
}

CcvTarget CcvTarget::from_cartesian(const CartesianState& s, double snr_db, double phase) {
  CcvTarget t{ccv_from_cartesian(s), snr_db, phase, s};
  t.validate();
  return t;
}

void CcvTarget::validate() const {
  if (!(motion.r0 > 0.0)) throw DomainError("CcvTarget: r0 must be positive");
  if (!(motion.speed >= 0.0)) throw DomainError("CcvTarget: speed must be non-negative");
  if (std::abs(motion.rdot0) > motion.speed * (1.0 + kSpeedSlack) + kSpeedSlack) {
    throw DomainError("CcvTarget: |rdot0| exceeds speed");
  }
  if (!std::isfinite(snr_after_pc)) throw DomainError("CcvTarget: snr_after_pc must be finite");
  if (cartesian_truth) {
    const RangeTriple k = ccv_from_cartesian(*cartesian_truth);
    if (!close(k.r0, motion.r0, 1e-9) || !close(k.rdot0, motion.rdot0, 1e-9) ||
        !close(k.speed, motion.speed, 1e-9)) {
      throw DomainError("CcvTarget: Cartesian truth disagrees with (r0, rdot0, speed)");
    }
  }
}

double TaylorCoeffs::evaluate(double t) const {
  double acc = 0.0;
  for (std::size_t l = coefficients.size(); l-- > 0;) acc = acc * t + coefficients[l];
  return acc;
}

TaylorCoeffs taylor_coeffs(const RangeTriple& k, int order) {
  if (order < 1 || order > 4) {
    throw UnsupportedOrderError("taylor_coeffs: order " + std::to_string(order) + " outside 1..4");
  }
  const double r = k.r0;
  const double rd = k.rdot0;
  const double v2 = k.speed * k.speed;
  const double rd2 = rd * rd;
  std::vector<double> c(static_cast<std::size_t>(order) + 1);
  c[0] = r;
  c[1] = rd;
  if (order >= 2) c[2] = (v2 - rd2) / (2.0 * r);
  if (order >= 3) c[3] = (rd2 * rd - rd * v2) / (2.0 * r * r);
  if (order >= 4) c[4] = (6.0 * rd2 * v2 - v2 * v2 - 5.0 * rd2 * rd2) / (8.0 * r * r * r);
  return {std::move(c)};
}

}  // namespace ltci
