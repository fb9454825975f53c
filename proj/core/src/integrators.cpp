#include "ltci/integrators.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>

#include "ltci/error.hpp"
#include "ltci/parallel.hpp"

namespace ltci {

namespace {

constexpr double kTwoPi = 2.0 * kPi;
// Speed may equal |radial velocity| up to rounding of the axis arithmetic.
constexpr double kPruneSlack = 1e-9;

// exp(j 2 pi cycles) from a 4096-entry table plus a 4th-order Taylor
// correction on the residual angle (|b| < pi / 4096, truncation < 1e-17).
constexpr int kPhasorBits = 12;
constexpr std::size_t kPhasorTable = std::size_t{1} << kPhasorBits;

const std::vector<cdouble>& phasor_table() {
  static const std::vector<cdouble> table = [] {
    std::vector<cdouble> t(kPhasorTable);
    for (std::size_t k = 0; k < kPhasorTable; ++k) {
      t[k] = std::polar(1.0, kTwoPi * static_cast<double>(k) / static_cast<double>(kPhasorTable));
    }
    return t;
  }();
  return table;
}

// Plain complex multiply-accumulate; std::complex operator* carries C99
// Annex G inf/NaN recovery that the kernels never need.
inline void mac(double& re, double& im, const cdouble& a, const cdouble& b) {
  re += a.real() * b.real() - a.imag() * b.imag();
  im += a.real() * b.imag() + a.imag() * b.real();
}

inline cdouble cycles_phasor(const cdouble* table, double cycles) {
  auto whole = static_cast<double>(static_cast<std::int64_t>(cycles));
  if (whole > cycles) whole -= 1.0;
  const double x = (cycles - whole) * static_cast<double>(kPhasorTable);
  const auto k = static_cast<std::int64_t>(x + 0.5);
  const double b = (x - static_cast<double>(k)) * (kTwoPi / static_cast<double>(kPhasorTable));
  const double b2 = b * b;
  const double re = 1.0 - b2 * (0.5 - b2 * (1.0 / 24.0));
  const double im = b * (1.0 - b2 * (1.0 / 6.0));
  const cdouble& t = table[static_cast<std::size_t>(k) & (kPhasorTable - 1)];
  return {t.real() * re - t.imag() * im, t.real() * im + t.imag() * re};
}

void check_geometry(const DataCube& cube, const RadarParams& p) {
  if (cube.domain() != CubeDomain::compressed) throw UsageError("integrator: cube is not pulse-compressed");
  if (cube.pulses() != p.pulse_count) throw UsageError("integrator: cube pulse count does not match radar");
  if (std::abs(cube.prf() - p.prf) > 1e-9 * p.prf) throw UsageError("integrator: cube PRF does not match radar");
  if (std::abs(cube.range_bin() - p.range_bin()) > 1e-9 * p.range_bin()) {
    throw UsageError("integrator: cube range bin does not match radar sampling rate");
  }
}

void require_axes(const SearchGrid& grid, std::initializer_list<AxisKind> kinds, const char* who) {
  if (grid.rank() != kinds.size()) throw UsageError(std::string(who) + ": grid has wrong rank");
  std::size_t d = 0;
  for (AxisKind k : kinds) {
    if (grid.axis(d).kind != k) {
      throw UsageError(std::string(who) + ": axis " + std::to_string(d) + " must be " + std::string(axis_name(k)));
    }
    ++d;
  }
}

std::vector<double> pulse_times(const RadarParams& p) {
  std::vector<double> t(p.pulse_count);
  for (std::size_t m = 0; m < p.pulse_count; ++m) t[m] = p.pulse_time(m);
  return t;
}

bool in_window(std::int64_t bin, std::size_t bins) {
  return bin >= 0 && bin < static_cast<std::int64_t>(bins);
}

std::mutex& mtd_plan_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

cdouble unit_phasor_cycles(double cycles) { return cycles_phasor(phasor_table().data(), cycles); }

std::string MethodTag::name() const {
  switch (method) {
    case Method::arem: return "arem";
    case Method::poly: return "poly" + std::to_string(order);
    case Method::mtd: return "mtd";
  }
  return "unknown";
}

MethodTag MethodTag::parse(const std::string& s) {
  if (s == "arem") return arem();
  if (s == "mtd") return mtd();
  if (s == "poly1" || s == "rft") return poly(1);
  if (s == "poly2") return poly(2);
  if (s == "poly3") return poly(3);
  throw UsageError("unknown method '" + s + "' (expected arem, poly1, poly2, poly3 or mtd)");
}

IntegrationMap::IntegrationMap(SearchGrid grid, MethodTag tag)
    : grid_(std::move(grid)),
      tag_(tag),
      values_(grid_.size(), kInvalidValue),
      states_(grid_.size(), CellState::outside) {}

void IntegrationMap::invalidate(std::size_t flat, CellState why) {
  values_[flat] = kInvalidValue;
  states_[flat] = why;
}

std::size_t IntegrationMap::count(CellState s) const {
  std::size_t n = 0;
  for (auto st : states_) n += (st == s);
  return n;
}

std::size_t IntegrationMap::peak() const {
  std::size_t best = values_.size();
  double best_mag = -1.0;
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (states_[k] != CellState::valid) continue;
    const double mag = std::norm(values_[k]);
    if (mag > best_mag) {
      best_mag = mag;
      best = k;
    }
  }
  if (best == values_.size()) throw UsageError("IntegrationMap::peak: no valid cell");
  return best;
}

bool IntegrationMap::bitwise_equal(const IntegrationMap& o) const {
  if (!(grid_ == o.grid_) || !(tag_ == o.tag_) || states_ != o.states_) return false;
  return std::memcmp(values_.data(), o.values_.data(), values_.size() * sizeof(cdouble)) == 0;
}

IntegrationMap arem_grft(const DataCube& cube, const SearchGrid& grid, const RadarParams& p,
                         const IntegrateOptions& opt) {
  check_geometry(cube, p);
  require_axes(grid, {AxisKind::range, AxisKind::radial_velocity, AxisKind::speed}, "arem_grft");
  const Axis& ra = grid.axis(0);
  const Axis& rda = grid.axis(1);
  const Axis& va = grid.axis(2);
  if (!(ra.start > 0.0)) throw UsageError("arem_grft: searched ranges must be positive");

  IntegrationMap map(grid, MethodTag::arem());
  const std::vector<double> t = pulse_times(p);
  const double cycles_per_metre = 2.0 / p.wavelength();
  const RangeAxis& axis = cube.range_axis();
  const std::size_t M = cube.pulses();
  const std::size_t N = cube.bins();
  const cdouble* data = cube.samples().data();
  const cdouble* table = phasor_table().data();
  const double bin_start = axis.start;
  const double inv_bin = 1.0 / axis.step;

  // One work item per (range, radial velocity) pair; the speed axis runs inside.
  parallel_for(ra.count * rda.count, opt.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t ij = begin; ij < end; ++ij) {
      const std::size_t i = ij / rda.count;
      const std::size_t j = ij % rda.count;
      const double r = ra.at(i);
      const double rdot = rda.at(j);
      const double a0 = r * r;
      const double a1 = 2.0 * r * rdot;
      for (std::size_t q = 0; q < va.count; ++q) {
        const std::size_t cell = ij * va.count + q;
        const double v = va.at(q);
        if (v + kPruneSlack < std::abs(rdot)) {
          map.invalidate(cell, CellState::pruned);
          continue;
        }
        const double a2 = v * v;
        double acc_re = 0.0;
        double acc_im = 0.0;
        bool inside = true;
        for (std::size_t m = 0; m < M; ++m) {
          const double tm = t[m];
          const double rad = a0 + tm * (a1 + a2 * tm);
          const double rs = std::sqrt(rad > 0.0 ? rad : 0.0);
          const std::int64_t bin = extraction_bin(rs, bin_start, inv_bin);
          if (!in_window(bin, N)) {
            inside = false;
            break;
          }
          mac(acc_re, acc_im, data[m * N + static_cast<std::size_t>(bin)], cycles_phasor(table, rs * cycles_per_metre));
        }
        if (inside) {
          map.set(cell, {acc_re, acc_im});
        } else {
          map.invalidate(cell, CellState::outside);
        }
      }
    }
  });
  return map;
}

IntegrationMap poly_grft(const DataCube& cube, const SearchGrid& grid, const RadarParams& p, int order,
                         const IntegrateOptions& opt) {
  check_geometry(cube, p);
  switch (order) {
    case 1: require_axes(grid, {AxisKind::range, AxisKind::radial_velocity}, "poly_grft"); break;
    case 2:
      require_axes(grid, {AxisKind::range, AxisKind::radial_velocity, AxisKind::acceleration}, "poly_grft");
      break;
    case 3:
      require_axes(grid, {AxisKind::range, AxisKind::radial_velocity, AxisKind::acceleration, AxisKind::jerk},
                   "poly_grft");
      break;
    default: throw UnsupportedOrderError("poly_grft: order must be 1, 2 or 3");
  }

  IntegrationMap map(grid, MethodTag::poly(order));
  const std::vector<double> t = pulse_times(p);
  const double cycles_per_metre = 2.0 / p.wavelength();
  const RangeAxis& axis = cube.range_axis();
  const std::size_t M = cube.pulses();
  const std::size_t N = cube.bins();
  const cdouble* data = cube.samples().data();
  const cdouble* table = phasor_table().data();
  const double bin_start = axis.start;
  const double inv_bin = 1.0 / axis.step;

  const Axis& ra = grid.axis(0);
  // Trailing axes (everything after range) enumerate the motion terms.
  const std::size_t motion_cells = grid.size() / ra.count;
  const Axis& rda = grid.axis(1);
  const std::size_t na = order >= 2 ? grid.axis(2).count : 1;
  const std::size_t nj = order >= 3 ? grid.axis(3).count : 1;

  parallel_for(grid.size(), opt.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> motion(M);
    for (std::size_t cell = begin; cell < end; ++cell) {
      const std::size_t i = cell / motion_cells;
      std::size_t rest = cell % motion_cells;
      const std::size_t jj = rest % nj;
      rest /= nj;
      const std::size_t aa = rest % na;
      const std::size_t j = rest / na;
      const double r = ra.at(i);
      const double rdot = rda.at(j);
      const double acc2 = order >= 2 ? grid.axis(2).at(aa) / 2.0 : 0.0;
      const double jerk6 = order >= 3 ? grid.axis(3).at(jj) / 6.0 : 0.0;
      double sum_re = 0.0;
      double sum_im = 0.0;
      bool inside = true;
      for (std::size_t m = 0; m < M; ++m) {
        const double tm = t[m];
        const double delta = tm * (rdot + tm * (acc2 + tm * jerk6));
        const std::int64_t bin = extraction_bin(r + delta, bin_start, inv_bin);
        if (!in_window(bin, N)) {
          inside = false;
          break;
        }
        mac(sum_re, sum_im, data[m * N + static_cast<std::size_t>(bin)], cycles_phasor(table, delta * cycles_per_metre));
      }
      if (inside) {
        map.set(cell, {sum_re, sum_im});
      } else {
        map.invalidate(cell, CellState::outside);
      }
    }
  });
  return map;
}

IntegrationMap mtd(const DataCube& cube, const RadarParams& p, const IntegrateOptions& opt) {
  check_geometry(cube, p);
  const std::size_t M = cube.pulses();
  const std::size_t N = cube.bins();
  const double vstep = p.wavelength() * p.prf / (2.0 * static_cast<double>(M));
  const std::size_t shift = M / 2;
  const RangeAxis& ra = cube.range_axis();
  SearchGrid grid({Axis{AxisKind::range, ra.start, ra.step, N},
                   Axis{AxisKind::radial_velocity, -static_cast<double>(shift) * vstep, vstep, M}});
  IntegrationMap map(grid, MethodTag::mtd());

  fftw_complex* in = fftw_alloc_complex(M);
  fftw_complex* out = fftw_alloc_complex(M);
  fftw_plan plan;
  {
    std::lock_guard lock(mtd_plan_mutex());
    // exp(+j 2 pi k m / M) is the compensation for radial velocity k * vstep.
    plan = fftw_plan_dft_1d(static_cast<int>(M), in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
  }

  try {
    parallel_for(N, opt.threads, [&](std::size_t begin, std::size_t end) {
      fftw_complex* col = fftw_alloc_complex(M);
      fftw_complex* spec = fftw_alloc_complex(M);
      for (std::size_t n = begin; n < end; ++n) {
        for (std::size_t m = 0; m < M; ++m) {
          const cdouble x = cube.at(m, n);
          col[m][0] = x.real();
          col[m][1] = x.imag();
        }
        fftw_execute_dft(plan, col, spec);
        for (std::size_t k = 0; k < M; ++k) {
          const std::size_t bin = (k + M - shift) % M;
          map.set(n * M + k, cdouble(spec[bin][0], spec[bin][1]));
        }
      }
      fftw_free(col);
      fftw_free(spec);
    });
  } catch (...) {
    std::lock_guard lock(mtd_plan_mutex());
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
    throw;
  }
  {
    std::lock_guard lock(mtd_plan_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return map;
}

IntegrationMap integrate(const DataCube& cube, const SearchGrid& grid, const RadarParams& p, MethodTag tag,
                         const IntegrateOptions& opt) {
  switch (tag.method) {
    case Method::arem: return arem_grft(cube, grid, p, opt);
    case Method::poly: return poly_grft(cube, grid, p, tag.order, opt);
    case Method::mtd: return mtd(cube, p, opt);
  }
  throw UsageError("integrate: unknown method");
}

std::vector<TrajectoryPoint> trajectory_of_cell(const SearchGrid& grid, MethodTag tag, const CellIndex& cell,
                                                const RadarParams& p, const RangeAxis& range_axis) {
  const std::vector<double> c = grid.coords(cell);
  std::vector<TrajectoryPoint> path;
  path.reserve(p.pulse_count);
  for (std::size_t m = 0; m < p.pulse_count; ++m) {
    const double tm = p.pulse_time(m);
    double rs = 0.0;
    switch (tag.method) {
      case Method::arem: {
        const double rad = c[0] * c[0] + tm * (2.0 * c[0] * c[1] + c[2] * c[2] * tm);
        rs = std::sqrt(rad > 0.0 ? rad : 0.0);
        break;
      }
      case Method::poly: {
        const double acc2 = tag.order >= 2 ? c[2] / 2.0 : 0.0;
        const double jerk6 = tag.order >= 3 ? c[3] / 6.0 : 0.0;
        rs = c[0] + tm * (c[1] + tm * (acc2 + tm * jerk6));
        break;
      }
      case Method::mtd: rs = c[0]; break;
    }
    path.push_back({m, extraction_bin(rs, range_axis), rs});
  }
  return path;
}

}  // namespace ltci
