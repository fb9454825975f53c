#include "ltci/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ltci/error.hpp"

namespace ltci {

namespace {

void check_pfa(double pfa) {
  if (!(pfa > 0.0 && pfa <= 0.5)) throw UsageError("pfa must lie in (0, 0.5]");
}

// Neighbour offsets of the full 3^rank - 1 stencil, as per-axis deltas.
std::vector<std::array<int, kMaxRank>> stencil(std::size_t rank) {
  std::vector<std::array<int, kMaxRank>> out;
  std::size_t total = 1;
  for (std::size_t d = 0; d < rank; ++d) total *= 3;
  for (std::size_t code = 0; code < total; ++code) {
    std::array<int, kMaxRank> off{};
    std::size_t c = code;
    bool zero = true;
    for (std::size_t d = 0; d < rank; ++d) {
      off[d] = static_cast<int>(c % 3) - 1;
      c /= 3;
      zero = zero && off[d] == 0;
    }
    if (!zero) out.push_back(off);
  }
  return out;
}

bool step(const SearchGrid& g, const CellIndex& from, const std::array<int, kMaxRank>& off, CellIndex& to) {
  for (std::size_t d = 0; d < g.rank(); ++d) {
    const auto v = static_cast<std::int64_t>(from[d]) + off[d];
    if (v < 0 || v >= static_cast<std::int64_t>(g.axis(d).count)) return false;
    to[d] = static_cast<std::size_t>(v);
  }
  return true;
}

struct Component {
  std::size_t peak;
  double peak_mag;
  std::size_t size;
};

// Neighbour offsets in flat-index units, valid for cells away from every edge.
std::vector<std::ptrdiff_t> flat_offsets(const SearchGrid& g, const std::vector<std::array<int, kMaxRank>>& offs) {
  std::vector<std::ptrdiff_t> out;
  out.reserve(offs.size());
  for (const auto& off : offs) {
    std::ptrdiff_t delta = 0, stride = 1;
    for (std::size_t d = g.rank(); d-- > 0;) {
      delta += off[d] * stride;
      stride *= static_cast<std::ptrdiff_t>(g.axis(d).count);
    }
    out.push_back(delta);
  }
  return out;
}

struct Stencil {
  std::vector<std::array<int, kMaxRank>> offs;
  std::vector<std::ptrdiff_t> flat;
  explicit Stencil(const SearchGrid& g) : offs(stencil(g.rank())), flat(flat_offsets(g, offs)) {}
};

bool interior(const SearchGrid& g, const CellIndex& c) {
  for (std::size_t d = 0; d < g.rank(); ++d)
    if (c[d] == 0 || c[d] + 1 >= g.axis(d).count) return false;
  return true;
}

// Flood fill from `seed`, marking `visited`. Cells above threshold and valid only.
template <typename Mag, typename Above>
Component flood(const SearchGrid& g, const Mag& mag, std::size_t seed, const Above& above,
                std::vector<std::uint8_t>& visited, const Stencil& st, std::vector<std::size_t>& stack) {
  Component c{seed, mag(seed), 0};
  stack.clear();
  stack.push_back(seed);
  visited[seed] = 1;
  while (!stack.empty()) {
    const std::size_t cur = stack.back();
    stack.pop_back();
    ++c.size;
    const double m = mag(cur);
    if (m > c.peak_mag || (m == c.peak_mag && cur < c.peak)) {
      c.peak_mag = m;
      c.peak = cur;
    }
    const CellIndex ci = g.unflat(cur);
    if (interior(g, ci)) {
      for (const std::ptrdiff_t delta : st.flat) {
        const auto f = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(cur) + delta);
        if (visited[f] || !above(f)) continue;
        visited[f] = 1;
        stack.push_back(f);
      }
      continue;
    }
    CellIndex nb{};
    for (const auto& off : st.offs) {
      if (!step(g, ci, off, nb)) continue;
      const std::size_t f = g.flat(nb);
      if (visited[f] || !above(f)) continue;
      visited[f] = 1;
      stack.push_back(f);
    }
  }
  return c;
}

template <typename Mag>
bool detected_near_impl(const SearchGrid& g, const Mag& mag, std::span<const CellState> states, double threshold,
                        const CellIndex& reference, std::size_t tolerance) {
  auto above = [&](std::size_t f) { return states[f] == CellState::valid && mag(f) > threshold; };
  // Enumerate the neighbourhood box around the reference.
  CellIndex lo{}, hi{};
  for (std::size_t d = 0; d < g.rank(); ++d) {
    lo[d] = reference[d] >= tolerance ? reference[d] - tolerance : 0;
    hi[d] = std::min(reference[d] + tolerance, g.axis(d).count - 1);
  }
  std::vector<std::size_t> seeds;
  CellIndex c = lo;
  for (;;) {
    const std::size_t f = g.flat(c);
    if (above(f)) seeds.push_back(f);
    std::size_t d = g.rank();
    while (d-- > 0) {
      if (c[d] < hi[d]) {
        ++c[d];
        break;
      }
      c[d] = lo[d];
    }
    if (d == static_cast<std::size_t>(-1)) break;
  }
  if (seeds.empty()) return false;
  std::vector<std::uint8_t> visited(g.size(), 0);
  const Stencil st(g);
  std::vector<std::size_t> stack;
  for (std::size_t s : seeds) {
    if (visited[s]) continue;
    const Component comp = flood(g, mag, s, above, visited, st, stack);
    if (cell_distance(g.unflat(comp.peak), reference, g.rank()) <= tolerance) return true;
  }
  return false;
}

}  // namespace

Threshold calibrate_empirical(std::vector<double> mags, double pfa) {
  check_pfa(pfa);
  const double needed = std::ceil(10.0 / pfa);
  if (static_cast<double>(mags.size()) < needed) {
    throw UsageError("calibrate_empirical: need at least " + std::to_string(static_cast<long long>(needed)) +
                     " noise-only cells, got " + std::to_string(mags.size()));
  }
  std::sort(mags.begin(), mags.end());
  const double h = (1.0 - pfa) * static_cast<double>(mags.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, mags.size() - 1);
  const double eta = mags[lo] + (h - static_cast<double>(lo)) * (mags[hi] - mags[lo]);
  return {ThresholdMode::empirical, pfa, eta, {}, {}};
}

Threshold calibrate_empirical(std::span<const IntegrationMap> noise_maps, double pfa) {
  std::vector<double> mags;
  for (const auto& m : noise_maps) {
    for (std::size_t k = 0; k < m.size(); ++k) {
      if (m.valid(k)) mags.push_back(m.magnitude(k));
    }
  }
  return calibrate_empirical(std::move(mags), pfa);
}

double ca_cfar_alpha(std::size_t n, double pfa) {
  if (n == 0) return std::numeric_limits<double>::infinity();
  const double nd = static_cast<double>(n);
  return nd * (std::pow(pfa, -1.0 / nd) - 1.0);
}

Threshold calibrate_ca_cfar(const IntegrationMap& map, double pfa, const CfarWindow& w) {
  check_pfa(pfa);
  const SearchGrid& g = map.grid();
  const std::size_t nr = g.axis(0).count;
  const std::size_t inner = g.size() / nr;
  Threshold th{ThresholdMode::cell_averaging, pfa, 0.0, std::vector<double>(g.size()),
               std::vector<std::uint8_t>(g.size(), 0)};
  const auto nominal = 2 * w.reference;
  for (std::size_t i = 0; i < nr; ++i) {
    for (std::size_t rest = 0; rest < inner; ++rest) {
      const std::size_t cell = i * inner + rest;
      double power = 0.0;
      std::size_t n = 0;
      for (std::size_t k = w.guard + 1; k <= w.guard + w.reference; ++k) {
        if (i >= k) {
          const std::size_t f = (i - k) * inner + rest;
          if (map.valid(f)) {
            power += std::norm(map.values()[f]);
            ++n;
          }
        }
        if (i + k < nr) {
          const std::size_t f = (i + k) * inner + rest;
          if (map.valid(f)) {
            power += std::norm(map.values()[f]);
            ++n;
          }
        }
      }
      th.shrunk[cell] = n < nominal;
      th.per_cell[cell] =
          n == 0 ? std::numeric_limits<double>::infinity() : std::sqrt(ca_cfar_alpha(n, pfa) * power / static_cast<double>(n));
    }
  }
  return th;
}

std::size_t cell_distance(const CellIndex& a, const CellIndex& b, std::size_t rank) {
  std::size_t d = 0;
  for (std::size_t k = 0; k < rank; ++k) d = std::max(d, a[k] > b[k] ? a[k] - b[k] : b[k] - a[k]);
  return d;
}

std::vector<Detection> detect(const IntegrationMap& map, const Threshold& threshold) {
  const SearchGrid& g = map.grid();
  std::vector<double> mags(map.size(), 0.0);
  for (std::size_t k = 0; k < map.size(); ++k) {
    if (map.valid(k)) mags[k] = map.magnitude(k);
  }
  auto above = [&](std::size_t f) { return map.valid(f) && mags[f] > threshold.at(f); };
  std::vector<std::uint8_t> visited(map.size(), 0);
  const Stencil st(g);
  std::vector<std::size_t> stack;
  std::vector<Detection> out;
  auto mag = [&](std::size_t f) { return mags[f]; };
  for (std::size_t k = 0; k < map.size(); ++k) {
    if (visited[k] || !above(k)) continue;
    const Component c = flood(g, mag, k, above, visited, st, stack);
    Detection d;
    d.cell = g.unflat(c.peak);
    d.coords = g.coords(d.cell);
    d.amplitude = c.peak_mag;
    d.threshold_at_cell = threshold.at(c.peak);
    d.component_size = c.size;
    d.method = map.tag();
    out.push_back(std::move(d));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Detection& a, const Detection& b) { return a.amplitude > b.amplitude; });
  return out;
}

bool detected_near(const SearchGrid& g, std::span<const double> mags, std::span<const CellState> states,
                   double threshold, const CellIndex& reference, std::size_t tolerance) {
  return detected_near_impl(g, [&](std::size_t f) { return mags[f]; }, states, threshold, reference, tolerance);
}

bool detected_near(const SearchGrid& g, const std::function<double(std::size_t)>& magnitude,
                   std::span<const CellState> states, double threshold, const CellIndex& reference,
                   std::size_t tolerance) {
  return detected_near_impl(g, magnitude, states, threshold, reference, tolerance);
}

double Track::range_at(double t) const {
  switch (method.method) {
    case Method::arem: return ltci::range_at(params[0], params[1], params[2], t);
    case Method::poly: {
      const double a = params.size() > 2 ? params[2] / 2.0 : 0.0;
      const double j = params.size() > 3 ? params[3] / 6.0 : 0.0;
      return params[0] + t * (params[1] + t * (a + t * j));
    }
    case Method::mtd: return params[0] + params[1] * t;
  }
  return 0.0;
}

Track estimate(const Detection& det, const RadarParams& p) {
  if (det.coords.size() < 2) throw UsageError("estimate: detection has too few coordinates");
  Track tr{det.method, det.coords, {}, {}};
  if (det.method.method == Method::arem && std::abs(det.rdot0()) > det.speed() + 1e-9) {
    throw DomainError("estimate: detection speed below |radial velocity|");
  }
  tr.times.reserve(p.pulse_count);
  tr.ranges.reserve(p.pulse_count);
  for (std::size_t m = 0; m < p.pulse_count; ++m) {
    const double t = p.pulse_time(m);
    tr.times.push_back(t);
    tr.ranges.push_back(tr.range_at(t));
  }
  return tr;
}

}  // namespace ltci
