// Integrator kernels on the reference radar. The counters report cell-pulse
// throughput, so runs at different grid sizes compare directly.

#include <benchmark/benchmark.h>

#include "ltci/echo.hpp"
#include "ltci/integrators.hpp"

using namespace ltci;

namespace {

const RangeTriple kTarget{25000, 60, 800};

RadarParams radar(std::size_t pulses) {
  RadarParams p;
  p.pulse_count = pulses;
  return p;
}

DataCube cube(const RadarParams& p) {
  const CcvTarget t = CcvTarget::from_triple(kTarget, 6);
  SynthOptions opt;
  opt.noise = NoiseSpec::seeded(1);
  return synth_compressed(p, std::span(&t, 1), {24400, 27100}, opt);
}

void set_counters(benchmark::State& state, const SearchGrid& g, std::size_t pulses) {
  const auto work = static_cast<double>(g.size() * pulses);
  state.counters["cells"] = static_cast<double>(g.size());
  state.counters["cell_pulses/s"] = benchmark::Counter(work, benchmark::Counter::kIsIterationInvariantRate);
}

// Args: range cells, radial-velocity cells, speed cells, pulses.
void BM_arem(benchmark::State& state) {
  const auto nr = static_cast<std::size_t>(state.range(0)), nv = static_cast<std::size_t>(state.range(1)),
             ns = static_cast<std::size_t>(state.range(2)), m = static_cast<std::size_t>(state.range(3));
  const RadarParams p = radar(m);
  const DataCube c = cube(p);
  const double dv = radial_velocity_spacing(p);
  const SearchGrid g({Axis{AxisKind::range, kTarget.r0, range_spacing(p), nr},
                      Axis{AxisKind::radial_velocity, kTarget.rdot0, dv, nv},
                      Axis{AxisKind::speed, kTarget.speed, speed_spacing(p), ns}});
  for (auto _ : state) benchmark::DoNotOptimize(arem_grft(c, g, p, {1}).values().data());
  set_counters(state, g, m);
}

// Args: order, cells per axis, pulses.
void BM_poly(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1)), m = static_cast<std::size_t>(state.range(2));
  const RadarParams p = radar(m);
  const DataCube c = cube(p);
  const auto eq = polynomial_equivalent(kTarget);
  std::vector<Axis> axes{Axis{AxisKind::range, eq[0], range_spacing(p), n},
                         Axis{AxisKind::radial_velocity, eq[1], radial_velocity_spacing(p), n}};
  if (order >= 2) axes.push_back(Axis{AxisKind::acceleration, eq[2], acceleration_spacing(p), n});
  if (order >= 3) axes.push_back(Axis{AxisKind::jerk, eq[3], jerk_spacing(p), n});
  const SearchGrid g(std::move(axes));
  for (auto _ : state) benchmark::DoNotOptimize(poly_grft(c, g, p, order, {1}).values().data());
  set_counters(state, g, m);
}

void BM_mtd(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const RadarParams p = radar(m);
  const DataCube c = cube(p);
  for (auto _ : state) benchmark::DoNotOptimize(mtd(c, p, {1}).values().data());
  state.counters["pulses"] = static_cast<double>(m);
}

}  // namespace

BENCHMARK(BM_arem)
    ->ArgNames({"Nr", "Nrdot", "Nv", "M"})
    ->Args({8, 16, 16, 400})
    ->Args({16, 16, 16, 400})
    ->Args({8, 32, 16, 400})
    ->Args({8, 16, 32, 400})
    ->Args({8, 16, 16, 800})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_poly)
    ->ArgNames({"order", "n", "M"})
    ->Args({1, 41, 800})
    ->Args({2, 21, 800})
    ->Args({3, 11, 800})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mtd)->Arg(128)->Arg(800)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
