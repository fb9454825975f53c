#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "json.hpp"
#include "ltci/echo.hpp"
#include "ltci/error.hpp"
#include "ltci/io.hpp"

using namespace ltci;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("ltci_io_" + std::to_string(::getpid()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& name) const { return path / name; }
};

std::string bytes_of(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename T>
T field(const std::string& b, std::size_t off) {
  T v;
  std::memcpy(&v, b.data() + off, sizeof v);
  return v;
}

DataCube noisy_cube() {
  RadarParams p;
  p.pulse_count = 50;
  const CcvTarget t = CcvTarget::from_triple({25000, 60, 800}, 6);
  SynthOptions opt;
  opt.noise = NoiseSpec::seeded(3);
  DataCube c = synth_compressed(p, std::span(&t, 1), {24901, 25102}, opt);
  c.set_config_hash(0x1234abcd5678ef90ull);
  return c;
}

IntegrationMap sample_map() {
  const SearchGrid g({Axis{AxisKind::range, 24990, 7.5, 3}, Axis{AxisKind::radial_velocity, -1, 0.5, 5},
                      Axis{AxisKind::speed, 0, 0.5, 4}});
  IntegrationMap m(g, MethodTag::arem());
  for (std::size_t f = 0; f < m.size(); ++f) {
    const auto ix = g.unflat(f);
    if (ix[2] * 0.5 < std::abs(-1 + 0.5 * static_cast<double>(ix[1])))
      m.invalidate(f, CellState::pruned);
    else
      m.set(f, {std::sin(0.37 * static_cast<double>(f)) * 100.0, std::cos(1.3 * static_cast<double>(f))});
  }
  m.invalidate(g.flat({0, 2, 3, 0}), CellState::outside);
  m.set_config_hash(42);
  return m;
}

bool same_bits(std::span<const cdouble> a, std::span<const cdouble> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size_bytes()) == 0;
}

}  // namespace

TEST_CASE("cube file round trips") {
  TempDir dir;
  const DataCube c = noisy_cube();

  write_cube(dir / "a.cube", c, SampleType::complex128);
  const DataCube back = read_cube(dir / "a.cube");
  CHECK(back.pulses() == c.pulses());
  CHECK(back.range_axis() == c.range_axis());
  CHECK(back.prf() == c.prf());
  CHECK(back.domain() == c.domain());
  CHECK(back.config_hash() == c.config_hash());
  CHECK(same_bits(back.samples(), c.samples()));
  write_cube(dir / "b.cube", back, SampleType::complex128);
  CHECK(bytes_of(dir / "a.cube") == bytes_of(dir / "b.cube"));

  write_cube(dir / "f.cube", c);
  const DataCube f = read_cube(dir / "f.cube");
  for (std::size_t i = 0; i < c.samples().size(); ++i) {
    REQUIRE(f.samples()[i].real() == static_cast<double>(static_cast<float>(c.samples()[i].real())));
    REQUIRE(f.samples()[i].imag() == static_cast<double>(static_cast<float>(c.samples()[i].imag())));
  }
  write_cube(dir / "g.cube", f);
  CHECK(bytes_of(dir / "f.cube") == bytes_of(dir / "g.cube"));
  CHECK(same_bits(read_cube(dir / "g.cube").samples(), f.samples()));
}

TEST_CASE("cube header layout") {
  TempDir dir;
  const DataCube c = noisy_cube();
  write_cube(dir / "c.cube", c);
  const std::string b = bytes_of(dir / "c.cube");
  REQUIRE(b.size() == kHeaderBytes + 2 * kAxisRecordBytes + c.samples().size() * 8);
  CHECK(std::string(b.data(), 7) == "LTCIDAT");
  CHECK(b[7] == 0);
  CHECK(field<std::uint16_t>(b, 8) == kFormatVersion);
  CHECK(b[10] == 1);  // cube
  CHECK(b[11] == 1);  // complex float32
  CHECK(b[14] == 2);  // rank
  CHECK(b[15] == 2);  // compressed
  CHECK(field<std::uint64_t>(b, 16) == 0x1234abcd5678ef90ull);
  CHECK(field<std::uint64_t>(b, 24) == c.samples().size());
  CHECK(field<double>(b, 32) == 200.0);
  CHECK(field<std::uint32_t>(b, 64) == kPulseAxisCode);
  CHECK(field<std::uint64_t>(b, 72) == 50);
  CHECK(field<double>(b, 88) == 1.0 / 200.0);
  CHECK(field<std::uint32_t>(b, 96) == kFastTimeAxisCode);
  CHECK(field<std::uint64_t>(b, 104) == c.bins());
  CHECK(field<double>(b, 112) == 24901.0);
  CHECK(field<double>(b, 120) == 3.0);
  CHECK(field<float>(b, 128) == static_cast<float>(c.samples()[0].real()));
  CHECK(field<float>(b, 132) == static_cast<float>(c.samples()[0].imag()));
  CHECK(field<float>(b, 136) == static_cast<float>(c.samples()[1].real()));

  const FileHeader h = read_header(dir / "c.cube");
  CHECK(h.kind == FileKind::cube);
  CHECK(h.axes.size() == 2);
  CHECK(h.elements == c.samples().size());
}

TEST_CASE("map file round trips with invalid cells") {
  TempDir dir;
  const IntegrationMap m = sample_map();
  REQUIRE(m.count(CellState::pruned) > 0);

  write_map(dir / "a.map", m, SampleType::complex128);
  const IntegrationMap back = read_map(dir / "a.map");
  CHECK(back.grid() == m.grid());
  CHECK(back.tag() == m.tag());
  CHECK(back.config_hash() == 42);
  CHECK(back.bitwise_equal(m));
  CHECK(std::equal(back.states().begin(), back.states().end(), m.states().begin()));
  write_map(dir / "b.map", back, SampleType::complex128);
  CHECK(bytes_of(dir / "a.map") == bytes_of(dir / "b.map"));

  write_map(dir / "f.map", m);
  const IntegrationMap f = read_map(dir / "f.map");
  CHECK(std::equal(f.states().begin(), f.states().end(), m.states().begin()));
  write_map(dir / "g.map", f);
  CHECK(bytes_of(dir / "f.map") == bytes_of(dir / "g.map"));

  const std::string b = bytes_of(dir / "f.map");
  CHECK(b[10] == 2);
  CHECK(b[12] == static_cast<char>(Method::arem));
  CHECK(b[14] == 3);
  const std::size_t pruned = m.grid().flat({0, 0, 0, 0});
  REQUIRE(m.states()[pruned] == CellState::pruned);
  const std::size_t off = kHeaderBytes + 3 * kAxisRecordBytes + pruned * 8;
  CHECK(std::isnan(field<float>(b, off)));
  CHECK(field<float>(b, off + 4) == 1.0f);

  IntegrationMap poly(SearchGrid({Axis{AxisKind::range, 1, 1, 2}, Axis{AxisKind::radial_velocity, 0, 1, 2},
                                  Axis{AxisKind::acceleration, 0, 1, 2}, Axis{AxisKind::jerk, 0, 1, 2}}),
                      MethodTag::poly(3));
  for (std::size_t i = 0; i < poly.size(); ++i) poly.set(i, {double(i), -double(i)});
  write_map(dir / "p.map", poly);
  CHECK(read_map(dir / "p.map").tag() == MethodTag::poly(3));
  CHECK(read_map(dir / "p.map").bitwise_equal(poly));
}

TEST_CASE("malformed files are rejected") {
  TempDir dir;
  write_cube(dir / "c.cube", noisy_cube());
  CHECK_THROWS_AS(read_map(dir / "c.cube"), FormatError);
  write_map(dir / "m.map", sample_map());
  CHECK_THROWS_AS(read_cube(dir / "m.map"), FormatError);

  std::string b = bytes_of(dir / "c.cube");
  write_file_atomic(dir / "short.cube", std::string_view(b).substr(0, b.size() - 3));
  CHECK_THROWS_AS(read_cube(dir / "short.cube"), FormatError);
  b[0] = 'X';
  write_file_atomic(dir / "magic.cube", b);
  CHECK_THROWS_AS(read_cube(dir / "magic.cube"), FormatError);
  CHECK_THROWS_AS(read_cube(dir / "missing.cube"), FormatError);
}

TEST_CASE("atomic writes replace the target and leave no temporary") {
  TempDir dir;
  write_file_atomic(dir / "x.txt", "first");
  write_file_atomic(dir / "x.txt", "second");
  CHECK(bytes_of(dir / "x.txt") == "second");
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path)) ++n;
  CHECK(n == 1);
  CHECK_THROWS_AS(write_file_atomic(dir / "no" / "such" / "dir.txt", "x"), FormatError);
}

TEST_CASE("slices: nearest plane, invalid cells empty, decibels") {
  const IntegrationMap m = sample_map();
  const MapSlice s = slice_map(m, {parse_axis_fix("speed=0.6")});
  CHECK(s.rows.kind == AxisKind::range);
  CHECK(s.cols.kind == AxisKind::radial_velocity);
  CHECK(s.rows.count == 3);
  CHECK(s.cols.count == 5);
  CHECK(s.fixed_index[2] == 1);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      const std::size_t f = m.grid().flat({i, j, 1, 0});
      CHECK(s.at(i, j).has_value() == m.valid(f));
      if (m.valid(f)) CHECK(*s.at(i, j) == m.magnitude(f));
    }

  std::ostringstream lin, db;
  write_slice_csv(lin, s, false);
  write_slice_csv(db, s, true);
  std::istringstream in(lin.str());
  std::string header, row0;
  std::getline(in, header);
  std::getline(in, row0);
  CHECK(header == "range\\radial_velocity,-1,-0.5,0,0.5,1");
  CHECK(row0.rfind("24990,", 0) == 0);
  CHECK(row0.rfind("24990,,", 0) == 0);
  CHECK(row0.back() == ',');
  std::istringstream dbin(db.str());
  std::getline(dbin, header);
  std::getline(dbin, row0);
  const std::size_t f = m.grid().flat({0, 2, 1, 0});
  const double expect = 20 * std::log10(m.magnitude(f));
  std::vector<std::string> cells;
  std::stringstream rs(row0);
  for (std::string tok; std::getline(rs, tok, ',');) cells.push_back(tok);
  CHECK(std::stod(cells.at(3)) == doctest::Approx(expect).epsilon(1e-8));

  CHECK_THROWS_AS(slice_map(m, {{AxisKind::speed, 2.0}}), BoundsError);
  CHECK_THROWS_AS(slice_map(m, {}), UsageError);
  CHECK_THROWS_AS(slice_map(m, {{AxisKind::jerk, 0.0}}), UsageError);
  CHECK_THROWS_AS(parse_axis_fix("speed"), UsageError);
  CHECK_THROWS_AS(parse_axis_fix("warp=9"), UsageError);
  CHECK_THROWS_AS(parse_axis_fix("speed=fast"), UsageError);
  CHECK(parse_axis_fix("r=21000").kind == AxisKind::range);
}

TEST_CASE("fixing a single-point axis is the identity") {
  const SearchGrid g({Axis{AxisKind::range, 25000, 7.5, 4}, Axis{AxisKind::radial_velocity, 0, 1, 3},
                      Axis{AxisKind::speed, 800, 1, 1}});
  IntegrationMap m(g, MethodTag::arem());
  for (std::size_t f = 0; f < m.size(); ++f) m.set(f, double(f + 1));
  const MapSlice a = slice_map(m, {{AxisKind::speed, 800}});
  const MapSlice b = slice_map(m, {});
  CHECK(a.values == b.values);
  for (std::size_t f = 0; f < m.size(); ++f) CHECK(*a.values[f] == m.magnitude(f));

  const IntegrationMap two(SearchGrid({g.axis(0), g.axis(1)}), MethodTag::poly(1));
  CHECK(slice_map(two, {}).values.size() == 12);
}

TEST_CASE("detection-probability CSV") {
  PdCurve a, b;
  a.method = MethodTag::arem();
  b.method = MethodTag::poly(1);
  a.snr_db = b.snr_db = {-1, 0, 1.5};
  a.pd = {0.1, 0.5, 1};
  b.pd = {0, 0.025, 0.25};
  std::ostringstream out;
  write_pd_csv(out, {a, b});
  CHECK(out.str() == "snr_db,arem,poly1\n-1,0.1,0\n0,0.5,0.025\n1.5,1,0.25\n");
  b.snr_db = {1.5, 2};
  b.pd = {0.5, 0.75};
  std::ostringstream merged;
  write_pd_csv(merged, {a, b});
  CHECK(merged.str() == "snr_db,arem,poly1\n-1,0.1,\n0,0.5,\n1.5,1,0.5\n2,,0.75\n");
  b.pd = {0};
  CHECK_THROWS_AS(write_pd_csv(out, {a, b}), UsageError);
}

TEST_CASE("detection JSON lines") {
  const SearchGrid g({Axis{AxisKind::range, 25000, 7.5, 3}, Axis{AxisKind::radial_velocity, 60, 0.025, 3},
                      Axis{AxisKind::speed, 800, 0.025, 3}});
  Detection d;
  d.cell = {1, 2, 0, 0};
  d.coords = g.coords(d.cell);
  d.amplitude = 782.5;
  d.threshold_at_cell = 80.25;
  d.component_size = 17;
  d.method = MethodTag::arem();
  std::ostringstream out;
  write_detections_jsonl(out, {d, d}, g, 0xdeadbeefull);
  std::istringstream in(out.str());
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["method"] == "arem");
    CHECK(j["cell"] == nlohmann::json::array({1, 2, 0}));
    CHECK(j["coords"]["range"].get<double>() == 25007.5);
    CHECK(j["coords"]["radial_velocity"].get<double>() == 60.05);
    CHECK(j["amplitude"].get<double>() == 782.5);
    CHECK(j["threshold"].get<double>() == 80.25);
    CHECK(j["component_size"] == 17);
    CHECK(j["config_hash"] == "0x00000000deadbeef");
    ++n;
  }
  CHECK(n == 2);
  CHECK(format_hash(1) == "0x0000000000000001");
}
