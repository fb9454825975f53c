#include "ltci/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <unistd.h>

#include "json.hpp"
#include "ltci/error.hpp"

namespace ltci {
namespace {

constexpr char kMagic[8] = {'L', 'T', 'C', 'I', 'D', 'A', 'T', '\0'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const char*>(p);
    buf_.append(c, n);
  }
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) { put_le(v, 2); }
  void u32(std::uint32_t v) { put_le(v, 4); }
  void u64(std::uint64_t v) { put_le(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void pad_to(std::size_t n) { buf_.resize(n, '\0'); }
  std::size_t size() const { return buf_.size(); }
  const std::string& str() const { return buf_; }
  void reserve(std::size_t n) { buf_.reserve(n); }

 private:
  void put_le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::string buf_;
};

class Reader {
 public:
  Reader(const std::string& data, const std::filesystem::path& path) : data_(data), path_(path) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get_le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get_le(4)); }
  std::uint64_t u64() { return get_le(8); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  const char* take(std::size_t n) {
    if (pos_ + n > data_.size()) fail("truncated file");
    const char* p = data_.data() + pos_;
    pos_ += n;
    return p;
  }
  void seek(std::size_t pos) { pos_ = pos; }
  std::size_t remaining() const { return data_.size() - pos_; }
  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(path_.string() + ": " + what);
  }

 private:
  std::uint64_t get_le(int n) {
    const auto* p = reinterpret_cast<const unsigned char*>(take(static_cast<std::size_t>(n)));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
  }
  const std::string& data_;
  const std::filesystem::path& path_;
  std::size_t pos_ = 0;
};

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t sample_bytes(SampleType t) { return t == SampleType::complex64 ? 8 : 16; }

void put_header(Writer& w, const FileHeader& h) {
  w.bytes(kMagic, sizeof kMagic);
  w.u16(h.version);
  w.u8(static_cast<std::uint8_t>(h.kind));
  w.u8(static_cast<std::uint8_t>(h.dtype));
  w.u8(h.method);
  w.u8(h.order);
  w.u8(static_cast<std::uint8_t>(h.axes.size()));
  w.u8(h.domain);
  w.u64(h.config_hash);
  w.u64(h.elements);
  w.f64(h.prf);
  w.pad_to(kHeaderBytes);
  for (const AxisRecord& a : h.axes) {
    w.u32(a.kind);
    w.u32(0);
    w.u64(a.count);
    w.f64(a.start);
    w.f64(a.step);
  }
}

FileHeader get_header(Reader& r) {
  const char* magic = r.take(sizeof kMagic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) r.fail("bad magic");
  FileHeader h;
  h.version = r.u16();
  if (h.version != kFormatVersion) r.fail("unsupported format version " + std::to_string(h.version));
  const std::uint8_t kind = r.u8();
  if (kind != 1 && kind != 2) r.fail("unknown file kind " + std::to_string(kind));
  h.kind = static_cast<FileKind>(kind);
  const std::uint8_t dtype = r.u8();
  if (dtype != 1 && dtype != 2) r.fail("unknown sample type " + std::to_string(dtype));
  h.dtype = static_cast<SampleType>(dtype);
  h.method = r.u8();
  h.order = r.u8();
  const std::uint8_t rank = r.u8();
  if (rank == 0 || rank > kMaxRank) r.fail("bad rank " + std::to_string(rank));
  h.domain = r.u8();
  h.config_hash = r.u64();
  h.elements = r.u64();
  h.prf = r.f64();
  r.seek(kHeaderBytes);
  std::uint64_t product = 1;
  for (std::uint8_t d = 0; d < rank; ++d) {
    AxisRecord a;
    a.kind = r.u32();
    r.u32();
    a.count = r.u64();
    a.start = r.f64();
    a.step = r.f64();
    if (a.count == 0) r.fail("empty axis");
    product *= a.count;
    h.axes.push_back(a);
  }
  if (product != h.elements) r.fail("axis counts do not match element count");
  if (r.remaining() != h.elements * sample_bytes(h.dtype)) r.fail("payload size mismatch");
  return h;
}

void put_sample(Writer& w, SampleType t, double re, double im) {
  if (t == SampleType::complex64) {
    w.f32(static_cast<float>(re));
    w.f32(static_cast<float>(im));
  } else {
    w.f64(re);
    w.f64(im);
  }
}

cdouble get_sample(Reader& r, SampleType t) {
  if (t == SampleType::complex64) {
    const float re = r.f32();
    const float im = r.f32();
    return {re, im};
  }
  const double re = r.f64();
  const double im = r.f64();
  return {re, im};
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(path.string() + ": cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw FormatError(path.string() + ": write failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw FormatError(path.string() + ": rename failed: " + ec.message());
  }
}

FileHeader read_header(const std::filesystem::path& path) {
  const std::string data = slurp(path);
  Reader r(data, path);
  return get_header(r);
}

void write_cube(const std::filesystem::path& path, const DataCube& cube, SampleType dtype) {
  FileHeader h;
  h.kind = FileKind::cube;
  h.dtype = dtype;
  h.domain = static_cast<std::uint8_t>(cube.domain());
  h.config_hash = cube.config_hash();
  h.elements = cube.pulses() * cube.bins();
  h.prf = cube.prf();
  h.axes.push_back({kPulseAxisCode, cube.pulses(), 0.0, 1.0 / cube.prf()});
  const RangeAxis& ra = cube.range_axis();
  h.axes.push_back({kFastTimeAxisCode, ra.count, ra.start, ra.step});

  Writer w;
  w.reserve(kHeaderBytes + 2 * kAxisRecordBytes + h.elements * sample_bytes(dtype));
  put_header(w, h);
  for (const cdouble& z : cube.samples()) put_sample(w, dtype, z.real(), z.imag());
  write_file_atomic(path, w.str());
}

DataCube read_cube(const std::filesystem::path& path) {
  const std::string data = slurp(path);
  Reader r(data, path);
  const FileHeader h = get_header(r);
  if (h.kind != FileKind::cube) r.fail("not a cube file");
  if (h.axes.size() != 2 || h.axes[0].kind != kPulseAxisCode || h.axes[1].kind != kFastTimeAxisCode)
    r.fail("cube axes must be (pulse, fast time)");
  if (h.domain != 1 && h.domain != 2) r.fail("unknown cube domain");
  if (!(h.prf > 0.0)) r.fail("non-positive prf");
  const RangeAxis ra{h.axes[1].start, h.axes[1].step, static_cast<std::size_t>(h.axes[1].count)};
  DataCube cube(static_cast<std::size_t>(h.axes[0].count), ra, h.prf, static_cast<CubeDomain>(h.domain));
  cube.set_config_hash(h.config_hash);
  for (cdouble& z : cube.samples()) z = get_sample(r, h.dtype);
  return cube;
}

void write_map(const std::filesystem::path& path, const IntegrationMap& map, SampleType dtype) {
  const SearchGrid& g = map.grid();
  FileHeader h;
  h.kind = FileKind::map;
  h.dtype = dtype;
  h.method = static_cast<std::uint8_t>(map.tag().method);
  h.order = static_cast<std::uint8_t>(map.tag().order);
  h.config_hash = map.config_hash();
  h.elements = map.size();
  for (const Axis& a : g.axes()) h.axes.push_back({static_cast<std::uint32_t>(a.kind), a.count, a.start, a.step});

  Writer w;
  w.reserve(kHeaderBytes + g.rank() * kAxisRecordBytes + h.elements * sample_bytes(dtype));
  put_header(w, h);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto values = map.values();
  const auto states = map.states();
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (states[i] == CellState::valid)
      put_sample(w, dtype, values[i].real(), values[i].imag());
    else
      put_sample(w, dtype, nan, static_cast<double>(states[i]));
  }
  write_file_atomic(path, w.str());
}

IntegrationMap read_map(const std::filesystem::path& path) {
  const std::string data = slurp(path);
  Reader r(data, path);
  const FileHeader h = get_header(r);
  if (h.kind != FileKind::map) r.fail("not a map file");
  MethodTag tag{static_cast<Method>(h.method), h.order};
  if (h.method < 1 || h.method > 3) r.fail("unknown method code");
  std::vector<Axis> axes;
  for (const AxisRecord& a : h.axes) {
    if (a.kind < 1 || a.kind > 5) r.fail("unknown axis kind " + std::to_string(a.kind));
    axes.push_back(Axis{static_cast<AxisKind>(a.kind), a.start, a.step, static_cast<std::size_t>(a.count)});
  }
  IntegrationMap map(SearchGrid(std::move(axes)), tag);
  map.set_config_hash(h.config_hash);
  for (std::size_t i = 0; i < map.size(); ++i) {
    const cdouble z = get_sample(r, h.dtype);
    if (std::isnan(z.real())) {
      const double code = z.imag();
      if (code == 1.0)
        map.invalidate(i, CellState::pruned);
      else if (code == 2.0)
        map.invalidate(i, CellState::outside);
      else
        r.fail("bad invalid-cell code at element " + std::to_string(i));
    } else {
      map.set(i, z);
    }
  }
  return map;
}

AxisFix parse_axis_fix(std::string_view s) {
  const auto eq = s.find('=');
  if (eq == std::string_view::npos) throw UsageError("expected <axis>=<value>, got '" + std::string(s) + "'");
  const auto kind = parse_axis_name(s.substr(0, eq));
  if (!kind) throw UsageError("unknown axis '" + std::string(s.substr(0, eq)) + "'");
  const std::string num(s.substr(eq + 1));
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(num, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != num.size() || !std::isfinite(v))
    throw UsageError("bad axis value '" + num + "'");
  return {*kind, v};
}

MapSlice slice_map(const IntegrationMap& map, const std::vector<AxisFix>& fixes) {
  const SearchGrid& g = map.grid();
  const std::size_t rank = g.rank();
  MapSlice s;
  s.fixed_index.assign(rank, SIZE_MAX);
  for (const AxisFix& f : fixes) {
    const auto d = g.find(f.kind);
    if (!d) throw UsageError("map has no " + std::string(axis_name(f.kind)) + " axis");
    const Axis& a = g.axis(*d);
    const auto k = a.nearest(f.value);
    if (!k) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s=%g outside grid [%g, %g]", std::string(axis_name(f.kind)).c_str(),
                    f.value, a.start, a.back());
      throw BoundsError(buf);
    }
    if (s.fixed_index[*d] != SIZE_MAX) throw UsageError("axis fixed twice");
    s.fixed_index[*d] = *k;
  }
  std::vector<std::size_t> free;
  for (std::size_t d = 0; d < rank; ++d)
    if (s.fixed_index[d] == SIZE_MAX) free.push_back(d);

  // Single-point axes left free are fixed implicitly, from the back, until two remain.
  for (std::size_t i = free.size(); i-- > 0 && free.size() > 2;) {
    if (g.axis(free[i]).count == 1) {
      s.fixed_index[free[i]] = 0;
      free.erase(free.begin() + static_cast<std::ptrdiff_t>(i));
    }
  }
  if (free.size() > 2) throw UsageError("fix all but two axes to take a 2-D slice");
  if (free.empty()) throw UsageError("no free axis left to slice");

  CellIndex idx{};
  for (std::size_t d = 0; d < rank; ++d) idx[d] = s.fixed_index[d] == SIZE_MAX ? 0 : s.fixed_index[d];
  const std::size_t rd = free[0];
  s.rows = g.axis(rd);
  const bool two = free.size() == 2;
  const std::size_t cd = two ? free[1] : 0;
  // A rank-1 slice is a single column labelled with the row axis.
  s.cols = two ? g.axis(cd) : Axis{s.rows.kind, s.rows.start, s.rows.step, 1};
  s.values.resize(s.rows.count * s.cols.count);
  for (std::size_t i = 0; i < s.rows.count; ++i) {
    idx[rd] = i;
    for (std::size_t j = 0; j < s.cols.count; ++j) {
      if (two) idx[cd] = j;
      const std::size_t f = g.flat(idx);
      if (map.valid(f)) s.values[i * s.cols.count + j] = map.magnitude(f);
    }
  }
  return s;
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

void write_slice_csv(std::ostream& out, const MapSlice& slice, bool decibels) {
  out << axis_name(slice.rows.kind) << '\\' << axis_name(slice.cols.kind);
  for (std::size_t j = 0; j < slice.cols.count; ++j) out << ',' << num(slice.cols.at(j));
  out << '\n';
  for (std::size_t i = 0; i < slice.rows.count; ++i) {
    out << num(slice.rows.at(i));
    for (std::size_t j = 0; j < slice.cols.count; ++j) {
      out << ',';
      if (const auto v = slice.at(i, j)) out << num(decibels ? 20.0 * std::log10(*v) : *v);
    }
    out << '\n';
  }
}

void write_slice_csv(const std::filesystem::path& path, const MapSlice& slice, bool decibels) {
  std::ostringstream ss;
  write_slice_csv(ss, slice, decibels);
  write_file_atomic(path, ss.str());
}

void write_pd_csv(std::ostream& out, const std::vector<PdCurve>& curves) {
  if (curves.empty()) throw UsageError("no curves to write");
  std::vector<double> snr;
  for (const PdCurve& c : curves) {
    if (c.pd.size() != c.snr_db.size()) throw UsageError("curve " + c.method.name() + ": pd and SNR sizes differ");
    snr.insert(snr.end(), c.snr_db.begin(), c.snr_db.end());
  }
  std::sort(snr.begin(), snr.end());
  snr.erase(std::unique(snr.begin(), snr.end()), snr.end());
  out << "snr_db";
  for (const PdCurve& c : curves) out << ',' << c.method.name();
  out << '\n';
  for (const double x : snr) {
    out << num(x);
    for (const PdCurve& c : curves) {
      out << ',';
      const auto it = std::find(c.snr_db.begin(), c.snr_db.end(), x);
      if (it != c.snr_db.end()) out << num(c.pd[static_cast<std::size_t>(it - c.snr_db.begin())]);
    }
    out << '\n';
  }
}

void write_pd_csv(const std::filesystem::path& path, const std::vector<PdCurve>& curves) {
  std::ostringstream ss;
  write_pd_csv(ss, curves);
  write_file_atomic(path, ss.str());
}

std::string format_hash(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string detection_json(const Detection& det, const SearchGrid& grid, std::uint64_t config_hash) {
  nlohmann::ordered_json j;
  j["method"] = det.method.name();
  nlohmann::ordered_json cell = nlohmann::ordered_json::array();
  nlohmann::ordered_json coords = nlohmann::ordered_json::object();
  for (std::size_t d = 0; d < grid.rank(); ++d) {
    cell.push_back(det.cell[d]);
    coords[std::string(axis_name(grid.axis(d).kind))] = det.coords.at(d);
  }
  j["cell"] = cell;
  j["coords"] = coords;
  j["amplitude"] = det.amplitude;
  j["threshold"] = det.threshold_at_cell;
  j["component_size"] = det.component_size;
  j["config_hash"] = format_hash(config_hash);
  return j.dump();
}

void write_detections_jsonl(std::ostream& out, const std::vector<Detection>& dets, const SearchGrid& grid,
                            std::uint64_t config_hash) {
  for (const Detection& d : dets) out << detection_json(d, grid, config_hash) << '\n';
}

}  // namespace ltci
