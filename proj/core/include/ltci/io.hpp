#pragma once

// Binary cube/map files, CSV slices and curves, JSON-lines detections.
// The byte layout is documented in docs/file-formats.md.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ltci/cube.hpp"
#include "ltci/detection.hpp"
#include "ltci/integrators.hpp"
#include "ltci/montecarlo.hpp"

namespace ltci {

inline constexpr std::size_t kHeaderBytes = 64;
inline constexpr std::size_t kAxisRecordBytes = 32;
inline constexpr std::uint16_t kFormatVersion = 1;

enum class FileKind : std::uint8_t { cube = 1, map = 2 };

// Element storage: interleaved (re, im) pairs.
enum class SampleType : std::uint8_t { complex64 = 1, complex128 = 2 };

// Axis kind code used for the slow-time axis of a cube; map axes use AxisKind.
inline constexpr std::uint32_t kPulseAxisCode = 16;
inline constexpr std::uint32_t kFastTimeAxisCode = 17;

struct AxisRecord {
  std::uint32_t kind = 0;
  std::uint64_t count = 0;
  double start = 0.0;
  double step = 0.0;
};

struct FileHeader {
  FileKind kind = FileKind::cube;
  SampleType dtype = SampleType::complex64;
  std::uint16_t version = kFormatVersion;
  std::uint8_t method = 0;  // Method code, maps only
  std::uint8_t order = 0;
  std::uint8_t domain = 0;  // CubeDomain code, cubes only
  std::uint64_t config_hash = 0;
  std::uint64_t elements = 0;
  double prf = 0.0;
  std::vector<AxisRecord> axes;
};

// Reads only the header and axis table. Throws FormatError.
FileHeader read_header(const std::filesystem::path& path);

// Writes go to "<path>.tmp-<pid>" and are renamed over `path` when complete.
void write_cube(const std::filesystem::path& path, const DataCube& cube,
                SampleType dtype = SampleType::complex64);
DataCube read_cube(const std::filesystem::path& path);

// Invalid cells are stored as (NaN, state code); reading restores the state.
void write_map(const std::filesystem::path& path, const IntegrationMap& map,
               SampleType dtype = SampleType::complex64);
IntegrationMap read_map(const std::filesystem::path& path);

// Writes `bytes` to `path` through a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

struct AxisFix {
  AxisKind kind;
  double value;
};

// Parses "speed=800", "r=21000", ... Throws UsageError.
AxisFix parse_axis_fix(std::string_view s);

// 2-D magnitude plane of a map after fixing all other axes to their nearest
// grid plane. Empty optionals mark invalid cells.
struct MapSlice {
  Axis rows;
  Axis cols;
  std::vector<std::optional<double>> values;  // rows.count x cols.count, row-major
  std::vector<std::size_t> fixed_index;       // per map axis; SIZE_MAX for the free axes

  std::optional<double> at(std::size_t i, std::size_t j) const { return values[i * cols.count + j]; }
};

// The two free axes are the first two unfixed axes in map order. Throws
// BoundsError when a value lies more than half a step outside its axis and
// UsageError when the fixes do not leave exactly two free axes (a rank-1 map
// yields a single row).
MapSlice slice_map(const IntegrationMap& map, const std::vector<AxisFix>& fixes);

// First row: "<row axis>\<col axis>", then the column values. Each following
// row starts with its row value. Empty fields for invalid cells.
void write_slice_csv(std::ostream& out, const MapSlice& slice, bool decibels);
void write_slice_csv(const std::filesystem::path& path, const MapSlice& slice, bool decibels);

// snr_db,<method>,... one row per SNR point.
void write_pd_csv(std::ostream& out, const std::vector<PdCurve>& curves);
void write_pd_csv(const std::filesystem::path& path, const std::vector<PdCurve>& curves);

std::string detection_json(const Detection& det, const SearchGrid& grid, std::uint64_t config_hash);
void write_detections_jsonl(std::ostream& out, const std::vector<Detection>& dets, const SearchGrid& grid,
                            std::uint64_t config_hash);

std::string format_hash(std::uint64_t h);  // "0x" followed by 16 hex digits

}  // namespace ltci
