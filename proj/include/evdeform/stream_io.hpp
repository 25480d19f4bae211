#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evdeform/event.hpp"
#include "evdeform/series.hpp"

namespace evdeform {

/// On-disk event encodings.
///
/// TextCsv: one event per line, "t,x,y,s" in decimal, with an optional fifth
/// "label" column ("BLINK_SIGNAL:0", "MOTION:1", "BACKGROUND_NOISE",
/// "THERMAL_NOISE"). Lines starting with '#' are comments; the writer emits a
/// first line "# evdf width=W height=H" so sensor geometry survives a round trip.
///
/// BinaryPacked: 16-byte little-endian header ("EVDF", u32 version, u16 width,
/// u16 height, 4 reserved bytes) followed by 13-byte records
/// (u64 t, u16 x, u16 y, u8 s). Labels are not stored.
enum class EventFileFormat { TextCsv, BinaryPacked };

inline constexpr std::uint32_t kBinaryVersion = 1;
inline constexpr std::size_t kBinaryHeaderBytes = 16;
inline constexpr std::size_t kBinaryRecordBytes = 13;

/// ".bin" / ".evdf" select BinaryPacked, anything else TextCsv.
EventFileFormat format_for_path(const std::filesystem::path& path);

/// Reads and validates a stream. For CSV files without a geometry comment the
/// sensor size is taken from `defaults`. Throws DataError with the line number
/// (CSV) or byte offset (binary) of the first malformed record.
LabeledStream read_events(const std::filesystem::path& path, EventFileFormat format,
                          const StreamMeta& defaults = {});

/// Writes atomically (temp file + rename). Returns the number of bytes written.
/// `labels` is ignored for BinaryPacked.
std::size_t write_events(const std::filesystem::path& path, const EventStream& stream,
                         EventFileFormat format, std::span<const GroundTruthLabel> labels = {});

/// In-memory encoders used by write_events (exposed for tests and benchmarks).
std::string encode_csv(const EventStream& stream, std::span<const GroundTruthLabel> labels = {});
std::string encode_binary(const EventStream& stream);
LabeledStream decode_csv(std::string_view text, const StreamMeta& defaults = {});
EventStream decode_binary(std::string_view bytes);

/// One row of the series CSV "t_us,u_px,v_px,dx_mm,dy_mm". u/v are absolute
/// centre coordinates; the metric columns are empty for plain trajectories.
struct SeriesRow {
  Micros t = 0;
  double u = 0.0;
  double v = 0.0;
  std::optional<double> dx_mm;
  std::optional<double> dy_mm;
};

std::size_t write_series(const std::filesystem::path& path, const DisplacementSeries& series);
std::size_t write_trajectory(const std::filesystem::path& path, const CenterTrajectory& traj);
std::vector<SeriesRow> read_series(const std::filesystem::path& path);

/// Trajectory view of a series file (metric columns dropped).
CenterTrajectory trajectory_from_rows(const std::vector<SeriesRow>& rows, std::int32_t marker_id);

/// Writes `bytes` to `path` via a sibling temp file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace evdeform
