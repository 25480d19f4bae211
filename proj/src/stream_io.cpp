#include "evdeform/stream_io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "evdeform/errors.hpp"

namespace evdeform {
namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'E', 'V', 'D', 'F'};
constexpr std::string_view kSeriesHeader = "t_us,u_px,v_px,dx_mm,dy_mm";

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(const char* p) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return static_cast<T>(v);
}

template <typename T>
void append_int(std::string& out, T value) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, end);
}

void append_double(std::string& out, double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, end);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    parts.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

[[noreturn]] void bad_line(std::size_t line_no, std::string_view why) {
  std::ostringstream os;
  os << "line " << line_no << ": " << why;
  throw DataError(os.str());
}

std::string format_label(const GroundTruthLabel& label) {
  std::string s = to_string(label.cls);
  if (label.marker_id) {
    s.push_back(':');
    append_int(s, *label.marker_id);
  }
  return s;
}

std::optional<GroundTruthLabel> parse_label(std::string_view text) {
  auto colon = text.find(':');
  auto cls = label_class_from_string(text.substr(0, colon));
  if (!cls) return std::nullopt;
  GroundTruthLabel label{*cls, std::nullopt};
  const bool needs_id = *cls == LabelClass::BlinkSignal || *cls == LabelClass::Motion;
  if (colon != std::string_view::npos) {
    std::int32_t id = 0;
    if (!parse_number(text.substr(colon + 1), id)) return std::nullopt;
    label.marker_id = id;
  }
  if (needs_id != label.marker_id.has_value()) return std::nullopt;
  return label;
}

void parse_geometry(std::string_view comment, StreamMeta& meta) {
  // "# evdf width=W height=H"
  std::istringstream is{std::string(comment.substr(1))};
  std::string word;
  is >> word;
  if (word != "evdf") return;
  while (is >> word) {
    auto eq = word.find('=');
    if (eq == std::string::npos) continue;
    std::uint32_t value = 0;
    if (!parse_number(std::string_view(word).substr(eq + 1), value)) continue;
    if (word.compare(0, eq, "width") == 0) meta.sensor_width = value;
    if (word.compare(0, eq, "height") == 0) meta.sensor_height = value;
  }
}

}  // namespace

EventFileFormat format_for_path(const fs::path& path) {
  auto ext = path.extension().string();
  return (ext == ".bin" || ext == ".evdf") ? EventFileFormat::BinaryPacked
                                           : EventFileFormat::TextCsv;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return std::move(os).str();
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed for " + path.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw DataError("cannot rename into " + path.string());
  }
}

std::string encode_csv(const EventStream& stream, std::span<const GroundTruthLabel> labels) {
  if (!labels.empty() && labels.size() != stream.events.size())
    throw DataError("label count does not match event count");
  std::string out;
  out.reserve(stream.events.size() * 24 + 64);
  out += "# evdf width=";
  append_int(out, stream.meta.sensor_width);
  out += " height=";
  append_int(out, stream.meta.sensor_height);
  out.push_back('\n');
  for (std::size_t i = 0; i < stream.events.size(); ++i) {
    const auto& e = stream.events[i];
    append_int(out, e.t);
    out.push_back(',');
    append_int(out, e.x);
    out.push_back(',');
    append_int(out, e.y);
    out.push_back(',');
    append_int(out, int(e.s));
    if (!labels.empty()) {
      out.push_back(',');
      out += format_label(labels[i]);
    }
    out.push_back('\n');
  }
  return out;
}

LabeledStream decode_csv(std::string_view text, const StreamMeta& defaults) {
  LabeledStream result;
  result.stream.meta = defaults;
  std::size_t line_no = 0;
  std::optional<bool> labelled;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      parse_geometry(line, result.stream.meta);
      continue;
    }
    auto cols = split(line, ',');
    if (cols.size() != 4 && cols.size() != 5) bad_line(line_no, "expected 4 or 5 columns");
    bool has_label = cols.size() == 5;
    if (labelled && *labelled != has_label) bad_line(line_no, "label column present on some lines only");
    labelled = has_label;

    std::int64_t t = 0;
    std::uint32_t x = 0, y = 0, s = 0;
    if (!parse_number(cols[0], t)) bad_line(line_no, "bad timestamp");
    if (!parse_number(cols[1], x) || x > 0xFFFF) bad_line(line_no, "bad x");
    if (!parse_number(cols[2], y) || y > 0xFFFF) bad_line(line_no, "bad y");
    if (!parse_number(cols[3], s) || s > 1) bad_line(line_no, "bad polarity");
    result.stream.events.push_back(Event{static_cast<std::uint16_t>(x),
                                         static_cast<std::uint16_t>(y), t,
                                         static_cast<std::uint8_t>(s)});
    if (has_label) {
      auto label = parse_label(cols[4]);
      if (!label) bad_line(line_no, "bad label");
      result.labels.push_back(*label);
    }
  }
  try {
    return validate_stream(std::move(result));
  } catch (const DataError& e) {
    throw DataError(std::string("invalid stream: ") + e.what());
  }
}

std::string encode_binary(const EventStream& stream) {
  std::string out;
  out.reserve(kBinaryHeaderBytes + stream.events.size() * kBinaryRecordBytes);
  out.append(kMagic, 4);
  put_le<std::uint32_t>(out, kBinaryVersion);
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(stream.meta.sensor_width));
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(stream.meta.sensor_height));
  put_le<std::uint32_t>(out, 0);
  for (const auto& e : stream.events) {
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(e.t));
    put_le<std::uint16_t>(out, e.x);
    put_le<std::uint16_t>(out, e.y);
    put_le<std::uint8_t>(out, e.s);
  }
  return out;
}

EventStream decode_binary(std::string_view bytes) {
  if (bytes.size() < kBinaryHeaderBytes) throw DataError("offset 0: truncated header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw DataError("offset 0: bad magic, expected EVDF");
  auto version = get_le<std::uint32_t>(bytes.data() + 4);
  if (version != kBinaryVersion)
    throw DataError("offset 4: unsupported format version " + std::to_string(version));
  StreamMeta meta;
  meta.sensor_width = get_le<std::uint16_t>(bytes.data() + 8);
  meta.sensor_height = get_le<std::uint16_t>(bytes.data() + 10);

  const auto body = bytes.size() - kBinaryHeaderBytes;
  if (body % kBinaryRecordBytes != 0) {
    auto offset = kBinaryHeaderBytes + body / kBinaryRecordBytes * kBinaryRecordBytes;
    throw DataError("offset " + std::to_string(offset) + ": truncated record");
  }
  std::vector<Event> events(body / kBinaryRecordBytes);
  for (std::size_t i = 0; i < events.size(); ++i) {
    const std::size_t offset = kBinaryHeaderBytes + i * kBinaryRecordBytes;
    const char* p = bytes.data() + offset;
    auto t = get_le<std::uint64_t>(p);
    auto s = get_le<std::uint8_t>(p + 12);
    if (t > static_cast<std::uint64_t>(INT64_MAX))
      throw DataError("offset " + std::to_string(offset) + ": timestamp out of range");
    if (s > 1) throw DataError("offset " + std::to_string(offset + 12) + ": bad polarity");
    events[i] = Event{get_le<std::uint16_t>(p + 8), get_le<std::uint16_t>(p + 10),
                      static_cast<Micros>(t), s};
  }
  try {
    return validate_stream(std::move(events), meta);
  } catch (const DataError& e) {
    throw DataError(std::string("invalid stream: ") + e.what());
  }
}

LabeledStream read_events(const fs::path& path, EventFileFormat format, const StreamMeta& defaults) {
  const auto bytes = read_file(path);
  try {
    if (format == EventFileFormat::BinaryPacked) return LabeledStream{decode_binary(bytes), {}};
    return decode_csv(bytes, defaults);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::size_t write_events(const fs::path& path, const EventStream& stream, EventFileFormat format,
                         std::span<const GroundTruthLabel> labels) {
  const auto bytes =
      format == EventFileFormat::BinaryPacked ? encode_binary(stream) : encode_csv(stream, labels);
  write_file_atomic(path, bytes);
  return bytes.size();
}

std::size_t write_series(const fs::path& path, const DisplacementSeries& series) {
  std::string out(kSeriesHeader);
  out.push_back('\n');
  for (const auto& s : series.samples) {
    append_int(out, s.t);
    out.push_back(',');
    append_double(out, series.u0 + s.du);
    out.push_back(',');
    append_double(out, series.v0 + s.dv);
    out.push_back(',');
    append_double(out, s.dx * 1e3);
    out.push_back(',');
    append_double(out, s.dy * 1e3);
    out.push_back('\n');
  }
  write_file_atomic(path, out);
  return out.size();
}

std::size_t write_trajectory(const fs::path& path, const CenterTrajectory& traj) {
  std::string out(kSeriesHeader);
  out.push_back('\n');
  for (const auto& s : traj.samples) {
    append_int(out, s.t);
    out.push_back(',');
    append_double(out, s.u);
    out.push_back(',');
    append_double(out, s.v);
    out += ",,\n";
  }
  write_file_atomic(path, out);
  return out.size();
}

std::vector<SeriesRow> read_series(const fs::path& path) {
  const auto text = read_file(path);
  std::vector<SeriesRow> rows;
  std::size_t pos = 0, line_no = 0;
  std::string_view view(text);
  while (pos < view.size()) {
    auto end = view.find('\n', pos);
    if (end == std::string_view::npos) end = view.size();
    auto line = view.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1) {
      if (line != kSeriesHeader) bad_line(line_no, "expected series header");
      continue;
    }
    if (line.empty()) continue;
    auto cols = split(line, ',');
    if (cols.size() != 5) bad_line(line_no, "expected 5 columns");
    SeriesRow row;
    if (!parse_number(cols[0], row.t)) bad_line(line_no, "bad t_us");
    if (!parse_number(cols[1], row.u)) bad_line(line_no, "bad u_px");
    if (!parse_number(cols[2], row.v)) bad_line(line_no, "bad v_px");
    double value = 0.0;
    if (!cols[3].empty()) {
      if (!parse_number(cols[3], value)) bad_line(line_no, "bad dx_mm");
      row.dx_mm = value;
    }
    if (!cols[4].empty()) {
      if (!parse_number(cols[4], value)) bad_line(line_no, "bad dy_mm");
      row.dy_mm = value;
    }
    rows.push_back(row);
  }
  if (line_no == 0) throw DataError(path.string() + ": empty series file");
  return rows;
}

CenterTrajectory trajectory_from_rows(const std::vector<SeriesRow>& rows, std::int32_t marker_id) {
  CenterTrajectory traj{marker_id, {}};
  traj.samples.reserve(rows.size());
  for (const auto& r : rows) traj.samples.push_back(TrajectorySample{r.t, r.u, r.v, false});
  return traj;
}

}  // namespace evdeform
