#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "evdeform/errors.hpp"
#include "evdeform/stream_io.hpp"
#include "support/oracles.hpp"

using namespace evdeform;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "evdeform_unit_io";
  fs::create_directories(dir);
  return dir / name;
}

EventStream random_stream(std::size_t n, std::uint64_t seed) {
  return validate_stream(oracle::random_events(n, seed, 1280, 720, 10'000'000), StreamMeta{});
}

}  // namespace

TEST_CASE("csv: line format") {
  const auto s = validate_stream({Event{5, 7, 1000, 1}}, StreamMeta{});
  const auto text = encode_csv(s);
  CHECK(text.find("\n1000,5,7,1\n") != std::string::npos);

  const auto back = decode_csv("1000,5,7,1\n");
  REQUIRE(back.stream.events.size() == 1);
  CHECK(back.stream.events[0] == Event{5, 7, 1000, 1});
  CHECK_FALSE(back.has_labels());
}

TEST_CASE("csv: geometry comment and empty body") {
  const auto s = decode_csv("# evdf width=64 height=32\n");
  CHECK(s.stream.events.empty());
  CHECK(s.stream.meta.sensor_width == 64);
  CHECK(s.stream.meta.sensor_height == 32);
  CHECK_THROWS_AS(decode_csv("# evdf width=64 height=32\n0,70,0,1\n"), DataError);
}

TEST_CASE("csv: malformed lines name the line") {
  auto fails_on = [](const char* text, const char* line) {
    try {
      decode_csv(text);
    } catch (const DataError& e) {
      return std::string(e.what()).find(line) != std::string::npos;
    }
    return false;
  };
  CHECK(fails_on("1,2,3,1\n1,2,3\n", "line 2"));
  CHECK(fails_on("1,2,3,1\n\nx,2,3,1\n", "line 3"));
  CHECK(fails_on("1,2,3,5\n", "line 1"));
  CHECK(fails_on("1,2,3,1,MOTION:0\n1,2,3,1\n", "line 2"));
  CHECK(fails_on("1,2,3,1,BOGUS\n", "line 1"));
  CHECK(fails_on("1,2,3,1,BLINK_SIGNAL\n", "line 1"));
}

TEST_CASE("csv: labels round trip") {
  auto s = validate_stream({Event{1, 2, 3, 1}, Event{4, 5, 6, 0}, Event{7, 8, 9, 1}}, StreamMeta{});
  std::vector<GroundTruthLabel> labels{
      {LabelClass::BlinkSignal, 3}, {LabelClass::BackgroundNoise, std::nullopt}, {LabelClass::Motion, 0}};
  const auto back = decode_csv(encode_csv(s, labels));
  CHECK(back.stream == s);
  CHECK(back.labels == labels);
  CHECK_THROWS_AS(encode_csv(s, std::vector<GroundTruthLabel>(2)), DataError);
}

TEST_CASE("binary: sizes") {
  CHECK(encode_binary(validate_stream({}, StreamMeta{})).size() == 16);
  CHECK(encode_binary(validate_stream({Event{1, 2, 3, 1}}, StreamMeta{})).size() == 29);
}

TEST_CASE("binary: header and record errors") {
  const auto bytes = encode_binary(validate_stream({Event{1, 2, 3, 1}}, StreamMeta{}));
  CHECK_THROWS_AS(decode_binary("EVD"), DataError);
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_WITH_AS(decode_binary(bad), doctest::Contains("magic"), DataError);
  CHECK_THROWS_WITH_AS(decode_binary(bytes.substr(0, 20)), doctest::Contains("offset 16"), DataError);
  bad = bytes;
  bad[28] = 3;
  CHECK_THROWS_WITH_AS(decode_binary(bad), doctest::Contains("offset 28"), DataError);
}

TEST_CASE("files: 1e5-event round trip in both formats") {
  const auto s = random_stream(100'000, 42);
  for (auto [name, fmt] : {std::pair{"rt.csv", EventFileFormat::TextCsv}, std::pair{"rt.bin", EventFileFormat::BinaryPacked}}) {
    const auto path = scratch(name);
    CHECK(format_for_path(path) == fmt);
    const auto bytes = write_events(path, s, fmt);
    CHECK(fs::file_size(path) == bytes);
    CHECK_FALSE(fs::exists(path.string() + ".tmp"));
    CHECK(read_events(path, fmt).stream == s);
  }
}

TEST_CASE("files: unwritable or missing paths") {
  const auto s = random_stream(3, 1);
  CHECK_THROWS_AS(write_events("/nonexistent_dir/x.csv", s, EventFileFormat::TextCsv), DataError);
  CHECK_THROWS_AS(read_events("/nonexistent_dir/x.csv", EventFileFormat::TextCsv), DataError);
}

TEST_CASE("series: header, line count and 9-digit round trip") {
  DisplacementSeries ds;
  ds.u0 = 500.123456789;
  ds.v0 = 360.5;
  const auto path = scratch("series.csv");
  write_series(path, ds);
  CHECK(read_file(path) == "t_us,u_px,v_px,dx_mm,dy_mm\n");
  CHECK(read_series(path).empty());

  for (int i = 0; i < 3; ++i) ds.samples.push_back({i * 1000, 0.1 * i + 1e-7, -0.3 * i, 0.0004 * i + 1e-10, -1.2e-3 * i});
  write_series(path, ds);
  const auto text = read_file(path);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
  const auto rows = read_series(path);
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(rows[i].t == ds.samples[i].t);
    CHECK(rows[i].u == doctest::Approx(ds.u0 + ds.samples[i].du).epsilon(1e-9));
    CHECK(rows[i].v == doctest::Approx(ds.v0 + ds.samples[i].dv).epsilon(1e-9));
    CHECK(*rows[i].dx_mm == doctest::Approx(ds.samples[i].dx * 1e3).epsilon(1e-9));
    CHECK(*rows[i].dy_mm == doctest::Approx(ds.samples[i].dy * 1e3).epsilon(1e-9));
  }
}

TEST_CASE("trajectory files carry no metric columns") {
  CenterTrajectory tr{1, {{0, 10.5, 20.25, false}, {1000, 10.75, 20.0, false}}};
  const auto path = scratch("traj.csv");
  write_trajectory(path, tr);
  const auto rows = read_series(path);
  REQUIRE(rows.size() == 2);
  CHECK_FALSE(rows[0].dx_mm.has_value());
  const auto back = trajectory_from_rows(rows, 1);
  CHECK(back.marker_id == 1);
  CHECK(back.samples[1].u == 10.75);
  CHECK(back.samples[1].v == 20.0);
}
