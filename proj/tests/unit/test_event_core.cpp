#include <doctest.h>

#include <map>

#include "evdeform/errors.hpp"
#include "evdeform/event.hpp"
#include "support/oracles.hpp"

using namespace evdeform;

TEST_CASE("validate_stream: empty input") {
  const auto s = validate_stream({}, StreamMeta{});
  CHECK(s.events.empty());
  CHECK(s.meta.count == 0);
  CHECK(s.meta.duration == 0);
}

TEST_CASE("validate_stream: sorts by time, stable for ties") {
  std::vector<Event> ev{{1, 1, 7, 1}, {2, 2, 3, 0}, {3, 3, 3, 1}};
  const auto s = validate_stream(ev, StreamMeta{});
  REQUIRE(s.events.size() == 3);
  CHECK(s.events[0].t == 3);
  CHECK(s.events[0].x == 2);
  CHECK(s.events[1].x == 3);
  CHECK(s.events[2].t == 7);
  CHECK(s.meta.count == 3);
  CHECK(s.meta.duration == 8);
}

TEST_CASE("validate_stream: rejects out-of-range events") {
  StreamMeta meta;
  CHECK_THROWS_AS(validate_stream({Event{1280, 0, 0, 0}}, meta), DataError);
  CHECK_THROWS_AS(validate_stream({Event{0, 720, 0, 0}}, meta), DataError);
  CHECK_THROWS_AS(validate_stream({Event{0, 0, -1, 0}}, meta), DataError);
  CHECK_THROWS_AS(validate_stream({Event{0, 0, 0, 2}}, meta), DataError);
  CHECK_NOTHROW(validate_stream({Event{1279, 719, 0, 1}}, meta));
}

TEST_CASE("validate_stream: labels follow their events") {
  LabeledStream in;
  in.stream.events = {{1, 1, 9, 1}, {2, 2, 4, 0}};
  in.labels = {{LabelClass::Motion, 0}, {LabelClass::ThermalNoise, std::nullopt}};
  const auto out = validate_stream(in);
  CHECK(out.stream.events[0].x == 2);
  CHECK(out.labels[0].cls == LabelClass::ThermalNoise);
  CHECK(out.labels[1].marker_id == 0);

  in.labels.pop_back();
  CHECK_THROWS_AS(validate_stream(in), DataError);
}

TEST_CASE("bin_timestamps") {
  std::vector<Event> ev{{0, 0, 1234, 0}, {0, 0, 1299, 0}, {0, 0, 1300, 0}};
  const auto b = bin_timestamps(ev, 100);
  CHECK(b.bin_t == std::vector<Micros>{1200, 1200, 1300});
  CHECK_THROWS_AS(bin_timestamps(ev, 0), ConfigError);

  const auto id = bin_timestamps(ev, 1);
  for (std::size_t i = 0; i < ev.size(); ++i) CHECK(id.bin_t[i] == ev[i].t);
}

TEST_CASE("bin_timestamps: populations match a histogram") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto ev = oracle::random_events(10, seed, 16, 16, 1000);
    const auto b = bin_timestamps(ev, 100);
    std::map<Micros, int> ours, ref;
    for (auto t : b.bin_t) ++ours[t];
    for (const auto& e : ev) ++ref[oracle::floor_bin(e.t, 100)];
    CHECK(ours == ref);
    CHECK(ours.size() <= 10);
  }
}

TEST_CASE("select splits by mask") {
  const auto s = validate_stream({{0, 0, 1, 0}, {1, 0, 2, 1}, {2, 0, 3, 0}}, StreamMeta{});
  const Mask m{1, 0, 1};
  const auto kept = select(s, m, true);
  const auto gone = select(s, m, false);
  CHECK(kept.events.size() == 2);
  CHECK(gone.events.size() == 1);
  CHECK(gone.events[0].x == 1);
  CHECK(kept.meta.count == 2);
  CHECK_THROWS(select(s, Mask{1}, true));
}

TEST_CASE("label class names") {
  for (auto c : {LabelClass::BlinkSignal, LabelClass::Motion, LabelClass::BackgroundNoise, LabelClass::ThermalNoise})
    CHECK(label_class_from_string(to_string(c)) == c);
  CHECK(to_string(LabelClass::BlinkSignal) == "BLINK_SIGNAL");
  CHECK_FALSE(label_class_from_string("nope").has_value());
  CHECK(GroundTruthLabel{LabelClass::ThermalNoise, std::nullopt}.is_noise());
  CHECK_FALSE(GroundTruthLabel{LabelClass::Motion, 1}.is_noise());
}
