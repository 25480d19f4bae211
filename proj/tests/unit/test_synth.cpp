#include <doctest.h>

#include <cmath>
#include <set>

#include "evdeform/errors.hpp"
#include "evdeform/synth.hpp"

using namespace evdeform;

namespace {

SceneSpec one_led(Micros duration) {
  SceneSpec s;
  s.leds = {LedSpec{.center = {100.0, 100.0}}};
  s.duration_us = duration;
  return s;
}

std::size_t disk_area(PointF c, double r) {
  std::size_t n = 0;
  for (int y = 0; y < 400; ++y)
    for (int x = 0; x < 400; ++x)
      n += std::hypot(x - c.x, y - c.y) <= r;
  return n;
}

}  // namespace

TEST_CASE("one static LED over 10 ms: one ON and one OFF burst") {
  const auto s = synth_scene(one_led(10'000));
  const auto area = disk_area({100.0, 100.0}, 8.0);
  std::size_t on = 0, off = 0;
  for (std::size_t i = 0; i < s.stream.events.size(); ++i) {
    const auto& e = s.stream.events[i];
    CHECK(s.labels[i].cls == LabelClass::BlinkSignal);
    CHECK(s.labels[i].marker_id == 0);
    if (e.s == 1) {
      CHECK(e.t < 200);
      ++on;
    } else {
      CHECK(e.t >= 4000);
      CHECK(e.t < 4200);
      ++off;
    }
  }
  CHECK(on == area);
  CHECK(off == area);
}

TEST_CASE("background noise count is Poisson") {
  SceneSpec s;
  s.noise.background_rate = 1000.0;
  s.duration_us = 1'000'000;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    s.seed = seed;
    const auto out = synth_scene(s);
    CHECK(std::abs(double(out.stream.events.size()) - 1000.0) <= 4.0 * std::sqrt(1000.0));
    for (const auto& l : out.labels) CHECK(l.cls == LabelClass::BackgroundNoise);
  }
}

TEST_CASE("hot pixels repeat at fixed locations") {
  SceneSpec s;
  s.noise = NoiseSpec{0.0, 3, 2000.0};
  const auto out = synth_scene(s);
  std::set<std::pair<int, int>> where;
  for (const auto& e : out.stream.events) where.insert({e.x, e.y});
  CHECK(where.size() <= 3);
  CHECK(std::abs(double(out.stream.events.size()) - 6000.0) <= 4.0 * std::sqrt(6000.0));
  for (const auto& l : out.labels) CHECK(l.cls == LabelClass::ThermalNoise);
}

TEST_CASE("disabled sources produce no motion or noise") {
  auto s = one_led(200'000);
  s.leds = scenes::rod_pair();
  const auto out = synth_scene(s);
  for (const auto& l : out.labels) CHECK(l.cls == LabelClass::BlinkSignal);
}

TEST_CASE("a step produces motion events for the moving marker") {
  auto s = one_led(100'000);
  s.trajectory = TrajectorySpec::step({5.0, 0.0}, 52'000);
  const auto out = synth_scene(s);
  std::size_t motion = 0;
  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    if (out.labels[i].cls != LabelClass::Motion) continue;
    ++motion;
    CHECK(out.stream.events[i].t >= 52'000);
    CHECK(out.stream.events[i].t < 52'200);
  }
  CHECK(motion > 0);
}

TEST_CASE("determinism and seed sensitivity") {
  SceneSpec s;
  s.leds = scenes::rod_pair();
  s.noise = scenes::standard_noise();
  s.duration_us = 200'000;
  s.trajectory = TrajectorySpec::sinusoid(2.0, 20.0, Axis::Y);
  const auto a = synth_scene(s), b = synth_scene(s);
  CHECK(a.stream == b.stream);
  CHECK(a.labels == b.labels);
  s.seed = 2;
  CHECK_FALSE(synth_scene(s).stream == a.stream);
}

TEST_CASE("trajectory offsets") {
  const auto st = TrajectorySpec::step({10.0, -4.0}, 1000, 1000);
  CHECK(st.offset_at(999).x == 0.0);
  CHECK(st.offset_at(1500).x == doctest::Approx(5.0));
  CHECK(st.offset_at(1500).y == doctest::Approx(-2.0));
  CHECK(st.offset_at(5000).x == 10.0);
  const auto sn = TrajectorySpec::sinusoid(3.0, 50.0, Axis::Y, 5000);
  CHECK(sn.offset_at(5000).y == doctest::Approx(0.0));
  CHECK(sn.offset_at(10000).y == doctest::Approx(3.0));
  CHECK(sn.offset_at(10000).x == 0.0);
}

TEST_CASE("LED leaving the sensor names the time") {
  auto s = one_led(100'000);
  s.trajectory = TrajectorySpec::step({-95.0, 0.0}, 30'000);
  CHECK_THROWS_WITH_AS(synth_scene(s), doctest::Contains("30000"), StageError);
}

TEST_CASE("invalid specs") {
  auto s = one_led(1000);
  s.jitter_us = 0;
  CHECK_THROWS_AS(synth_scene(s), ConfigError);
  s = one_led(0);
  CHECK_THROWS_AS(synth_scene(s), ConfigError);
  s = one_led(1000);
  s.leds[0].blink_hz = 0;
  CHECK_THROWS_AS(synth_scene(s), ConfigError);
}

TEST_CASE("eval_filter") {
  std::vector<GroundTruthLabel> labels{{LabelClass::BackgroundNoise, std::nullopt},
                                       {LabelClass::BackgroundNoise, std::nullopt},
                                       {LabelClass::ThermalNoise, std::nullopt},
                                       {LabelClass::BlinkSignal, 0},
                                       {LabelClass::BlinkSignal, 0},
                                       {LabelClass::BlinkSignal, 1}};
  auto all = eval_filter(labels, Mask(6, 1));
  CHECK(all.noise_removal_rate == 0.0);
  CHECK(all.signal_loss_rate == 0.0);
  CHECK(all.motion_removal_rate == 0.0);
  auto none = eval_filter(labels, Mask(6, 0));
  CHECK(none.noise_removal_rate == 1.0);
  CHECK(none.signal_loss_rate == 1.0);
  auto some = eval_filter(labels, Mask{0, 1, 0, 1, 0, 1});
  CHECK(some.noise_removal_rate == doctest::Approx(2.0 / 3.0));
  CHECK(some.signal_loss_rate == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(eval_filter(labels, Mask(5, 1)), DataError);
}
