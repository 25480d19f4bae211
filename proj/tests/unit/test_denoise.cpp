#include <doctest.h>

#include "evdeform/denoise.hpp"
#include "evdeform/errors.hpp"
#include "evdeform/synth.hpp"
#include "support/oracles.hpp"

using namespace evdeform;

namespace {

EventStream stream_of(std::vector<Event> ev, std::uint32_t w = 64, std::uint32_t h = 64) {
  return validate_stream(std::move(ev), StreamMeta{w, h, 0, 0});
}

std::size_t count(const Mask& m) {
  std::size_t n = 0;
  for (auto k : m) n += k;
  return n;
}

}  // namespace

TEST_CASE("coarse filter: sparse bin removed, n_th = 1 keeps all") {
  DenoiseParams p;
  const auto s = stream_of({{1, 1, 10, 0}, {2, 2, 20, 1}, {3, 3, 30, 0}});
  CHECK(count(coarse_count_mask(s.events, p)) == 0);
  p.n_th = 1;
  CHECK(count(coarse_count_mask(s.events, p)) == 3);
}

TEST_CASE("coarse filter: bin reaching n_th is kept") {
  DenoiseParams p;
  std::vector<Event> ev;
  for (int i = 0; i < 5; ++i) ev.push_back({std::uint16_t(i), 0, 100 + i, 1});
  ev.push_back({0, 0, 250, 1});
  const auto m = coarse_count_mask(stream_of(ev).events, p);
  CHECK(m == Mask{1, 1, 1, 1, 1, 0});
}

TEST_CASE("coarse filter equals the histogram oracle") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed)
    for (Micros bw : {1, 50, 100, 333}) {
      DenoiseParams p;
      p.bin_width = bw;
      const auto ev = oracle::random_events(2000, seed, 64, 64, 40'000);
      CHECK(coarse_count_mask(ev, p) == oracle::coarse(ev, p.n_th, bw));
    }
}

TEST_CASE("spatiotemporal: isolated event removed, close pair kept") {
  DenoiseParams p;
  const auto lone = stream_of({{10, 10, 0, 1}});
  CHECK(spatiotemporal_filter(lone, p).removed.events.size() == 1);

  const auto pair = stream_of({{10, 10, 0, 1}, {10, 10, 50, 0}});
  CHECK(spatiotemporal_filter(pair, p).kept.events.size() == 2);
}

TEST_CASE("spatiotemporal: thresholds are inclusive") {
  DenoiseParams p;
  CHECK(count(spatiotemporal_mask(stream_of({{10, 10, 0, 1}, {12, 12, 300, 1}}).events, StreamMeta{64, 64}, p)) == 2);
  CHECK(count(spatiotemporal_mask(stream_of({{10, 10, 0, 1}, {13, 10, 0, 1}}).events, StreamMeta{64, 64}, p)) == 0);
  CHECK(count(spatiotemporal_mask(stream_of({{10, 10, 0, 1}, {10, 13, 0, 1}}).events, StreamMeta{64, 64}, p)) == 0);
  CHECK(count(spatiotemporal_mask(stream_of({{10, 10, 0, 1}, {10, 10, 301, 1}}).events, StreamMeta{64, 64}, p)) == 0);
}

TEST_CASE("spatiotemporal: sensor corners and duplicates") {
  DenoiseParams p;
  const auto s = stream_of({{0, 0, 5, 1}, {1, 1, 5, 0}, {63, 63, 9, 1}, {63, 63, 9, 1}});
  CHECK(spatiotemporal_mask(s.events, s.meta, p) == Mask{1, 1, 1, 1});
}

TEST_CASE("spatiotemporal equals the O(n^2) oracle") {
  const StreamMeta meta{64, 64, 0, 0};
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    DenoiseParams p;
    p.t_x = 1 + int(seed % 3);
    p.t_y = 1 + int(seed % 2);
    p.t_t = 100 * Micros(seed);
    const auto ev = oracle::random_events(10'000, seed, 64, 64, 60'000);
    CHECK(spatiotemporal_mask(ev, meta, p) == oracle::spatiotemporal(ev, p.t_x, p.t_y, p.t_t));
  }
}

TEST_CASE("two-stage removes at least as much as spatiotemporal alone") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto s = stream_of(oracle::random_events(3000, seed, 32, 32, 20'000), 32, 32);
    DenoiseParams p;
    p.n_th = 2 + int(seed % 5);
    const auto two = denoise_two_stage(s, p);
    const auto st = spatiotemporal_filter(s, p);
    CHECK(two.removed.events.size() >= st.removed.events.size());
    for (std::size_t i = 0; i < two.mask.size(); ++i)
      if (two.mask[i]) CHECK(st.mask[i]);
    CHECK(two.kept.events.size() + two.removed.events.size() == s.events.size());
  }
}

TEST_CASE("noise-free LED stream loses nothing") {
  SceneSpec scene;
  scene.leds = scenes::rod_pair();
  scene.duration_us = 300'000;
  const auto s = synth_scene(scene);
  const auto p = denoise_two_stage(s.stream, DenoiseParams{});
  CHECK(eval_filter(s.labels, p.mask).signal_loss_rate == 0.0);
}

TEST_CASE("pure background noise is removed") {
  SceneSpec scene;
  scene.noise.background_rate = 1000.0;
  const auto s = synth_scene(scene);
  const auto p = denoise_two_stage(s.stream, DenoiseParams{});
  CHECK(eval_filter(s.labels, p.mask).noise_removal_rate >= 0.99);
}

TEST_CASE("empty stream and invalid params") {
  const auto empty = stream_of({});
  CHECK(denoise_two_stage(empty, DenoiseParams{}).kept.events.empty());
  DenoiseParams p;
  p.bin_width = 0;
  CHECK_THROWS_AS(denoise_two_stage(empty, p), ConfigError);
  p = DenoiseParams{};
  p.t_t = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}
