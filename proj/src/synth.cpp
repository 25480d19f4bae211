#include "evdeform/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "evdeform/errors.hpp"

namespace evdeform {
namespace {

// Each noise/LED source draws from its own mt19937_64 seeded with
// seed_seq{seed_lo, seed_hi, source_id}, so adding a source never shifts the
// sequence of another.
class SourceRng {
 public:
  SourceRng(std::uint64_t seed, std::uint32_t source_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      source_id};
    engine_.seed(seq);
  }
  // Uniform in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::uint64_t below(std::uint64_t n) {
    return std::min<std::uint64_t>(static_cast<std::uint64_t>(uniform() * n), n - 1);
  }
  std::uint8_t bit() { return static_cast<std::uint8_t>(engine_() >> 63); }
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

 private:
  std::mt19937_64 engine_;
};

constexpr std::uint32_t kBackgroundSource = 1000;
constexpr std::uint32_t kHotPlacementSource = 2000;
constexpr std::uint32_t kHotPixelSourceBase = 3000;

struct Sink {
  LabeledStream& out;
  Micros duration;
  void emit(std::uint16_t x, std::uint16_t y, Micros t, std::uint8_t s, GroundTruthLabel label) {
    if (t < 0 || t >= duration) return;
    out.stream.events.push_back(Event{x, y, t, s});
    out.labels.push_back(label);
  }
};

using PixelSet = std::vector<std::uint32_t>;  // sorted keys y * width + x

bool disk_inside(PointF c, double r, const StreamMeta& meta) {
  return std::floor(c.x - r) >= 0 && std::floor(c.y - r) >= 0 &&
         std::ceil(c.x + r) <= meta.sensor_width - 1.0 &&
         std::ceil(c.y + r) <= meta.sensor_height - 1.0;
}

PixelSet ring_pixels(PointF c, double r_inner, double r_outer, const StreamMeta& meta) {
  PixelSet set;
  const int x0 = static_cast<int>(std::floor(c.x - r_outer));
  const int x1 = static_cast<int>(std::ceil(c.x + r_outer));
  const int y0 = static_cast<int>(std::floor(c.y - r_outer));
  const int y1 = static_cast<int>(std::ceil(c.y + r_outer));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (x < 0 || y < 0 || x >= int(meta.sensor_width) || y >= int(meta.sensor_height)) continue;
      const double d2 = (x - c.x) * (x - c.x) + (y - c.y) * (y - c.y);
      if (d2 <= r_outer * r_outer && (r_inner < 0 || d2 > r_inner * r_inner))
        set.push_back(static_cast<std::uint32_t>(y) * meta.sensor_width + static_cast<std::uint32_t>(x));
    }
  }
  std::sort(set.begin(), set.end());
  return set;
}

PixelSet disk_pixels(PointF c, double r, const StreamMeta& meta) { return ring_pixels(c, -1.0, r, meta); }

void validate(const SceneSpec& scene) {
  if (scene.duration_us <= 0) throw ConfigError("scene duration must be > 0");
  if (scene.jitter_us < 1) throw ConfigError("jitter_us must be >= 1");
  if (scene.motion_tick_us < 1) throw ConfigError("motion_tick_us must be >= 1");
  if (scene.meta.sensor_width == 0 || scene.meta.sensor_height == 0 ||
      scene.meta.sensor_width > 0xFFFF || scene.meta.sensor_height > 0xFFFF)
    throw ConfigError("sensor geometry must be within 1..65535");
  for (const auto& led : scene.leds) {
    if (!(led.blink_hz > 0) || !(led.radius > 0) || led.duty_light <= 0 || led.duty_dark <= 0)
      throw ConfigError("LED needs blink_hz > 0, radius > 0 and positive duty components");
    if (led.events_per_edge_per_pixel < 1) throw ConfigError("events_per_edge_per_pixel must be >= 1");
    if (led.halo_probability < 0 || led.halo_probability > 1)
      throw ConfigError("halo_probability must be within [0, 1]");
  }
  const auto& tr = scene.trajectory;
  if (tr.kind == TrajectorySpec::Kind::Sinusoid && !(tr.freq_hz > 0))
    throw ConfigError("sinusoid freq_hz must be > 0");
  if (tr.kind == TrajectorySpec::Kind::Step && tr.ramp_us < 0) throw ConfigError("ramp_us must be >= 0");
  const auto& n = scene.noise;
  if (n.background_rate < 0 || n.hot_pixel_rate < 0 || n.hot_pixel_count < 0)
    throw ConfigError("noise rates must be >= 0");
}

std::vector<Micros> motion_ticks(const SceneSpec& scene) {
  const auto& tr = scene.trajectory;
  std::vector<Micros> ticks;
  switch (tr.kind) {
    case TrajectorySpec::Kind::Static:
      break;
    case TrajectorySpec::Kind::Step:
      if (tr.ramp_us == 0) {
        ticks.push_back(tr.at_us);
      } else {
        for (Micros t = tr.at_us + scene.motion_tick_us; t < tr.at_us + tr.ramp_us; t += scene.motion_tick_us)
          ticks.push_back(t);
        ticks.push_back(tr.at_us + tr.ramp_us);
      }
      break;
    case TrajectorySpec::Kind::Sinusoid:
      for (Micros t = scene.motion_tick_us; t < scene.duration_us; t += scene.motion_tick_us) ticks.push_back(t);
      break;
  }
  std::erase_if(ticks, [&](Micros t) { return t < 0 || t >= scene.duration_us; });
  return ticks;
}

// Emits blink and motion events for one LED; returns the first time its disk
// leaves the sensor, or -1.
Micros generate_led(const SceneSpec& scene, const LedSpec& led, std::uint32_t source, Sink& sink) {
  const auto& meta = scene.meta;
  SourceRng rng(scene.seed, source);
  const GroundTruthLabel blink{LabelClass::BlinkSignal, led.marker_id};
  const GroundTruthLabel motion{LabelClass::Motion, led.marker_id};
  const double reach = std::max(led.radius, led.halo_radius);

  auto center_at = [&](Micros t) {
    auto off = scene.trajectory.offset_at(t);
    return PointF{led.center.x + off.x, led.center.y + off.y};
  };

  auto emit_set = [&](const PixelSet& set, Micros t0, std::uint8_t s, const GroundTruthLabel& label,
                      int per_pixel) {
    for (auto key : set) {
      const auto x = static_cast<std::uint16_t>(key % meta.sensor_width);
      const auto y = static_cast<std::uint16_t>(key / meta.sensor_width);
      for (int k = 0; k < per_pixel; ++k)
        sink.emit(x, y, t0 + static_cast<Micros>(rng.below(scene.jitter_us)), s, label);
    }
  };

  // Action timeline: motion ticks (kind 0) run before edges (kind 1) at equal times.
  struct Action {
    Micros t;
    int kind;
    std::uint8_t polarity;
  };
  std::vector<Action> actions;
  for (auto t : motion_ticks(scene)) actions.push_back({t, 0, 0});
  const double period = led.period_us();
  for (long k = 0;; ++k) {
    const auto on = static_cast<Micros>(std::llround(k * period));
    if (on >= scene.duration_us) break;
    actions.push_back({on, 1, 1});
    const auto off = static_cast<Micros>(std::llround(k * period + led.light_us()));
    if (off < scene.duration_us) actions.push_back({off, 1, 0});
  }
  std::stable_sort(actions.begin(), actions.end(), [](const Action& a, const Action& b) {
    return a.t != b.t ? a.t < b.t : a.kind < b.kind;
  });

  Micros violation = disk_inside(center_at(0), reach, meta) ? -1 : 0;
  bool lit = false;
  PixelSet lit_set;

  auto move_to = [&](Micros t) {
    if (!lit) return;
    auto now = disk_pixels(center_at(t), led.radius, meta);
    PixelSet entering, leaving;
    std::set_difference(now.begin(), now.end(), lit_set.begin(), lit_set.end(), std::back_inserter(entering));
    std::set_difference(lit_set.begin(), lit_set.end(), now.begin(), now.end(), std::back_inserter(leaving));
    emit_set(entering, t, 1, motion, led.events_per_edge_per_pixel);
    emit_set(leaving, t, 0, motion, led.events_per_edge_per_pixel);
    lit_set = std::move(now);
  };

  for (const auto& a : actions) {
    const auto c = center_at(a.t);
    if (violation < 0 && !disk_inside(c, reach, meta)) violation = a.t;
    if (violation >= 0) continue;
    if (a.kind == 0) {
      move_to(a.t);
      continue;
    }
    if (a.polarity == 1) {
      lit = true;
      lit_set = disk_pixels(c, led.radius, meta);
    } else {
      move_to(a.t);
    }
    emit_set(lit_set, a.t, a.polarity, blink, led.events_per_edge_per_pixel);
    if (led.halo_radius > led.radius && led.halo_probability > 0) {
      for (auto key : ring_pixels(c, led.radius, led.halo_radius, meta)) {
        if (rng.uniform() >= led.halo_probability) continue;
        sink.emit(static_cast<std::uint16_t>(key % meta.sensor_width),
                  static_cast<std::uint16_t>(key / meta.sensor_width),
                  a.t + static_cast<Micros>(rng.below(scene.jitter_us)), a.polarity, blink);
      }
    }
    if (a.polarity == 0) {
      lit = false;
      lit_set.clear();
    }
  }
  return violation;
}

void generate_noise(const SceneSpec& scene, Sink& sink) {
  const auto& meta = scene.meta;
  const double pixels = double(meta.sensor_width) * meta.sensor_height;
  const double duration = static_cast<double>(scene.duration_us);

  if (scene.noise.background_rate > 0) {
    SourceRng rng(scene.seed, kBackgroundSource);
    const double rate_per_us = scene.noise.background_rate * 1e-6;
    for (double t = rng.exponential(rate_per_us); t < duration; t += rng.exponential(rate_per_us)) {
      const auto key = rng.below(static_cast<std::uint64_t>(pixels));
      sink.emit(static_cast<std::uint16_t>(key % meta.sensor_width),
                static_cast<std::uint16_t>(key / meta.sensor_width), static_cast<Micros>(t), rng.bit(),
                GroundTruthLabel{LabelClass::BackgroundNoise, std::nullopt});
    }
  }

  if (scene.noise.hot_pixel_count > 0 && scene.noise.hot_pixel_rate > 0) {
    SourceRng placement(scene.seed, kHotPlacementSource);
    const double rate_per_us = scene.noise.hot_pixel_rate * 1e-6;
    for (int h = 0; h < scene.noise.hot_pixel_count; ++h) {
      const auto key = placement.below(static_cast<std::uint64_t>(pixels));
      const auto x = static_cast<std::uint16_t>(key % meta.sensor_width);
      const auto y = static_cast<std::uint16_t>(key / meta.sensor_width);
      SourceRng rng(scene.seed, kHotPixelSourceBase + static_cast<std::uint32_t>(h));
      for (double t = rng.exponential(rate_per_us); t < duration; t += rng.exponential(rate_per_us))
        sink.emit(x, y, static_cast<Micros>(t), rng.bit(),
                  GroundTruthLabel{LabelClass::ThermalNoise, std::nullopt});
    }
  }
}

}  // namespace

TrajectorySpec TrajectorySpec::step(PointF offset, Micros at, Micros ramp) {
  TrajectorySpec t;
  t.kind = Kind::Step;
  t.offset_px = offset;
  t.at_us = at;
  t.ramp_us = ramp;
  return t;
}

TrajectorySpec TrajectorySpec::sinusoid(double amplitude_px, double freq_hz, Axis axis, Micros phase_origin_us) {
  TrajectorySpec t;
  t.kind = Kind::Sinusoid;
  t.amplitude_px = amplitude_px;
  t.freq_hz = freq_hz;
  t.axis = axis;
  t.at_us = phase_origin_us;
  return t;
}

PointF TrajectorySpec::offset_at(Micros t) const {
  switch (kind) {
    case Kind::Static:
      return {};
    case Kind::Step: {
      if (t < at_us) return {};
      if (ramp_us == 0 || t >= at_us + ramp_us) return offset_px;
      const double f = static_cast<double>(t - at_us) / static_cast<double>(ramp_us);
      return {offset_px.x * f, offset_px.y * f};
    }
    case Kind::Sinusoid: {
      const double d = amplitude_px * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(t - at_us) * 1e-6);
      return axis == Axis::X ? PointF{d, 0.0} : PointF{0.0, d};
    }
  }
  return {};
}

LabeledStream synth_scene(const SceneSpec& scene) {
  validate(scene);
  LabeledStream out;
  out.stream.meta = scene.meta;
  Sink sink{out, scene.duration_us};

  Micros first_violation = -1;
  for (std::size_t i = 0; i < scene.leds.size(); ++i) {
    auto v = generate_led(scene, scene.leds[i], static_cast<std::uint32_t>(i + 1), sink);
    if (v >= 0 && (first_violation < 0 || v < first_violation)) first_violation = v;
  }
  if (first_violation >= 0) {
    std::ostringstream os;
    os << "LED leaves sensor bounds at t = " << first_violation << " us";
    throw StageError(os.str());
  }
  generate_noise(scene, sink);
  return validate_stream(std::move(out));
}

FilterScore eval_filter(const std::vector<GroundTruthLabel>& labels, const Mask& kept) {
  if (labels.size() != kept.size()) throw DataError("mask length does not match label count");
  FilterScore score;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool removed = !kept[i];
    switch (labels[i].cls) {
      case LabelClass::BlinkSignal:
        ++score.signal_total;
        score.signal_removed += removed;
        break;
      case LabelClass::Motion:
        ++score.motion_total;
        score.motion_removed += removed;
        break;
      default:
        ++score.noise_total;
        score.noise_removed += removed;
    }
  }
  auto rate = [](std::size_t num, std::size_t den) { return den ? double(num) / double(den) : 0.0; };
  score.noise_removal_rate = rate(score.noise_removed, score.noise_total);
  score.signal_loss_rate = rate(score.signal_removed, score.signal_total);
  score.motion_removal_rate = rate(score.motion_removed, score.motion_total);
  return score;
}

namespace scenes {

std::vector<LedSpec> rod_pair(PointF left, double separation_px, double blink_hz) {
  LedSpec a;
  a.center = left;
  a.blink_hz = blink_hz;
  a.marker_id = 0;
  LedSpec b = a;
  b.center = {left.x + separation_px, left.y};
  b.marker_id = 1;
  return {a, b};
}

NoiseSpec standard_noise() { return NoiseSpec{5000.0, 5, 1000.0}; }

}  // namespace scenes
}  // namespace evdeform
