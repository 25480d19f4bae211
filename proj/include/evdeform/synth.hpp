#pragma once

#include <cstdint>
#include <vector>

#include "evdeform/event.hpp"

namespace evdeform {

struct PointF {
  double x = 0.0;  // column
  double y = 0.0;  // row
};

/// A blinking LED disk. Pixel (x, y) belongs to the disk when its centre,
/// at integer coordinates, lies within `radius` of `center`.
struct LedSpec {
  PointF center;
  double radius = 8.0;
  double blink_hz = 100.0;
  int duty_light = 2;
  int duty_dark = 3;
  int events_per_edge_per_pixel = 1;
  std::int32_t marker_id = 0;
  /// Optional halo ring (radius, halo_radius] emitting sparse blink events.
  double halo_radius = 0.0;
  double halo_probability = 0.0;

  double period_us() const { return 1e6 / blink_hz; }
  double light_us() const { return period_us() * duty_light / (duty_light + duty_dark); }
};

enum class Axis { X, Y };

/// Common motion applied to every LED of a scene.
struct TrajectorySpec {
  enum class Kind { Static, Step, Sinusoid };
  Kind kind = Kind::Static;
  // Step: offset reached at at_us + ramp_us, moving linearly from at_us.
  PointF offset_px;
  Micros at_us = 0;
  Micros ramp_us = 0;
  // Sinusoid: amplitude * sin(2 pi f (t - at_us)) along `axis`.
  double amplitude_px = 0.0;
  double freq_hz = 0.0;
  Axis axis = Axis::X;

  static TrajectorySpec still() { return {}; }
  static TrajectorySpec step(PointF offset, Micros at, Micros ramp = 0);
  static TrajectorySpec sinusoid(double amplitude_px, double freq_hz, Axis axis, Micros phase_origin_us = 0);

  PointF offset_at(Micros t) const;
};

struct NoiseSpec {
  double background_rate = 0.0;  // events/s over the whole sensor
  int hot_pixel_count = 0;
  double hot_pixel_rate = 0.0;   // events/s per hot pixel
};

struct SceneSpec {
  std::vector<LedSpec> leds;
  TrajectorySpec trajectory;
  NoiseSpec noise;
  Micros duration_us = 1'000'000;
  StreamMeta meta;
  std::uint64_t seed = 1;
  /// Edge events are spread uniformly over [edge, edge + jitter_us).
  Micros jitter_us = 200;
  /// Time step used to sample continuous motion.
  Micros motion_tick_us = 50;
};

/// Generates a labelled, time-sorted event stream. Deterministic in `seed`.
/// Throws ConfigError on invalid specs and StageError naming the first time
/// an LED disk leaves the sensor.
LabeledStream synth_scene(const SceneSpec& scene);

struct FilterScore {
  std::size_t noise_total = 0, noise_removed = 0;
  std::size_t signal_total = 0, signal_removed = 0;
  std::size_t motion_total = 0, motion_removed = 0;
  double noise_removal_rate = 0.0;
  double signal_loss_rate = 0.0;
  double motion_removal_rate = 0.0;
};

/// Label-aware removal rates of a keep-mask. Rates with an empty class are 0.
FilterScore eval_filter(const std::vector<GroundTruthLabel>& labels, const Mask& kept);

/// Standard scenes shared by tests, the CLI and benchmarks.
namespace scenes {
/// Two 100 Hz, duty 2:3 LEDs 250 px apart on a horizontal rod.
std::vector<LedSpec> rod_pair(PointF left = {500.3, 360.6}, double separation_px = 250.0,
                              double blink_hz = 100.0);
NoiseSpec standard_noise();
}  // namespace scenes

}  // namespace evdeform
