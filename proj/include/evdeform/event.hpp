#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace evdeform {

/// Timestamps are integer microseconds everywhere in the pipeline.
using Micros = std::int64_t;

/// One asynchronous brightness-change sample. `s` is 1 for a brightness
/// increase and 0 for a decrease.
struct Event {
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  Micros t = 0;
  std::uint8_t s = 0;

  friend bool operator==(const Event&, const Event&) = default;
};

struct StreamMeta {
  std::uint32_t sensor_width = 1280;
  std::uint32_t sensor_height = 720;
  /// Span covered by the events: last timestamp + 1, or 0 for an empty stream.
  Micros duration = 0;
  std::size_t count = 0;

  friend bool operator==(const StreamMeta&, const StreamMeta&) = default;
};

struct EventStream {
  std::vector<Event> events;
  StreamMeta meta;

  friend bool operator==(const EventStream&, const EventStream&) = default;
};

enum class LabelClass : std::uint8_t { BlinkSignal, Motion, BackgroundNoise, ThermalNoise };

/// Ground-truth provenance of a synthetic event. `marker_id` is set exactly
/// when the class is BlinkSignal or Motion.
struct GroundTruthLabel {
  LabelClass cls = LabelClass::BackgroundNoise;
  std::optional<std::int32_t> marker_id;

  friend bool operator==(const GroundTruthLabel&, const GroundTruthLabel&) = default;

  bool is_noise() const {
    return cls == LabelClass::BackgroundNoise || cls == LabelClass::ThermalNoise;
  }
};

/// Events plus (optionally) one label per event. `labels` is either empty or
/// index-aligned with `stream.events`.
struct LabeledStream {
  EventStream stream;
  std::vector<GroundTruthLabel> labels;

  bool has_labels() const { return !labels.empty(); }
};

/// Keep-mask over a stream: 1 = kept, 0 = removed.
using Mask = std::vector<std::uint8_t>;

/// Result of a filter stage: the kept/removed split plus the keep-mask it
/// came from, indexed by the input stream.
struct Partition {
  EventStream kept;
  EventStream removed;
  Mask mask;
};

/// Sorts by timestamp (stable on ties), checks bounds and corrects `count`
/// and `duration`. Throws DataError on negative timestamps, out-of-bounds
/// pixels or polarity other than 0/1.
EventStream validate_stream(std::vector<Event> events, StreamMeta meta);

/// Same as above, permuting the labels alongside the events.
LabeledStream validate_stream(LabeledStream labeled);

/// Events with their timestamps quantised to bins. The original timestamp
/// stays in `events[i].t`; `bin_t[i]` is floor(t / bin_width) * bin_width.
struct BinnedStream {
  std::span<const Event> events;
  std::vector<Micros> bin_t;
};

BinnedStream bin_timestamps(std::span<const Event> events, Micros bin_width);

/// Sub-stream of the entries whose mask byte is set, preserving order.
EventStream select(const EventStream& stream, const Mask& mask, bool keep = true);
LabeledStream select(const LabeledStream& stream, const Mask& mask, bool keep = true);

std::string to_string(LabelClass cls);
std::optional<LabelClass> label_class_from_string(std::string_view name);

}  // namespace evdeform
