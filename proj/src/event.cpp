#include "evdeform/event.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "evdeform/errors.hpp"

namespace evdeform {
namespace {

void check_event(const Event& e, const StreamMeta& meta, std::size_t index) {
  if (e.t < 0) {
    std::ostringstream os;
    os << "event " << index << ": negative timestamp " << e.t;
    throw DataError(os.str());
  }
  if (e.x >= meta.sensor_width || e.y >= meta.sensor_height) {
    std::ostringstream os;
    os << "event " << index << ": pixel (" << e.x << ", " << e.y << ") outside "
       << meta.sensor_width << "x" << meta.sensor_height << " sensor";
    throw DataError(os.str());
  }
  if (e.s > 1) {
    std::ostringstream os;
    os << "event " << index << ": polarity " << int(e.s) << " is not 0 or 1";
    throw DataError(os.str());
  }
}

void finish_meta(const std::vector<Event>& events, StreamMeta& meta) {
  meta.count = events.size();
  meta.duration = events.empty() ? 0 : events.back().t + 1;
}

}  // namespace

EventStream validate_stream(std::vector<Event> events, StreamMeta meta) {
  for (std::size_t i = 0; i < events.size(); ++i) check_event(events[i], meta, i);
  std::stable_sort(events.begin(), events.end(),
                   [](const Event& a, const Event& b) { return a.t < b.t; });
  finish_meta(events, meta);
  return EventStream{std::move(events), meta};
}

LabeledStream validate_stream(LabeledStream labeled) {
  if (!labeled.has_labels()) {
    labeled.stream = validate_stream(std::move(labeled.stream.events), labeled.stream.meta);
    return labeled;
  }
  const auto& events = labeled.stream.events;
  if (labeled.labels.size() != events.size())
    throw DataError("label count does not match event count");
  for (std::size_t i = 0; i < events.size(); ++i) check_event(events[i], labeled.stream.meta, i);

  std::vector<std::size_t> order(events.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return events[a].t < events[b].t; });

  LabeledStream out;
  out.stream.meta = labeled.stream.meta;
  out.stream.events.reserve(order.size());
  out.labels.reserve(order.size());
  for (auto i : order) {
    out.stream.events.push_back(events[i]);
    out.labels.push_back(labeled.labels[i]);
  }
  finish_meta(out.stream.events, out.stream.meta);
  return out;
}

BinnedStream bin_timestamps(std::span<const Event> events, Micros bin_width) {
  if (bin_width < 1) throw ConfigError("bin_width must be >= 1 us");
  BinnedStream binned{events, {}};
  binned.bin_t.reserve(events.size());
  for (const auto& e : events) binned.bin_t.push_back(e.t / bin_width * bin_width);
  return binned;
}

EventStream select(const EventStream& stream, const Mask& mask, bool keep) {
  if (mask.size() != stream.events.size()) throw DataError("mask length does not match stream");
  EventStream out;
  out.meta = stream.meta;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (bool(mask[i]) == keep) out.events.push_back(stream.events[i]);
  out.meta.count = out.events.size();
  out.meta.duration = out.events.empty() ? 0 : out.events.back().t + 1;
  return out;
}

LabeledStream select(const LabeledStream& stream, const Mask& mask, bool keep) {
  LabeledStream out;
  out.stream = select(stream.stream, mask, keep);
  if (stream.has_labels()) {
    out.labels.reserve(out.stream.events.size());
    for (std::size_t i = 0; i < mask.size(); ++i)
      if (bool(mask[i]) == keep) out.labels.push_back(stream.labels[i]);
  }
  return out;
}

std::string to_string(LabelClass cls) {
  switch (cls) {
    case LabelClass::BlinkSignal: return "BLINK_SIGNAL";
    case LabelClass::Motion: return "MOTION";
    case LabelClass::BackgroundNoise: return "BACKGROUND_NOISE";
    case LabelClass::ThermalNoise: return "THERMAL_NOISE";
  }
  return "UNKNOWN";
}

std::optional<LabelClass> label_class_from_string(std::string_view name) {
  for (auto c : {LabelClass::BlinkSignal, LabelClass::Motion, LabelClass::BackgroundNoise,
                 LabelClass::ThermalNoise})
    if (to_string(c) == name) return c;
  return std::nullopt;
}

}  // namespace evdeform
