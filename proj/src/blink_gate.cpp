#include "evdeform/blink_gate.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <unordered_map>

#include "evdeform/errors.hpp"

namespace evdeform {
namespace {

struct PendingRun {
  std::uint8_t polarity = 0;
  bool had_estimate = false;  // an out-of-band estimate already exists
  std::deque<std::uint32_t> events;
};

struct PixelGate {
  PixelHistory history;
  std::deque<PendingRun> pending;  // oldest first
  bool current_kept = false;       // the open run was accepted at its start
  std::size_t buffered = 0;
};

Partition to_partition(const EventStream& stream, Mask mask) {
  Partition p;
  p.kept = select(stream, mask, true);
  p.removed = select(stream, mask, false);
  p.mask = std::move(mask);
  return p;
}

}  // namespace

std::optional<ReversalDirection> PixelHistory::observe(const Event& e) {
  if (last_polarity && *last_polarity == e.s) return std::nullopt;
  last_polarity = e.s;
  if (e.s == 0) {
    prev_of_reversal_t = last_of_reversal_t;
    last_of_reversal_t = e.t;
    ++of_reversals;
    return ReversalDirection::OF;
  }
  prev_fo_reversal_t = last_fo_reversal_t;
  last_fo_reversal_t = e.t;
  ++fo_reversals;
  return ReversalDirection::FO;
}

std::optional<double> reversal_frequency(const PixelHistory& h, ReversalDirection direction) {
  const auto& recent = direction == ReversalDirection::OF ? h.last_of_reversal_t : h.last_fo_reversal_t;
  const auto& previous = direction == ReversalDirection::OF ? h.prev_of_reversal_t : h.prev_fo_reversal_t;
  if (!recent || !previous) return std::nullopt;
  const Micros dt = *recent - *previous;
  if (dt <= 0) return std::numeric_limits<double>::infinity();
  return 1e6 / static_cast<double>(dt);
}

void BlinkGateParams::validate() const {
  if (!(f_led > 0)) throw ConfigError("f_led must be > 0");
  if (!(f_th > 0) || !(f_th < f_led)) throw ConfigError("f_th must satisfy 0 < f_th < f_led");
  if (warmup_reversals < 2) throw ConfigError("warmup_reversals must be >= 2");
  if (max_buffered < 1) throw ConfigError("max_buffered must be >= 1");
}

Partition gate_stream(const EventStream& stream, const BlinkGateParams& params, GateStats* stats) {
  params.validate();
  const auto& events = stream.events;
  Mask mask(events.size(), 0);
  std::unordered_map<std::uint32_t, PixelGate> pixels;
  GateStats local;

  auto settle = [&](PixelGate& px, PendingRun& run, bool keep) {
    for (auto i : run.events) mask[i] = keep;
    px.buffered -= run.events.size();
    run.events.clear();
  };

  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    auto& px = pixels[static_cast<std::uint32_t>(e.y) * stream.meta.sensor_width + e.x];

    if (auto dir = px.history.observe(e)) {
      ++local.runs;
      const int count = *dir == ReversalDirection::OF ? px.history.of_reversals : px.history.fo_reversals;
      std::optional<bool> accepted;
      if (count >= params.warmup_reversals) {
        if (auto f = reversal_frequency(px.history, *dir)) accepted = params.in_band(*f);
      }
      if (accepted) {
        // Forward estimate for every earlier undecided run of this polarity.
        for (auto& run : px.pending)
          if (run.polarity == e.s) settle(px, run, *accepted);
        std::erase_if(px.pending, [](const PendingRun& r) { return r.events.empty(); });
      }
      px.current_kept = accepted.value_or(false);
      if (!px.current_kept) px.pending.push_back(PendingRun{e.s, accepted.has_value(), {}});
    }

    if (px.current_kept) {
      mask[i] = 1;
      continue;
    }
    px.pending.back().events.push_back(static_cast<std::uint32_t>(i));
    if (++px.buffered > params.max_buffered) {
      // Oldest undecided event is dropped as removed.
      auto& oldest = *std::find_if(px.pending.begin(), px.pending.end(),
                                   [](const PendingRun& r) { return !r.events.empty(); });
      mask[oldest.events.front()] = 0;
      oldest.events.pop_front();
      --px.buffered;
      ++local.evicted_events;
    }
  }

  for (auto& [key, px] : pixels) {
    for (auto& run : px.pending) {
      if (run.had_estimate) {
        settle(px, run, false);
      } else {
        local.unresolved_events += run.events.size();
        settle(px, run, params.keep_unresolved);
      }
    }
  }
  local.pixels = pixels.size();
  if (stats) *stats = local;
  return to_partition(stream, std::move(mask));
}

}  // namespace evdeform
