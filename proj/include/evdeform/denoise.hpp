#pragma once

#include "evdeform/event.hpp"

namespace evdeform {

struct DenoiseParams {
  int n_th = 5;           // minimum events per timestamp bin
  int t_x = 2;            // px, inclusive
  int t_y = 2;            // px, inclusive
  Micros t_t = 300;       // us, inclusive
  Micros bin_width = 100; // us

  void validate() const;
};

/// Keep-mask of the count filter: an event survives iff its timestamp bin
/// holds at least n_th events (counted over the whole sensor).
Mask coarse_count_mask(std::span<const Event> events, const DenoiseParams& params);

/// Keep-mask of the correlation filter: an event survives iff some other event
/// lies within t_x columns, t_y rows and t_t microseconds (all inclusive).
/// Polarity is ignored. `events` must be time-sorted and inside the sensor.
Mask spatiotemporal_mask(std::span<const Event> events, const StreamMeta& meta,
                         const DenoiseParams& params);

Partition coarse_count_filter(const EventStream& stream, const DenoiseParams& params);
Partition spatiotemporal_filter(const EventStream& stream, const DenoiseParams& params);

/// Count filter, then the correlation filter evaluated against the survivors
/// only. The mask indexes the original stream.
Partition denoise_two_stage(const EventStream& stream, const DenoiseParams& params);

}  // namespace evdeform
