#pragma once

#include <cstdint>
#include <optional>

#include "evdeform/event.hpp"

namespace evdeform {

/// OF: positive-to-negative polarity reversal, FO: negative-to-positive.
enum class ReversalDirection { OF, FO };

/// Polarity-reversal record of one pixel. The first event seen at a pixel is
/// booked as a reversal into its polarity so the first blink edge anchors the
/// period estimate of its direction.
struct PixelHistory {
  std::optional<std::uint8_t> last_polarity;
  std::optional<Micros> last_of_reversal_t;
  std::optional<Micros> prev_of_reversal_t;
  std::optional<Micros> last_fo_reversal_t;
  std::optional<Micros> prev_fo_reversal_t;
  int of_reversals = 0;
  int fo_reversals = 0;

  /// Books the event; returns the reversal direction when it starts a new
  /// same-polarity run.
  std::optional<ReversalDirection> observe(const Event& e);
};

/// 1e6 / (t_recent - t_previous) Hz for the two latest reversals of one
/// direction; absent with fewer than two. Coincident reversals give +inf.
std::optional<double> reversal_frequency(const PixelHistory& history, ReversalDirection direction);

struct BlinkGateParams {
  double f_led = 100.0;       // Hz
  double f_th = 20.0;         // Hz, half-width of the accepted band
  int warmup_reversals = 2;   // same-direction reversals before estimates count
  std::size_t max_buffered = 4096;  // undecided events held per pixel
  bool keep_unresolved = true;      // fate of runs that never get an estimate

  void validate() const;
  bool in_band(double f) const { return f >= f_led - f_th && f <= f_led + f_th; }
};

struct GateStats {
  std::size_t pixels = 0;
  std::size_t runs = 0;
  std::size_t unresolved_events = 0;  // kept or removed by keep_unresolved
  std::size_t evicted_events = 0;     // dropped on buffer overflow (removed)
};

/// Per-pixel motion-event rejection. Each run of same-polarity events at a
/// pixel is judged by the reversal frequency measured at its own start
/// (against the previous run of that polarity) and, if that fails or is not
/// yet available, at the start of the next run of that polarity. A run is
/// kept when either estimate falls in [f_led - f_th, f_led + f_th], removed
/// when an estimate exists and none does, and follows `keep_unresolved`
/// otherwise.
Partition gate_stream(const EventStream& stream, const BlinkGateParams& params,
                      GateStats* stats = nullptr);

}  // namespace evdeform
