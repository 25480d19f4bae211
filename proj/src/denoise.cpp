#include "evdeform/denoise.hpp"

#include <algorithm>
#include <limits>

#include "evdeform/errors.hpp"

namespace evdeform {
namespace {

constexpr Micros kNever = std::numeric_limits<Micros>::min() / 2;

Partition partition(const EventStream& stream, Mask mask) {
  Partition p;
  p.kept = select(stream, mask, true);
  p.removed = select(stream, mask, false);
  p.mask = std::move(mask);
  return p;
}

// One sweep of the correlation test. `last` holds, per pixel, the timestamp
// of the most recently visited event; an event is supported when any pixel of
// its neighbourhood was visited within t_t. Running the sweep forwards finds
// earlier neighbours, backwards (with negated time) later ones.
template <typename Order>
void sweep(std::span<const Event> events, const StreamMeta& meta, const DenoiseParams& p,
           std::vector<Micros>& last, Order&& order, Mask& supported) {
  const int w = static_cast<int>(meta.sensor_width);
  const int h = static_cast<int>(meta.sensor_height);
  std::fill(last.begin(), last.end(), kNever);
  for (std::size_t k = 0; k < events.size(); ++k) {
    const std::size_t i = order(k);
    const auto& e = events[i];
    const Micros t = order.time(e.t);
    if (!supported[i]) {
      const int x0 = std::max(0, e.x - p.t_x), x1 = std::min(w - 1, e.x + p.t_x);
      const int y0 = std::max(0, e.y - p.t_y), y1 = std::min(h - 1, e.y + p.t_y);
      for (int y = y0; y <= y1 && !supported[i]; ++y) {
        const Micros* row = last.data() + static_cast<std::size_t>(y) * w;
        for (int x = x0; x <= x1; ++x) {
          if (t - row[x] <= p.t_t) {
            supported[i] = 1;
            break;
          }
        }
      }
    }
    last[static_cast<std::size_t>(e.y) * w + e.x] = t;
  }
}

struct Forward {
  std::size_t operator()(std::size_t k) const { return k; }
  Micros time(Micros t) const { return t; }
};
struct Backward {
  std::size_t n;
  std::size_t operator()(std::size_t k) const { return n - 1 - k; }
  Micros time(Micros t) const { return -t; }
};

}  // namespace

void DenoiseParams::validate() const {
  if (n_th < 1) throw ConfigError("n_th must be >= 1");
  if (t_x < 1 || t_y < 1) throw ConfigError("t_x and t_y must be >= 1");
  if (t_t < 1) throw ConfigError("t_t must be >= 1");
  if (bin_width < 1) throw ConfigError("bin_width must be >= 1");
}

Mask coarse_count_mask(std::span<const Event> events, const DenoiseParams& params) {
  params.validate();
  const auto binned = bin_timestamps(events, params.bin_width);
  Mask mask(events.size(), 0);
  // Sorted input makes every bin a contiguous run.
  std::size_t begin = 0;
  while (begin < events.size()) {
    std::size_t end = begin;
    while (end < events.size() && binned.bin_t[end] == binned.bin_t[begin]) ++end;
    if (end - begin >= static_cast<std::size_t>(params.n_th))
      std::fill(mask.begin() + static_cast<std::ptrdiff_t>(begin), mask.begin() + static_cast<std::ptrdiff_t>(end), 1);
    begin = end;
  }
  return mask;
}

Mask spatiotemporal_mask(std::span<const Event> events, const StreamMeta& meta,
                         const DenoiseParams& params) {
  params.validate();
  Mask supported(events.size(), 0);
  if (events.empty()) return supported;
  std::vector<Micros> last(static_cast<std::size_t>(meta.sensor_width) * meta.sensor_height);
  sweep(events, meta, params, last, Forward{}, supported);
  sweep(events, meta, params, last, Backward{events.size()}, supported);
  return supported;
}

Partition coarse_count_filter(const EventStream& stream, const DenoiseParams& params) {
  return partition(stream, coarse_count_mask(stream.events, params));
}

Partition spatiotemporal_filter(const EventStream& stream, const DenoiseParams& params) {
  return partition(stream, spatiotemporal_mask(stream.events, stream.meta, params));
}

Partition denoise_two_stage(const EventStream& stream, const DenoiseParams& params) {
  auto mask = coarse_count_mask(stream.events, params);
  std::vector<Event> survivors;
  std::vector<std::size_t> index;
  survivors.reserve(stream.events.size());
  index.reserve(stream.events.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    survivors.push_back(stream.events[i]);
    index.push_back(i);
  }
  const auto refined = spatiotemporal_mask(survivors, stream.meta, params);
  for (std::size_t k = 0; k < index.size(); ++k) mask[index[k]] = refined[k];
  return partition(stream, std::move(mask));
}

}  // namespace evdeform
