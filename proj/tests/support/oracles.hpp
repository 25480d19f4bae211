#pragma once
// Brute-force reference implementations shared by the unit and acceptance
// tests. They are deliberately naive and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <random>
#include <vector>

#include "evdeform/event.hpp"

namespace oracle {

using evdeform::Event;
using evdeform::Mask;
using evdeform::Micros;

inline Micros floor_bin(Micros t, Micros bw) {
  Micros q = t / bw;
  if (t % bw != 0 && t < 0) --q;
  return q * bw;
}

// Histogram of bin counts, then keep events whose bin reaches n_th.
inline Mask coarse(const std::vector<Event>& events, int n_th, Micros bw) {
  std::map<Micros, int> hist;
  for (const auto& e : events) ++hist[floor_bin(e.t, bw)];
  Mask m(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) m[i] = hist[floor_bin(events[i].t, bw)] >= n_th;
  return m;
}

// O(n^2) neighbour search: kept iff some other event is within the box.
inline Mask spatiotemporal(const std::vector<Event>& events, int tx, int ty, Micros tt) {
  Mask m(events.size(), 0);
  for (std::size_t i = 0; i < events.size(); ++i)
    for (std::size_t j = 0; j < events.size(); ++j) {
      if (i == j) continue;
      if (std::abs(int(events[i].x) - int(events[j].x)) <= tx && std::abs(int(events[i].y) - int(events[j].y)) <= ty &&
          std::llabs(events[i].t - events[j].t) <= tt) {
        m[i] = 1;
        break;
      }
    }
  return m;
}

struct Moments {
  double mean_x = 0, mean_y = 0, var_x = 0, var_y = 0;
};

// Two-pass population mean and variance.
template <typename Points>
Moments moments(const Points& pts) {
  Moments r;
  const double n = double(pts.size());
  for (const auto& p : pts) {
    r.mean_x += p.x;
    r.mean_y += p.y;
  }
  r.mean_x /= n;
  r.mean_y /= n;
  for (const auto& p : pts) {
    r.var_x += (p.x - r.mean_x) * (p.x - r.mean_x);
    r.var_y += (p.y - r.mean_y) * (p.y - r.mean_y);
  }
  r.var_x /= n;
  r.var_y /= n;
  return r;
}

// Uniform random events in a w x h window over [0, span), sorted by time.
inline std::vector<Event> random_events(std::size_t n, std::uint64_t seed, int w, int h, Micros span) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dx(0, w - 1), dy(0, h - 1), ds(0, 1);
  std::uniform_int_distribution<Micros> dt(0, span - 1);
  std::vector<Event> ev(n);
  for (auto& e : ev) e = Event{std::uint16_t(dx(rng)), std::uint16_t(dy(rng)), dt(rng), std::uint8_t(ds(rng))};
  std::stable_sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
  return ev;
}

}  // namespace oracle
