#pragma once

#include <cstdint>
#include <vector>

#include "evdeform/event.hpp"

namespace evdeform {

struct TrajectorySample {
  Micros t = 0;
  double u = 0.0;  // column, px
  double v = 0.0;  // row, px
  bool stale = false;
};

/// Cluster mean of one marker sampled on a fixed time grid.
struct CenterTrajectory {
  std::int32_t marker_id = 0;
  std::vector<TrajectorySample> samples;
};

struct DisplacementSample {
  Micros t = 0;
  double du = 0.0;  // px
  double dv = 0.0;  // px
  double dx = 0.0;  // m
  double dy = 0.0;  // m
};

/// Pixel and metric displacement of one marker relative to `u0`, `v0`.
/// Every sample satisfies dx == magnification * du and dy == magnification * dv.
struct DisplacementSeries {
  std::int32_t marker_id = 0;
  double u0 = 0.0;
  double v0 = 0.0;
  double magnification = 0.0;  // m / px
  std::vector<DisplacementSample> samples;
};

}  // namespace evdeform
