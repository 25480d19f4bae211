#pragma once

#include <limits>
#include <span>
#include <vector>

#include "evdeform/series.hpp"
#include "evdeform/synth.hpp"

namespace evdeform {

/// Rigid-rod scale: magnification = rod_length / pixel_separation (m/px).
struct Calibration {
  double rod_length = 0.0;        // m
  double pixel_separation = 0.0;  // px, mean over the window
  double magnification = 0.0;     // m/px
  double separation_std = 0.0;    // px, rigidity diagnostic
  std::size_t samples = 0;
};

Calibration calibrate(const CenterTrajectory& a, const CenterTrajectory& b, double rod_length,
                      Micros from = std::numeric_limits<Micros>::min(),
                      Micros to = std::numeric_limits<Micros>::max());

/// Displacement relative to the mean of the first `reference_samples` samples.
DisplacementSeries to_metric(const CenterTrajectory& traj, const Calibration& cal,
                             std::size_t reference_samples = 10);

/// Subtracts a centred moving average. The nominal window is
/// round(1 / cutoff / sample_period) samples; the average spans
/// 2 * (window / 2) + 1 samples and is truncated at the series ends.
std::vector<double> highpass_detrend(std::span<const double> values, Micros sample_period,
                                     double cutoff_hz);
DisplacementSeries highpass_detrend(const DisplacementSeries& series, double cutoff_hz);

/// Sample period of a uniformly sampled series; throws DataError otherwise.
Micros uniform_period(const DisplacementSeries& series);

struct VibrationStats {
  double mean = 0.0;
  double range = 0.0;
  double std_dev = 0.0;           // population
  int oscillation_count = 0;      // positive-going zero crossings
  double dominant_freq = 0.0;     // Hz, crossings / duration
  double spectral_peak_freq = 0.0;
  bool frequency_mismatch = false;  // the two estimates differ by > 5 %
};

VibrationStats vibration_stats(std::span<const double> values, Micros sample_period);
/// Statistics of the metric displacement along one axis (metres).
VibrationStats vibration_stats(const DisplacementSeries& series, Axis axis);

}  // namespace evdeform
