#include "evdeform/deform.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>

#include "evdeform/errors.hpp"

namespace evdeform {

Calibration calibrate(const CenterTrajectory& a, const CenterTrajectory& b, double rod_length,
                      Micros from, Micros to) {
  if (!(rod_length > 0)) throw ConfigError("rod_length must be > 0");
  std::vector<double> sep;
  std::size_t i = 0, j = 0;
  while (i < a.samples.size() && j < b.samples.size()) {
    const auto& sa = a.samples[i];
    const auto& sb = b.samples[j];
    if (sa.t < sb.t) {
      ++i;
    } else if (sb.t < sa.t) {
      ++j;
    } else {
      if (!sa.stale && !sb.stale && sa.t >= from && sa.t <= to)
        sep.push_back(std::hypot(sa.u - sb.u, sa.v - sb.v));
      ++i;
      ++j;
    }
  }
  if (sep.empty()) throw StageError("calibration: trajectories share no samples");
  double sum = 0.0;
  for (double s : sep) sum += s;
  const double mean = sum / sep.size();
  if (!(mean > 0) || !std::isfinite(mean)) throw StageError("calibration: zero or invalid marker separation");
  double ss = 0.0;
  for (double s : sep) ss += (s - mean) * (s - mean);
  return Calibration{rod_length, mean, rod_length / mean, std::sqrt(ss / sep.size()), sep.size()};
}

DisplacementSeries to_metric(const CenterTrajectory& traj, const Calibration& cal,
                             std::size_t reference_samples) {
  DisplacementSeries out;
  out.marker_id = traj.marker_id;
  out.magnification = cal.magnification;
  if (traj.samples.empty()) return out;
  const std::size_t n = std::clamp<std::size_t>(reference_samples, 1, traj.samples.size());
  for (std::size_t k = 0; k < n; ++k) {
    out.u0 += traj.samples[k].u;
    out.v0 += traj.samples[k].v;
  }
  out.u0 /= double(n);
  out.v0 /= double(n);
  out.samples.reserve(traj.samples.size());
  for (const auto& s : traj.samples) {
    const double du = s.u - out.u0, dv = s.v - out.v0;
    out.samples.push_back(DisplacementSample{s.t, du, dv, cal.magnification * du, cal.magnification * dv});
  }
  return out;
}

std::vector<double> highpass_detrend(std::span<const double> values, Micros sample_period, double cutoff_hz) {
  if (!(cutoff_hz > 0)) throw ConfigError("cutoff_hz must be > 0");
  if (sample_period < 1) throw ConfigError("sample_period must be >= 1");
  const auto window = static_cast<std::size_t>(std::llround(1e6 / cutoff_hz / static_cast<double>(sample_period)));
  if (window > values.size()) throw DataError("detrend window larger than series");
  const std::size_t half = window / 2;
  const std::size_t n = values.size();

  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + values[i];
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i - std::min(half, i);
    const std::size_t hi = std::min(n - 1, i + half);
    const double avg = (prefix[hi + 1] - prefix[lo]) / double(hi - lo + 1);
    out[i] = values[i] - avg;
  }
  return out;
}

Micros uniform_period(const DisplacementSeries& series) {
  const auto& s = series.samples;
  if (s.size() < 2) throw DataError("series too short to have a sample period");
  const Micros period = s[1].t - s[0].t;
  if (period <= 0) throw DataError("series timestamps not increasing");
  for (std::size_t i = 2; i < s.size(); ++i)
    if (s[i].t - s[i - 1].t != period) throw DataError("series is not uniformly sampled");
  return period;
}

DisplacementSeries highpass_detrend(const DisplacementSeries& series, double cutoff_hz) {
  const Micros period = uniform_period(series);
  const std::size_t n = series.samples.size();
  std::vector<double> du(n), dv(n);
  for (std::size_t i = 0; i < n; ++i) {
    du[i] = series.samples[i].du;
    dv[i] = series.samples[i].dv;
  }
  du = highpass_detrend(du, period, cutoff_hz);
  dv = highpass_detrend(dv, period, cutoff_hz);
  DisplacementSeries out = series;
  for (std::size_t i = 0; i < n; ++i) {
    auto& s = out.samples[i];
    s.du = du[i];
    s.dv = dv[i];
    s.dx = series.magnification * du[i];
    s.dy = series.magnification * dv[i];
  }
  return out;
}

namespace {

double spectral_peak(std::span<const double> values, double mean, Micros sample_period) {
  const int n = static_cast<int>(values.size());
  auto* in = static_cast<double*>(fftw_malloc(sizeof(double) * n));
  auto* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
  for (int i = 0; i < n; ++i) in[i] = values[i] - mean;
  fftw_plan plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
  fftw_execute(plan);
  int best = 0;
  double best_mag = 0.0;
  for (int k = 1; k <= n / 2; ++k) {
    const double mag = out[k][0] * out[k][0] + out[k][1] * out[k][1];
    if (mag > best_mag) {
      best_mag = mag;
      best = k;
    }
  }
  fftw_destroy_plan(plan);
  fftw_free(in);
  fftw_free(out);
  return best / (n * static_cast<double>(sample_period) * 1e-6);
}

}  // namespace

VibrationStats vibration_stats(std::span<const double> values, Micros sample_period) {
  if (values.size() < 4) throw DataError("vibration statistics need at least 4 samples");
  if (sample_period < 1) throw ConfigError("sample_period must be >= 1");
  VibrationStats st;
  const double n = double(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  st.mean = sum / n;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  st.range = *hi - *lo;
  double ss = 0.0;
  for (double v : values) ss += (v - st.mean) * (v - st.mean);
  st.std_dev = std::sqrt(ss / n);
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i - 1] <= 0.0 && values[i] > 0.0) ++st.oscillation_count;
  const double duration_s = n * static_cast<double>(sample_period) * 1e-6;
  st.dominant_freq = st.oscillation_count / duration_s;
  if (st.range > 0) {
    st.spectral_peak_freq = spectral_peak(values, st.mean, sample_period);
    st.frequency_mismatch =
        std::abs(st.dominant_freq - st.spectral_peak_freq) > 0.05 * st.spectral_peak_freq;
  }
  return st;
}

VibrationStats vibration_stats(const DisplacementSeries& series, Axis axis) {
  const Micros period = uniform_period(series);
  std::vector<double> values;
  values.reserve(series.samples.size());
  for (const auto& s : series.samples) values.push_back(axis == Axis::X ? s.dx : s.dy);
  return vibration_stats(values, period);
}

}  // namespace evdeform
