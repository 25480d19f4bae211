#include <doctest.h>

#include <cmath>
#include <numbers>

#include "evdeform/deform.hpp"
#include "evdeform/errors.hpp"

using namespace evdeform;

namespace {

CenterTrajectory line(std::int32_t id, double u, double v, std::size_t n, double du_per_sample = 0.0) {
  CenterTrajectory t{id, {}};
  for (std::size_t i = 0; i < n; ++i) t.samples.push_back({Micros(i) * 1000, u + du_per_sample * double(i), v, false});
  return t;
}

std::vector<double> sine(double amp, double hz, std::size_t n, Micros period_us) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = amp * std::sin(2 * std::numbers::pi * hz * double(i) * double(period_us) * 1e-6);
  return v;
}

// Naive centred moving average, truncated at the ends.
std::vector<double> detrend_oracle(const std::vector<double>& x, std::size_t half) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double sum = 0;
    int n = 0;
    for (std::size_t j = 0; j < x.size(); ++j)
      if (j + half >= i && j <= i + half) {
        sum += x[j];
        ++n;
      }
    out[i] = x[i] - sum / n;
  }
  return out;
}

double interior_peak(const std::vector<double>& x, std::size_t half) {
  double m = 0;
  for (std::size_t i = half; i + half < x.size(); ++i) m = std::max(m, std::abs(x[i]));
  return m;
}

}  // namespace

TEST_CASE("calibration") {
  const auto a = line(0, 100.0, 50.0, 20), b = line(1, 600.0, 50.0, 20);
  const auto cal = calibrate(a, b, 1.0);
  CHECK(cal.pixel_separation == doctest::Approx(500.0));
  CHECK(cal.magnification == doctest::Approx(0.002));
  CHECK(cal.samples == 20);
  CHECK(cal.separation_std == doctest::Approx(0.0));

  const auto moved = calibrate(line(0, 100.0, 50.0, 20, 0.5), line(1, 600.0, 50.0, 20, 0.5), 1.0);
  CHECK(moved.magnification == doctest::Approx(cal.magnification));

  const auto window = calibrate(a, b, 1.0, 5000, 9000);
  CHECK(window.samples == 5);
}

TEST_CASE("calibration errors") {
  const auto a = line(0, 100.0, 50.0, 5);
  CHECK_THROWS_AS(calibrate(a, a, 1.0), StageError);
  CHECK_THROWS_AS(calibrate(a, line(1, 200.0, 50.0, 5), 0.0), ConfigError);
  CHECK_THROWS_AS(calibrate(a, CenterTrajectory{1, {}}, 1.0), StageError);
  auto stale = line(1, 200.0, 50.0, 5);
  for (auto& s : stale.samples) s.stale = true;
  CHECK_THROWS_AS(calibrate(a, stale, 1.0), StageError);
}

TEST_CASE("pixel to metric") {
  Calibration cal{1.0, 200.0, 0.005, 0.0, 10};
  auto t = line(0, 10.0, 20.0, 12);
  t.samples.back().u = 20.0;
  const auto s = to_metric(t, cal, 10);
  CHECK(s.u0 == 10.0);
  CHECK(s.samples[0].dx == 0.0);
  CHECK(s.samples.back().du == 10.0);
  CHECK(s.samples.back().dx == doctest::Approx(0.05));
  CHECK(to_metric(CenterTrajectory{}, cal, 10).samples.empty());
}

TEST_CASE("detrend: constant series goes to zero") {
  const std::vector<double> c(3000, 4.25);
  for (double v : highpass_detrend(c, 1000, 1.0)) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("detrend matches a naive moving average") {
  std::vector<double> x;
  for (int i = 0; i < 300; ++i) x.push_back(std::sin(i * 0.37) + 0.01 * i * i);
  const auto ours = highpass_detrend(x, 1000, 10.0);  // window 100 -> half 50
  const auto ref = detrend_oracle(x, 50);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(ours[i] == doctest::Approx(ref[i]).epsilon(1e-9));
}

TEST_CASE("detrend frequency response") {
  const std::size_t n = 8000, half = 500;
  const double f_dt = 0.25 * 1e-3, N = 2.0 * half + 1;
  const double expected = 1.0 - std::sin(std::numbers::pi * f_dt * N) / (N * std::sin(std::numbers::pi * f_dt));

  const auto slow = highpass_detrend(sine(1.0, 0.25, n, 1000), 1000, 1.0);
  CHECK(interior_peak(slow, half) <= 0.1);
  CHECK(interior_peak(slow, half) == doctest::Approx(expected).epsilon(0.01));

  const auto fast = highpass_detrend(sine(1.0, 50.0, n, 1000), 1000, 1.0);
  CHECK(std::abs(interior_peak(fast, half) - 1.0) <= 0.02);
}

TEST_CASE("detrend errors") {
  CHECK_THROWS_AS(highpass_detrend(std::vector<double>(10, 0.0), 1000, 1.0), DataError);
  CHECK_THROWS_AS(highpass_detrend(std::vector<double>(10, 0.0), 1000, 0.0), ConfigError);
}

TEST_CASE("vibration statistics of a pure sine") {
  for (int k : {1, 7, 125}) {
    const auto x = sine(2.0, 50.0, std::size_t(k) * 20, 1000);
    const auto st = vibration_stats(x, 1000);
    CHECK(st.mean == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(st.range == doctest::Approx(4.0));
    CHECK(st.std_dev == doctest::Approx(2.0 / std::numbers::sqrt2));
    CHECK(st.oscillation_count == k);
    CHECK(st.dominant_freq == doctest::Approx(50.0));
    CHECK(st.spectral_peak_freq == doctest::Approx(50.0));
    CHECK_FALSE(st.frequency_mismatch);
  }
}

TEST_CASE("vibration statistics edge cases") {
  const auto st = vibration_stats(std::vector<double>(100, 0.0), 1000);
  CHECK(st.mean == 0.0);
  CHECK(st.range == 0.0);
  CHECK(st.oscillation_count == 0);
  CHECK_THROWS_AS(vibration_stats(std::vector<double>(3, 0.0), 1000), DataError);

  DisplacementSeries s;
  s.samples = {{0, 0, 0, 0, 0}, {1000, 0, 0, 0, 0}, {2500, 0, 0, 0, 0}, {3500, 0, 0, 0, 0}};
  CHECK_THROWS_AS(vibration_stats(s, Axis::X), DataError);
}
