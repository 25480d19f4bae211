#include "evdeform/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "evdeform/blink_gate.hpp"
#include "evdeform/denoise.hpp"
#include "evdeform/errors.hpp"
#include "evdeform/stream_io.hpp"

namespace evdeform {
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<GroundTruthLabel> masked_labels(const std::vector<GroundTruthLabel>& labels, const Mask& mask) {
  std::vector<GroundTruthLabel> out;
  if (labels.empty()) return out;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) out.push_back(labels[i]);
  return out;
}

void record_failure(RunReport& report, const std::string& stage, FailureKind kind, const std::string& what) {
  report.complete = false;
  report.failure = kind;
  report.failed_stage = stage;
  report.error = what;
}

// Runs `body`, translating library exceptions into a failed-stage record.
template <typename F>
bool guarded(RunReport& report, const std::string& stage, F&& body) {
  try {
    body();
    return true;
  } catch (const ConfigError& e) {
    record_failure(report, stage, FailureKind::Config, e.what());
  } catch (const DataError& e) {
    record_failure(report, stage, FailureKind::Data, e.what());
  } catch (const StageError& e) {
    record_failure(report, stage, FailureKind::Stage, e.what());
  }
  return false;
}

MarkerReport summarise(const CenterTrajectory& traj, const DisplacementSeries& series, std::size_t tail) {
  MarkerReport m;
  m.marker_id = traj.marker_id;
  m.samples = traj.samples.size();
  if (traj.samples.empty()) return m;
  double su = 0, sv = 0;
  for (const auto& s : traj.samples) {
    su += s.u;
    sv += s.v;
    m.stale_samples += s.stale;
  }
  su /= traj.samples.size();
  sv /= traj.samples.size();
  for (const auto& s : traj.samples) {
    m.jitter_u = std::max(m.jitter_u, std::abs(s.u - su));
    m.jitter_v = std::max(m.jitter_v, std::abs(s.v - sv));
  }
  const std::size_t n = std::min(tail, series.samples.size());
  for (std::size_t k = series.samples.size() - n; k < series.samples.size(); ++k) {
    m.final_dx += series.samples[k].dx;
    m.final_dy += series.samples[k].dy;
  }
  m.final_dx /= double(n);
  m.final_dy /= double(n);
  return m;
}

std::size_t peak_memory_bytes() {
  std::ifstream status("/proc/self/status");
  std::string line;
  while (std::getline(status, line)) {
    if (line.rfind("VmHWM:", 0) == 0) {
      std::istringstream is(line.substr(6));
      std::size_t kb = 0;
      is >> kb;
      return kb * 1024;
    }
  }
  return 0;
}

}  // namespace

PipelineResult run_stages(LabeledStream input, const RunConfig& config) {
  PipelineResult r;
  r.input = std::move(input);
  auto& report = r.report;
  report.config_echo = format_config(config);
  const auto& labels = r.input.labels;
  const auto& stream = r.input.stream;

  if (!guarded(report, "config", [&] { config.validate(); })) return r;

  // denoise
  StageReport st{.name = "denoise", .events_in = stream.events.size(), .score = {}};
  auto t0 = Clock::now();
  if (!guarded(report, "denoise", [&] { r.denoised = denoise_two_stage(stream, config.denoise); })) return r;
  st.seconds = seconds_since(t0);
  st.events_out = r.denoised.kept.events.size();
  if (!labels.empty()) st.score = eval_filter(labels, r.denoised.mask);
  report.stages.push_back(st);

  // gate
  st = StageReport{.name = "gate", .events_in = r.denoised.kept.events.size(), .score = {}};
  t0 = Clock::now();
  GateStats gate_stats;
  if (!guarded(report, "gate", [&] { r.gated = gate_stream(r.denoised.kept, config.gate, &gate_stats); })) return r;
  st.seconds = seconds_since(t0);
  st.events_out = r.gated.kept.events.size();
  if (!labels.empty()) st.score = eval_filter(masked_labels(labels, r.denoised.mask), r.gated.mask);
  if (gate_stats.evicted_events > 0)
    report.warnings.push_back("gate evicted " + std::to_string(gate_stats.evicted_events) + " buffered events");
  report.stages.push_back(st);

  r.kept = r.denoised.mask;
  for (std::size_t i = 0, k = 0; i < r.kept.size(); ++i)
    if (r.kept[i]) r.kept[i] = r.gated.mask[k++];

  // track
  st = StageReport{.name = "track", .events_in = r.gated.kept.events.size(), .score = {}};
  t0 = Clock::now();
  if (!guarded(report, "track", [&] { r.tracking = track(r.gated.kept, config.tracker, config.markers); })) return r;
  st.seconds = seconds_since(t0);
  st.events_out = r.tracking.admitted;
  report.stages.push_back(st);
  for (const auto& w : r.tracking.warnings) report.warnings.push_back(w);

  // measure
  st = StageReport{.name = "measure", .events_in = r.tracking.admitted, .events_out = r.tracking.admitted, .score = {}};
  t0 = Clock::now();
  const bool measured = guarded(report, "measure", [&] {
    const auto& trajs = r.tracking.trajectories;
    Calibration cal;
    if (config.magnification > 0) {
      cal = Calibration{config.rod_length, config.rod_length / config.magnification, config.magnification, 0.0, 0};
    } else {
      if (trajs.size() < 2) throw StageError("rod calibration needs two markers (or deform.magnification)");
      cal = calibrate(trajs[0], trajs[1], config.rod_length);
    }
    report.calibration = cal;
    for (const auto& traj : trajs) {
      r.series.push_back(to_metric(traj, cal, config.reference_samples));
      auto m = summarise(traj, r.series.back(), config.reference_samples);
      if (config.cutoff_hz > 0 && r.series.back().samples.size() >= 4) {
        try {
          r.detrended.push_back(highpass_detrend(r.series.back(), config.cutoff_hz));
          m.vibration_x = vibration_stats(r.detrended.back(), Axis::X);
          m.vibration_y = vibration_stats(r.detrended.back(), Axis::Y);
          for (const auto* v : {&*m.vibration_x, &*m.vibration_y})
            if (v->frequency_mismatch)
              report.warnings.push_back("marker " + std::to_string(m.marker_id) +
                                        ": zero-crossing and spectral frequencies differ by > 5%");
        } catch (const DataError& e) {
          report.warnings.push_back("marker " + std::to_string(m.marker_id) + ": no vibration statistics: " + e.what());
        }
      }
      report.markers.push_back(m);
    }
  });
  st.seconds = seconds_since(t0);
  if (measured) report.stages.push_back(st);
  return r;
}

PipelineResult run_pipeline(const RunConfig& config) {
  LabeledStream input;
  RunReport early;
  early.config_echo = format_config(config);
  bool ok = guarded(early, "config", [&] { config.validate(); });
  if (ok) {
    ok = guarded(early, config.input.empty() ? "synth" : "read", [&] {
      if (config.input.empty())
        input = synth_scene(config.scene);
      else
        input = read_events(config.input, format_for_path(config.input), config.scene.meta);
    });
  }
  PipelineResult r;
  if (ok) {
    r = run_stages(std::move(input), config);
  } else {
    r.report = early;
  }

  auto& report = r.report;
  guarded(report, "write", [&] {
    fs::create_directories(config.output_dir);
    const fs::path dir(config.output_dir);
    auto note = [&](const fs::path& p) { report.outputs.push_back(p.string()); };
    if (config.write_intermediate && report.stages.size() >= 2) {
      write_events(dir / "denoised.csv", r.denoised.kept, EventFileFormat::TextCsv,
                   masked_labels(r.input.labels, r.denoised.mask));
      note(dir / "denoised.csv");
      write_events(dir / "gated.csv", r.gated.kept, EventFileFormat::TextCsv, masked_labels(r.input.labels, r.kept));
      note(dir / "gated.csv");
    }
    for (const auto& s : r.series) {
      const auto p = dir / ("series_marker" + std::to_string(s.marker_id) + ".csv");
      write_series(p, s);
      note(p);
    }
    for (const auto& s : r.detrended) {
      const auto p = dir / ("detrended_marker" + std::to_string(s.marker_id) + ".csv");
      write_series(p, s);
      note(p);
    }
    note(dir / "report.txt");
    write_file_atomic(dir / "report.txt", format_report(report, false));
  });
  return r;
}

std::string format_report(const RunReport& report, bool include_timing) {
  std::ostringstream os;
  os.precision(10);
  os << "[run]\nstatus = " << (report.complete ? "complete" : "incomplete") << '\n';
  if (!report.complete) {
    os << "failed_stage = " << report.failed_stage << '\n';
    os << "error = " << report.error << '\n';
  }
  for (const auto& st : report.stages) {
    os << "\n[stage." << st.name << "]\n";
    os << "events_in = " << st.events_in << "\nevents_out = " << st.events_out << '\n';
    if (include_timing) os << "seconds = " << st.seconds << '\n';
    if (st.score) {
      os << "noise_removal_rate = " << st.score->noise_removal_rate << '\n';
      os << "signal_loss_rate = " << st.score->signal_loss_rate << '\n';
      os << "motion_removal_rate = " << st.score->motion_removal_rate << '\n';
    }
  }
  if (report.calibration) {
    const auto& c = *report.calibration;
    os << "\n[calibration]\nrod_length_m = " << c.rod_length << "\npixel_separation_px = " << c.pixel_separation
       << "\nmagnification_m_per_px = " << c.magnification << "\nseparation_std_px = " << c.separation_std
       << "\nsamples = " << c.samples << '\n';
  }
  for (const auto& m : report.markers) {
    os << "\n[marker." << m.marker_id << "]\n";
    os << "samples = " << m.samples << "\nstale_samples = " << m.stale_samples << '\n';
    os << "jitter_u_px = " << m.jitter_u << "\njitter_v_px = " << m.jitter_v << '\n';
    os << "final_dx_mm = " << m.final_dx * 1e3 << "\nfinal_dy_mm = " << m.final_dy * 1e3 << '\n';
    auto vib = [&](const char* axis, const std::optional<VibrationStats>& v) {
      if (!v) return;
      os << "vibration_" << axis << "_mean_mm = " << v->mean * 1e3 << '\n';
      os << "vibration_" << axis << "_range_mm = " << v->range * 1e3 << '\n';
      os << "vibration_" << axis << "_std_mm = " << v->std_dev * 1e3 << '\n';
      os << "vibration_" << axis << "_oscillations = " << v->oscillation_count << '\n';
      os << "vibration_" << axis << "_dominant_hz = " << v->dominant_freq << '\n';
      os << "vibration_" << axis << "_spectral_peak_hz = " << v->spectral_peak_freq << '\n';
    };
    vib("x", m.vibration_x);
    vib("y", m.vibration_y);
  }
  if (!report.warnings.empty()) {
    os << "\n[warnings]\n";
    for (std::size_t i = 0; i < report.warnings.size(); ++i) os << "warning." << i << " = " << report.warnings[i] << '\n';
  }
  if (!report.outputs.empty()) {
    os << "\n[outputs]\n";
    for (std::size_t i = 0; i < report.outputs.size(); ++i) os << "file." << i << " = " << report.outputs[i] << '\n';
  }
  os << "\n# configuration of this run (valid config input)\n" << report.config_echo;
  return os.str();
}

LabeledStream bench_stream(std::size_t min_events, std::uint64_t seed) {
  SceneSpec scene = RunConfig::default_scene();
  scene.seed = seed;
  for (auto& led : scene.leds) led.events_per_edge_per_pixel = 2;
  scene.duration_us = 200'000;
  const auto probe = synth_scene(scene).stream.events.size();
  scene.duration_us = static_cast<Micros>(std::ceil(1.05 * double(min_events) / double(std::max<std::size_t>(probe, 1)) * 200'000.0));
  while (true) {
    auto s = synth_scene(scene);
    if (s.stream.events.size() >= min_events) return s;
    scene.duration_us += scene.duration_us / 10 + 1;
  }
}

BenchReport bench(const EventStream& stream, const RunConfig& config) {
  BenchReport rep;
  rep.events = stream.events.size();
  auto rate = [](std::size_t n, double s) { return s > 0 ? double(n) / s : 0.0; };

  auto t0 = Clock::now();
  const auto den = denoise_two_stage(stream, config.denoise);
  double s = seconds_since(t0);
  rep.stages.push_back({"denoise", s, rate(stream.events.size(), s)});

  t0 = Clock::now();
  const auto gated = gate_stream(den.kept, config.gate);
  s = seconds_since(t0);
  rep.stages.push_back({"gate", s, rate(den.kept.events.size(), s)});

  std::optional<TrackResult> tracked;
  try {
    t0 = Clock::now();
    tracked = track(gated.kept, config.tracker, config.markers);
    s = seconds_since(t0);
    rep.stages.push_back({"track", s, rate(gated.kept.events.size(), s)});
  } catch (const StageError&) {
  }

  // Second pass must reproduce the filter outputs exactly.
  const auto den2 = denoise_two_stage(stream, config.denoise);
  const auto gated2 = gate_stream(den2.kept, config.gate);
  rep.deterministic = den.mask == den2.mask && gated.mask == gated2.mask;
  if (tracked) {
    const auto again = track(gated2.kept, config.tracker, config.markers);
    for (std::size_t k = 0; k < again.trajectories.size() && rep.deterministic; ++k) {
      const auto& a = again.trajectories[k].samples;
      const auto& b = tracked->trajectories[k].samples;
      rep.deterministic = a.size() == b.size() &&
                          std::equal(a.begin(), a.end(), b.begin(), [](const auto& x, const auto& y) {
                            return x.t == y.t && x.u == y.u && x.v == y.v && x.stale == y.stale;
                          });
    }
  }

  // Scaling: the stream followed by a time-shifted copy of itself.
  EventStream doubled;
  doubled.meta = stream.meta;
  doubled.events = stream.events;
  const Micros shift = stream.meta.duration;
  for (auto e : stream.events) {
    e.t += shift;
    doubled.events.push_back(e);
  }
  doubled.meta.count = doubled.events.size();
  doubled.meta.duration = doubled.events.empty() ? 0 : doubled.events.back().t + 1;
  auto best_of = [](int n, auto&& fn) {
    double best = 1e300;
    for (int i = 0; i < n; ++i) {
      auto start = Clock::now();
      fn();
      best = std::min(best, seconds_since(start));
    }
    return best;
  };
  const double single = best_of(3, [&] { (void)denoise_two_stage(stream, config.denoise); });
  const double twice = best_of(3, [&] { (void)denoise_two_stage(doubled, config.denoise); });
  if (single > 0 && !stream.events.empty()) rep.scaling_ratio = (twice / 2.0) / single;

  rep.peak_memory_bytes = peak_memory_bytes();
  return rep;
}

std::string format_bench(const BenchReport& r) {
  std::ostringstream os;
  os.precision(6);
  os << "[bench]\nevents = " << r.events << "\ndeterministic = " << (r.deterministic ? "true" : "false")
     << "\ndenoise_scaling_ratio = " << r.scaling_ratio << "\npeak_memory_bytes = " << r.peak_memory_bytes << '\n';
  for (const auto& st : r.stages) {
    os << "\n[bench." << st.name << "]\nseconds = " << st.seconds << "\nevents_per_second = " << st.events_per_second
       << '\n';
  }
  return os.str();
}

}  // namespace evdeform
