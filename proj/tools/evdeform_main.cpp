// evdeform: command-line front end for the event-stream deformation pipeline.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 stage failure.

#include <CLI11.hpp>

#include <deque>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "evdeform/blink_gate.hpp"
#include "evdeform/config.hpp"
#include "evdeform/deform.hpp"
#include "evdeform/denoise.hpp"
#include "evdeform/errors.hpp"
#include "evdeform/pipeline.hpp"
#include "evdeform/stream_io.hpp"
#include "evdeform/synth.hpp"
#include "evdeform/tracker.hpp"

namespace fs = std::filesystem;
using namespace evdeform;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitStage = 4;

// Config sources shared by every subcommand. Precedence: --config file,
// then --set entries, then per-key flags, then the short aliases.
struct ConfigOptions {
  std::string config_file;
  std::vector<std::string> sets;
  std::map<std::string, std::string> key_flags;
  std::deque<std::pair<std::string, std::string>> aliases;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "config file (key = value with [section] headers)");
    app->add_option("--set", sets, "override a config key, KEY=VALUE (repeatable)");
    for (const auto& k : config_keys())
      app->add_option("--" + k.key, key_flags[k.key], k.help)->group("Config keys");
  }

  void alias(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto& slot = aliases.emplace_back(key, std::string{});
    app->add_option(flag, slot.second, help + " (" + key + ")");
  }

  RunConfig build() const {
    RunConfig cfg = config_file.empty() ? RunConfig{} : load_config(config_file);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects KEY=VALUE, got '" + s + "'");
      set_config_value(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [key, value] : key_flags)
      if (!value.empty()) set_config_value(cfg, key, value);
    for (const auto& [key, value] : aliases)
      if (!value.empty()) set_config_value(cfg, key, value);
    return cfg;
  }
};

void print_score(std::ostream& os, const FilterScore& s) {
  os << "noise_total = " << s.noise_total << "\nnoise_removed = " << s.noise_removed
     << "\nnoise_removal_rate = " << s.noise_removal_rate << "\nsignal_total = " << s.signal_total
     << "\nsignal_removed = " << s.signal_removed << "\nsignal_loss_rate = " << s.signal_loss_rate
     << "\nmotion_total = " << s.motion_total << "\nmotion_removed = " << s.motion_removed
     << "\nmotion_removal_rate = " << s.motion_removal_rate << '\n';
}

std::size_t write_labeled(const std::string& path, const LabeledStream& s) {
  return write_events(path, s.stream, format_for_path(path), s.labels);
}

LabeledStream read_input(const std::string& path, const RunConfig& cfg) {
  return read_events(path, format_for_path(path), cfg.scene.meta);
}

void print_filter_result(const char* section, const LabeledStream& in, const Partition& p) {
  std::cout << '[' << section << "]\nevents_in = " << in.stream.events.size()
            << "\nevents_kept = " << p.kept.events.size() << "\nevents_removed = " << p.removed.events.size()
            << '\n';
  if (in.has_labels()) print_score(std::cout, eval_filter(in.labels, p.mask));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-camera LED marker tracking and planar deformation measurement"};
  app.require_subcommand(1);
  std::cout.precision(10);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a labelled synthetic scene");
  ConfigOptions synth_cfg;
  std::string synth_out;
  synth_cfg.attach(synth);
  synth->add_option("--out", synth_out, "output events file (.csv keeps labels, .bin drops them)")->required();

  // denoise
  auto* denoise = app.add_subcommand("denoise", "two-stage observation-noise filter");
  ConfigOptions den_cfg;
  std::string den_in, den_out, den_removed;
  bool st_only = false;
  den_cfg.attach(denoise);
  denoise->add_option("--in", den_in, "input events file")->required();
  denoise->add_option("--out", den_out, "kept events file");
  denoise->add_option("--removed", den_removed, "removed events file");
  denoise->add_flag("--st-only", st_only, "run only the spatiotemporal correlation stage");

  // gate
  auto* gate = app.add_subcommand("gate", "reject motion events by polarity-reversal frequency");
  ConfigOptions gate_cfg;
  std::string gate_in, gate_out;
  gate_cfg.attach(gate);
  gate_cfg.alias(gate, "--f-led", "gate.f_led", "LED blink frequency, Hz");
  gate_cfg.alias(gate, "--f-th", "gate.f_th", "frequency half-width, Hz");
  gate->add_option("--in", gate_in, "input events file")->required();
  gate->add_option("--out", gate_out, "kept events file");

  // track
  auto* trk = app.add_subcommand("track", "track marker centres");
  ConfigOptions trk_cfg;
  std::string trk_in, trk_dir = ".";
  trk_cfg.attach(trk);
  trk_cfg.alias(trk, "--markers", "run.markers", "number of markers");
  trk->add_option("--in", trk_in, "input events file (denoised and gated)")->required();
  trk->add_option("--out-dir", trk_dir, "directory for trajectory_marker<k>.csv");

  // measure
  auto* measure = app.add_subcommand("measure", "convert trajectories to metric displacement");
  ConfigOptions meas_cfg;
  std::vector<std::string> meas_traj;
  std::string meas_dir = ".";
  meas_cfg.attach(measure);
  meas_cfg.alias(measure, "--rod-length", "deform.rod_length", "rod length, m");
  meas_cfg.alias(measure, "--cutoff-hz", "deform.cutoff_hz", "high-pass cutoff, Hz");
  measure->add_option("--traj", meas_traj, "trajectory CSV (first two calibrate the rod)")->required();
  measure->add_option("--out-dir", meas_dir, "directory for series_marker<k>.csv");

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "synth/read -> denoise -> gate -> track -> measure");
  ConfigOptions pipe_cfg;
  pipe_cfg.attach(pipe);
  pipe_cfg.alias(pipe, "--in", "run.input", "input events file");
  pipe_cfg.alias(pipe, "--out-dir", "run.output_dir", "output directory");

  // stats
  auto* stats = app.add_subcommand("stats", "summary statistics of an events or series file");
  ConfigOptions stats_cfg;
  std::string stats_events, stats_series;
  stats_cfg.attach(stats);
  stats->add_option("--in", stats_events, "events file");
  stats->add_option("--series", stats_series, "series CSV (vibration statistics of dx/dy)");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "per-stage throughput");
  ConfigOptions bench_cfg;
  std::string bench_in;
  std::size_t bench_events = 1'000'000;
  bench_cfg.attach(bench_cmd);
  bench_cmd->add_option("--in", bench_in, "events file (default: synthetic stream)");
  bench_cmd->add_option("--events", bench_events, "synthetic stream size");

  // print-config
  auto* show = app.add_subcommand("config", "print the effective configuration");
  ConfigOptions show_cfg;
  show_cfg.attach(show);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*synth) {
      const auto cfg = synth_cfg.build();
      const auto scene = synth_scene(cfg.scene);
      const auto bytes = write_labeled(synth_out, scene);
      const auto score = eval_filter(scene.labels, Mask(scene.labels.size(), 1));
      std::cout << "[synth]\nevents = " << scene.stream.events.size() << "\nbytes = " << bytes
                << "\nsignal_events = " << score.signal_total << "\nmotion_events = " << score.motion_total
                << "\nnoise_events = " << score.noise_total << "\nseed = " << cfg.scene.seed << '\n';
    } else if (*denoise) {
      const auto cfg = den_cfg.build();
      cfg.denoise.validate();
      const auto in = read_input(den_in, cfg);
      const auto p = st_only ? spatiotemporal_filter(in.stream, cfg.denoise) : denoise_two_stage(in.stream, cfg.denoise);
      if (!den_out.empty()) write_labeled(den_out, select(in, p.mask, true));
      if (!den_removed.empty()) write_labeled(den_removed, select(in, p.mask, false));
      print_filter_result(st_only ? "spatiotemporal" : "denoise", in, p);
    } else if (*gate) {
      const auto cfg = gate_cfg.build();
      const auto in = read_input(gate_in, cfg);
      GateStats gs;
      const auto p = gate_stream(in.stream, cfg.gate, &gs);
      if (!gate_out.empty()) write_labeled(gate_out, select(in, p.mask, true));
      print_filter_result("gate", in, p);
      std::cout << "pixels = " << gs.pixels << "\nruns = " << gs.runs << "\nunresolved_events = "
                << gs.unresolved_events << "\nevicted_events = " << gs.evicted_events << '\n';
    } else if (*trk) {
      const auto cfg = trk_cfg.build();
      const auto in = read_input(trk_in, cfg);
      const auto res = track(in.stream, cfg.tracker, cfg.markers);
      fs::create_directories(trk_dir);
      std::cout << "[track]\nadmitted = " << res.admitted << "\ndiscarded = " << res.discarded << '\n';
      for (const auto& t : res.trajectories) {
        const auto path = fs::path(trk_dir) / ("trajectory_marker" + std::to_string(t.marker_id) + ".csv");
        write_trajectory(path, t);
        std::cout << "file." << t.marker_id << " = " << path.string() << '\n';
      }
      for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
    } else if (*measure) {
      const auto cfg = meas_cfg.build();
      cfg.validate();
      std::vector<CenterTrajectory> trajs;
      for (std::size_t k = 0; k < meas_traj.size(); ++k)
        trajs.push_back(trajectory_from_rows(read_series(meas_traj[k]), static_cast<std::int32_t>(k)));
      Calibration cal;
      if (cfg.magnification > 0) {
        cal = Calibration{cfg.rod_length, cfg.rod_length / cfg.magnification, cfg.magnification, 0.0, 0};
      } else {
        if (trajs.size() < 2) throw ConfigError("rod calibration needs two --traj files (or deform.magnification)");
        cal = calibrate(trajs[0], trajs[1], cfg.rod_length);
      }
      fs::create_directories(meas_dir);
      std::cout << "[calibration]\npixel_separation_px = " << cal.pixel_separation
                << "\nmagnification_m_per_px = " << cal.magnification << "\nseparation_std_px = " << cal.separation_std
                << '\n';
      for (const auto& t : trajs) {
        auto series = to_metric(t, cal, cfg.reference_samples);
        if (cfg.cutoff_hz > 0) series = highpass_detrend(series, cfg.cutoff_hz);
        const auto path = fs::path(meas_dir) / ("series_marker" + std::to_string(t.marker_id) + ".csv");
        write_series(path, series);
        std::cout << "\n[marker." << t.marker_id << "]\nfile = " << path.string() << '\n';
        if (series.samples.size() >= 4) {
          for (auto axis : {Axis::X, Axis::Y}) {
            const auto v = vibration_stats(series, axis);
            const char* a = axis == Axis::X ? "x" : "y";
            std::cout << a << "_mean_mm = " << v.mean * 1e3 << '\n'
                      << a << "_range_mm = " << v.range * 1e3 << '\n'
                      << a << "_std_mm = " << v.std_dev * 1e3 << '\n'
                      << a << "_oscillations = " << v.oscillation_count << '\n'
                      << a << "_dominant_hz = " << v.dominant_freq << '\n';
          }
        }
      }
    } else if (*pipe) {
      const auto cfg = pipe_cfg.build();
      const auto result = run_pipeline(cfg);
      std::cout << format_report(result.report);
      switch (result.report.failure) {
        case FailureKind::None: return 0;
        case FailureKind::Config: return kExitConfig;
        case FailureKind::Data: return kExitData;
        case FailureKind::Stage: return kExitStage;
      }
    } else if (*stats) {
      const auto cfg = stats_cfg.build();
      if (stats_events.empty() == stats_series.empty()) throw ConfigError("stats needs exactly one of --in / --series");
      if (!stats_events.empty()) {
        const auto in = read_input(stats_events, cfg);
        std::size_t on = 0;
        for (const auto& e : in.stream.events) on += e.s;
        const auto& m = in.stream.meta;
        std::cout << "[stats]\nevents = " << m.count << "\nwidth = " << m.sensor_width << "\nheight = "
                  << m.sensor_height << "\nduration_us = " << m.duration << "\npositive = " << on
                  << "\nnegative = " << m.count - on << "\nrate_per_s = "
                  << (m.duration > 0 ? double(m.count) * 1e6 / double(m.duration) : 0.0) << '\n';
        if (in.has_labels()) print_score(std::cout, eval_filter(in.labels, Mask(in.labels.size(), 1)));
      } else {
        const auto rows = read_series(stats_series);
        std::vector<double> dx, dy;
        for (const auto& r : rows) {
          if (!r.dx_mm || !r.dy_mm) throw DataError("series has no metric columns");
          dx.push_back(*r.dx_mm);
          dy.push_back(*r.dy_mm);
        }
        if (rows.size() < 2) throw DataError("series too short");
        const Micros period = rows[1].t - rows[0].t;
        for (auto [name, values] : {std::pair{"x", &dx}, std::pair{"y", &dy}}) {
          const auto v = vibration_stats(*values, period);
          std::cout << "[stats." << name << "]\nmean_mm = " << v.mean << "\nrange_mm = " << v.range
                    << "\nstd_mm = " << v.std_dev << "\noscillations = " << v.oscillation_count
                    << "\ndominant_hz = " << v.dominant_freq << "\nspectral_peak_hz = " << v.spectral_peak_freq
                    << '\n';
        }
      }
    } else if (*bench_cmd) {
      const auto cfg = bench_cfg.build();
      cfg.validate();
      const auto stream = bench_in.empty() ? bench_stream(bench_events, cfg.scene.seed).stream
                                           : read_input(bench_in, cfg).stream;
      std::cout << format_bench(bench(stream, cfg));
    } else if (*show) {
      std::cout << format_config(show_cfg.build());
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const StageError& e) {
    std::cerr << "stage failure: " << e.what() << '\n';
    return kExitStage;
  }
  return 0;
}
