#pragma once

#include <optional>
#include <string>
#include <vector>

#include "evdeform/config.hpp"
#include "evdeform/deform.hpp"
#include "evdeform/synth.hpp"
#include "evdeform/tracker.hpp"

namespace evdeform {

struct StageReport {
  std::string name;
  std::size_t events_in = 0;
  std::size_t events_out = 0;
  double seconds = 0.0;
  std::optional<FilterScore> score;  // when ground-truth labels are present
};

struct MarkerReport {
  std::int32_t marker_id = 0;
  std::size_t samples = 0;
  std::size_t stale_samples = 0;
  double jitter_u = 0.0;  // px, max |u - mean(u)|
  double jitter_v = 0.0;
  double final_dx = 0.0;  // m, mean of the last reference_samples samples
  double final_dy = 0.0;
  std::optional<VibrationStats> vibration_x;
  std::optional<VibrationStats> vibration_y;
};

enum class FailureKind { None, Config, Data, Stage };

struct RunReport {
  bool complete = true;
  FailureKind failure = FailureKind::None;
  std::string failed_stage;
  std::string error;
  std::vector<StageReport> stages;
  std::optional<Calibration> calibration;
  std::vector<MarkerReport> markers;
  std::vector<std::string> warnings;
  std::vector<std::string> outputs;
  std::string config_echo;
};

/// In-memory products of every stage.
struct PipelineResult {
  LabeledStream input;
  Partition denoised;
  Partition gated;
  Mask kept;  // final keep-mask over `input`
  TrackResult tracking;
  std::vector<DisplacementSeries> series;
  std::vector<DisplacementSeries> detrended;  // empty unless cutoff_hz > 0
  RunReport report;
};

/// denoise -> gate -> track -> measure on an already loaded stream. Stage
/// errors are recorded in the report (complete = false) instead of thrown.
PipelineResult run_stages(LabeledStream input, const RunConfig& config);

/// Loads or synthesises the input, runs all stages and writes the series,
/// optional intermediate streams and report.txt into config.output_dir.
PipelineResult run_pipeline(const RunConfig& config);

/// Structured text (section headers, key = value) of a run report.
std::string format_report(const RunReport& report, bool include_timing = true);

struct BenchStage {
  std::string name;
  double seconds = 0.0;
  double events_per_second = 0.0;
};

struct BenchReport {
  std::size_t events = 0;
  std::vector<BenchStage> stages;
  std::size_t peak_memory_bytes = 0;
  bool deterministic = false;
  /// Per-event denoise cost on the doubled stream over the original.
  double scaling_ratio = 0.0;
};

/// Times each stage on `stream` (>= 1e6 events expected), checks the filter
/// outputs are identical across two runs and measures scaling on a doubled copy.
BenchReport bench(const EventStream& stream, const RunConfig& config);
std::string format_bench(const BenchReport& report);

/// Synthetic stream of at least `min_events` events from the standard rod
/// scene with standard noise.
LabeledStream bench_stream(std::size_t min_events, std::uint64_t seed = 1);

}  // namespace evdeform
