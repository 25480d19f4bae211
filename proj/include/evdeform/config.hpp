#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "evdeform/blink_gate.hpp"
#include "evdeform/denoise.hpp"
#include "evdeform/synth.hpp"
#include "evdeform/tracker.hpp"

namespace evdeform {

/// Every tunable of a pipeline run. Text form is flat "key = value" lines
/// grouped under "[section]" headers; keys are addressed as "section.key"
/// (LEDs as "led.<index>.<field>").
struct RunConfig {
  std::string input;                   // events file; empty synthesises `scene`
  std::string output_dir = "evdeform_out";
  bool write_intermediate = false;
  int markers = 2;

  SceneSpec scene = default_scene();
  DenoiseParams denoise;
  BlinkGateParams gate;
  TrackerParams tracker;

  double rod_length = 1.0;        // m
  double cutoff_hz = 0.0;         // 0 disables detrending
  std::size_t reference_samples = 10;
  double magnification = 0.0;     // m/px; > 0 skips rod calibration

  static SceneSpec default_scene();
  void validate() const;
};

/// Sets one key from its text value. Throws ConfigError naming unknown keys
/// and malformed values.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

/// Applies a config text on top of `config`.
void apply_config_text(RunConfig& config, std::string_view text);
RunConfig load_config(const std::string& path);

/// Canonical text of every key; parsing it reproduces `config` exactly.
std::string format_config(const RunConfig& config);

struct ConfigKeyInfo {
  std::string key;
  std::string help;
};
/// Static (non-LED) keys with one-line descriptions, for --help and flags.
const std::vector<ConfigKeyInfo>& config_keys();
/// Per-LED fields, addressed as led.<index>.<field>.
const std::vector<ConfigKeyInfo>& led_keys();

}  // namespace evdeform
