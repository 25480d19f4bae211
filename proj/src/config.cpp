#include "evdeform/config.hpp"

#include <charconv>
#include <map>
#include <sstream>

#include "evdeform/errors.hpp"
#include "evdeform/stream_io.hpp"

namespace evdeform {
namespace {

// New LEDs take their index as marker id.
void resize_leds(RunConfig& c, std::size_t n) {
  const auto old = c.scene.leds.size();
  c.scene.leds.resize(n);
  for (std::size_t i = old; i < n; ++i) c.scene.leds[i].marker_id = static_cast<std::int32_t>(i);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  if constexpr (std::is_same_v<T, std::string>) {
    return text;
  } else if constexpr (std::is_same_v<T, bool>) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError(key + ": expected true/false, got '" + text + "'");
  } else {
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
      throw ConfigError(key + ": cannot parse '" + text + "'");
    return value;
  }
}

template <typename T>
std::string format_value(const T& value) {
  if constexpr (std::is_same_v<T, std::string>) {
    return value;
  } else if constexpr (std::is_same_v<T, bool>) {
    return value ? "true" : "false";
  } else {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, end);
  }
}

template <typename Target>
struct KeyDef {
  std::string key;
  std::string help;
  std::function<std::string(Target&)> get;
  std::function<void(Target&, const std::string&)> set;
};

template <typename Target, typename T, typename Access>
KeyDef<Target> field(std::string key, std::string help, Access access) {
  KeyDef<Target> def;
  def.key = key;
  def.help = std::move(help);
  def.get = [access](Target& c) { return format_value<T>(access(c)); };
  def.set = [access, key](Target& c, const std::string& v) { access(c) = parse_value<T>(key, v); };
  return def;
}

template <typename Target, typename E, typename Access>
KeyDef<Target> choice(std::string key, std::string help, std::vector<std::pair<std::string, E>> names,
                      Access access) {
  KeyDef<Target> def;
  def.key = key;
  def.help = std::move(help);
  def.get = [access, names](Target& c) {
    for (const auto& [n, e] : names)
      if (e == access(c)) return n;
    return std::string("?");
  };
  def.set = [access, names, key](Target& c, const std::string& v) {
    for (const auto& [n, e] : names)
      if (n == v) {
        access(c) = e;
        return;
      }
    throw ConfigError(key + ": unknown value '" + v + "'");
  };
  return def;
}

using RC = RunConfig;
using TK = TrajectorySpec::Kind;

const std::vector<KeyDef<RunConfig>>& run_keys() {
  static const std::vector<KeyDef<RunConfig>> keys = {
      field<RC, std::uint64_t>("run.seed", "random seed of the synthetic scene", [](RC& c) -> auto& { return c.scene.seed; }),
      field<RC, std::string>("run.input", "event file to process (empty: synthesise the scene)", [](RC& c) -> auto& { return c.input; }),
      field<RC, std::string>("run.output_dir", "directory for outputs and the report", [](RC& c) -> auto& { return c.output_dir; }),
      field<RC, bool>("run.write_intermediate", "also write denoised and gated streams", [](RC& c) -> auto& { return c.write_intermediate; }),
      field<RC, int>("run.markers", "number of LED markers to track", [](RC& c) -> auto& { return c.markers; }),

      field<RC, std::uint32_t>("scene.width", "sensor width, px", [](RC& c) -> auto& { return c.scene.meta.sensor_width; }),
      field<RC, std::uint32_t>("scene.height", "sensor height, px", [](RC& c) -> auto& { return c.scene.meta.sensor_height; }),
      field<RC, Micros>("scene.duration_us", "synthetic scene length, us", [](RC& c) -> auto& { return c.scene.duration_us; }),
      field<RC, Micros>("scene.jitter_us", "edge event jitter window, us", [](RC& c) -> auto& { return c.scene.jitter_us; }),
      field<RC, Micros>("scene.motion_tick_us", "motion sampling step, us", [](RC& c) -> auto& { return c.scene.motion_tick_us; }),
      KeyDef<RC>{"scene.led_count", "number of LEDs (led.<i>.* sections)",
                 [](RC& c) { return format_value(c.scene.leds.size()); },
                 [](RC& c, const std::string& v) { resize_leds(c, parse_value<std::size_t>("scene.led_count", v)); }},

      choice<RC, TK>("trajectory.kind", "static | step | sinusoid",
                     {{"static", TK::Static}, {"step", TK::Step}, {"sinusoid", TK::Sinusoid}},
                     [](RC& c) -> auto& { return c.scene.trajectory.kind; }),
      field<RC, double>("trajectory.offset_x", "step offset, columns", [](RC& c) -> auto& { return c.scene.trajectory.offset_px.x; }),
      field<RC, double>("trajectory.offset_y", "step offset, rows", [](RC& c) -> auto& { return c.scene.trajectory.offset_px.y; }),
      field<RC, Micros>("trajectory.at_us", "step start / sinusoid zero phase, us", [](RC& c) -> auto& { return c.scene.trajectory.at_us; }),
      field<RC, Micros>("trajectory.ramp_us", "step ramp length, us (0: instantaneous)", [](RC& c) -> auto& { return c.scene.trajectory.ramp_us; }),
      field<RC, double>("trajectory.amplitude_px", "sinusoid amplitude, px", [](RC& c) -> auto& { return c.scene.trajectory.amplitude_px; }),
      field<RC, double>("trajectory.freq_hz", "sinusoid frequency, Hz", [](RC& c) -> auto& { return c.scene.trajectory.freq_hz; }),
      choice<RC, Axis>("trajectory.axis", "sinusoid axis: x | y", {{"x", Axis::X}, {"y", Axis::Y}},
                       [](RC& c) -> auto& { return c.scene.trajectory.axis; }),

      field<RC, double>("noise.background_rate", "background events/s over the sensor", [](RC& c) -> auto& { return c.scene.noise.background_rate; }),
      field<RC, int>("noise.hot_pixel_count", "number of hot pixels", [](RC& c) -> auto& { return c.scene.noise.hot_pixel_count; }),
      field<RC, double>("noise.hot_pixel_rate", "events/s per hot pixel", [](RC& c) -> auto& { return c.scene.noise.hot_pixel_rate; }),

      field<RC, int>("denoise.n_th", "minimum events per timestamp bin", [](RC& c) -> auto& { return c.denoise.n_th; }),
      field<RC, int>("denoise.t_x", "neighbour distance, columns", [](RC& c) -> auto& { return c.denoise.t_x; }),
      field<RC, int>("denoise.t_y", "neighbour distance, rows", [](RC& c) -> auto& { return c.denoise.t_y; }),
      field<RC, Micros>("denoise.t_t", "neighbour time distance, us", [](RC& c) -> auto& { return c.denoise.t_t; }),
      field<RC, Micros>("denoise.bin_width", "timestamp bin width, us", [](RC& c) -> auto& { return c.denoise.bin_width; }),

      field<RC, double>("gate.f_led", "LED blink frequency, Hz", [](RC& c) -> auto& { return c.gate.f_led; }),
      field<RC, double>("gate.f_th", "accepted half-width around f_led, Hz", [](RC& c) -> auto& { return c.gate.f_th; }),
      field<RC, int>("gate.warmup_reversals", "same-direction reversals before estimates count", [](RC& c) -> auto& { return c.gate.warmup_reversals; }),
      field<RC, std::size_t>("gate.max_buffered", "undecided events held per pixel", [](RC& c) -> auto& { return c.gate.max_buffered; }),
      field<RC, bool>("gate.keep_unresolved", "keep runs that never get a frequency estimate", [](RC& c) -> auto& { return c.gate.keep_unresolved; }),

      field<RC, double>("tracker.d_th", "Mahalanobis gate", [](RC& c) -> auto& { return c.tracker.d_th; }),
      field<RC, Micros>("tracker.t_su", "cluster member lifetime, us", [](RC& c) -> auto& { return c.tracker.t_su; }),
      field<RC, double>("tracker.var_floor", "variance floor, px^2", [](RC& c) -> auto& { return c.tracker.var_floor; }),
      field<RC, Micros>("tracker.sample_period", "trajectory sample period, us", [](RC& c) -> auto& { return c.tracker.sample_period; }),
      field<RC, int>("tracker.min_seed_events", "events needed for a seed component", [](RC& c) -> auto& { return c.tracker.min_seed_events; }),
      field<RC, Micros>("tracker.seed_window", "stream prefix used for seeding, us", [](RC& c) -> auto& { return c.tracker.seed_window; }),

      field<RC, double>("deform.rod_length", "distance between marker centres, m", [](RC& c) -> auto& { return c.rod_length; }),
      field<RC, double>("deform.cutoff_hz", "high-pass cutoff, Hz (0: off)", [](RC& c) -> auto& { return c.cutoff_hz; }),
      field<RC, std::size_t>("deform.reference_samples", "samples averaged for the displacement origin", [](RC& c) -> auto& { return c.reference_samples; }),
      field<RC, double>("deform.magnification", "fixed m/px scale (0: calibrate from the rod)", [](RC& c) -> auto& { return c.magnification; }),
  };
  return keys;
}

const std::vector<KeyDef<LedSpec>>& led_defs() {
  static const std::vector<KeyDef<LedSpec>> keys = {
      field<LedSpec, double>("center_x", "disk centre column, px", [](LedSpec& l) -> auto& { return l.center.x; }),
      field<LedSpec, double>("center_y", "disk centre row, px", [](LedSpec& l) -> auto& { return l.center.y; }),
      field<LedSpec, double>("radius", "disk radius, px", [](LedSpec& l) -> auto& { return l.radius; }),
      field<LedSpec, double>("blink_hz", "blink frequency, Hz", [](LedSpec& l) -> auto& { return l.blink_hz; }),
      field<LedSpec, int>("duty_light", "light part of the duty ratio", [](LedSpec& l) -> auto& { return l.duty_light; }),
      field<LedSpec, int>("duty_dark", "dark part of the duty ratio", [](LedSpec& l) -> auto& { return l.duty_dark; }),
      field<LedSpec, int>("events_per_edge", "events per pixel per edge", [](LedSpec& l) -> auto& { return l.events_per_edge_per_pixel; }),
      field<LedSpec, std::int32_t>("marker_id", "ground-truth marker id", [](LedSpec& l) -> auto& { return l.marker_id; }),
      field<LedSpec, double>("halo_radius", "outer halo radius, px (0: off)", [](LedSpec& l) -> auto& { return l.halo_radius; }),
      field<LedSpec, double>("halo_probability", "per-edge probability of a halo event", [](LedSpec& l) -> auto& { return l.halo_probability; }),
  };
  return keys;
}

}  // namespace

SceneSpec RunConfig::default_scene() {
  SceneSpec scene;
  scene.leds = scenes::rod_pair();
  scene.noise = scenes::standard_noise();
  scene.duration_us = 1'000'000;
  return scene;
}

void RunConfig::validate() const {
  if (markers < 1) throw ConfigError("run.markers must be >= 1");
  if (!(rod_length > 0)) throw ConfigError("deform.rod_length must be > 0");
  if (cutoff_hz < 0) throw ConfigError("deform.cutoff_hz must be >= 0");
  if (magnification < 0) throw ConfigError("deform.magnification must be >= 0");
  if (reference_samples < 1) throw ConfigError("deform.reference_samples must be >= 1");
  denoise.validate();
  gate.validate();
  tracker.validate();
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  if (key.rfind("led.", 0) == 0) {
    const auto dot = key.find('.', 4);
    std::size_t index = 0;
    const std::string idx = key.substr(4, dot == std::string::npos ? std::string::npos : dot - 4);
    auto [ptr, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), index);
    if (dot == std::string::npos || ec != std::errc{} || ptr != idx.data() + idx.size() || index > 255)
      throw ConfigError("unknown config key '" + key + "'");
    const std::string field_name = key.substr(dot + 1);
    for (const auto& def : led_defs()) {
      if (def.key != field_name) continue;
      if (config.scene.leds.size() <= index) resize_leds(config, index + 1);
      def.set(config.scene.leds[index], value);
      return;
    }
    throw ConfigError("unknown config key '" + key + "'");
  }
  for (const auto& def : run_keys()) {
    if (def.key == key) {
      def.set(config, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

void apply_config_text(RunConfig& config, std::string_view text) {
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": bad section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(std::string_view(line).substr(0, eq));
    const auto value = trim(std::string_view(line).substr(eq + 1));
    const auto full = section.empty() ? key : section + "." + key;
    try {
      set_config_value(config, full, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

RunConfig load_config(const std::string& path) {
  RunConfig config;
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  apply_config_text(config, text);
  return config;
}

std::string format_config(const RunConfig& config) {
  RunConfig copy = config;
  std::ostringstream os;
  std::string current;
  for (const auto& def : run_keys()) {
    const auto dot = def.key.find('.');
    const auto section = def.key.substr(0, dot);
    if (section != current) {
      if (!current.empty()) os << '\n';
      os << '[' << section << "]\n";
      current = section;
    }
    os << def.key.substr(dot + 1) << " = " << def.get(copy) << '\n';
    if (def.key == "scene.led_count") {
      for (std::size_t i = 0; i < copy.scene.leds.size(); ++i) {
        os << "\n[led." << i << "]\n";
        for (const auto& led : led_defs()) os << led.key << " = " << led.get(copy.scene.leds[i]) << '\n';
      }
      current = "led";
    }
  }
  return os.str();
}

const std::vector<ConfigKeyInfo>& config_keys() {
  static const std::vector<ConfigKeyInfo> info = [] {
    std::vector<ConfigKeyInfo> v;
    for (const auto& d : run_keys()) v.push_back({d.key, d.help});
    return v;
  }();
  return info;
}

const std::vector<ConfigKeyInfo>& led_keys() {
  static const std::vector<ConfigKeyInfo> info = [] {
    std::vector<ConfigKeyInfo> v;
    for (const auto& d : led_defs()) v.push_back({d.key, d.help});
    return v;
  }();
  return info;
}

}  // namespace evdeform
