#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "evdeform/config.hpp"
#include "evdeform/deform.hpp"
#include "evdeform/errors.hpp"
#include "evdeform/pipeline.hpp"
#include "evdeform/stream_io.hpp"

namespace py = pybind11;
using namespace evdeform;

namespace {

template <typename T>
py::array_t<T> column(const std::vector<Event>& events, T (*get)(const Event&)) {
  py::array_t<T> out(static_cast<py::ssize_t>(events.size()));
  auto v = out.template mutable_unchecked<1>();
  for (std::size_t i = 0; i < events.size(); ++i) v(static_cast<py::ssize_t>(i)) = get(events[i]);
  return out;
}

EventStream make_stream(py::array_t<std::uint16_t, py::array::forcecast> x, py::array_t<std::uint16_t, py::array::forcecast> y,
                        py::array_t<std::int64_t, py::array::forcecast> t, py::array_t<std::uint8_t, py::array::forcecast> s,
                        std::uint32_t width, std::uint32_t height) {
  const auto n = x.size();
  if (y.size() != n || t.size() != n || s.size() != n) throw DataError("x, y, t and s must have equal length");
  auto xv = x.unchecked<1>();
  auto yv = y.unchecked<1>();
  auto tv = t.unchecked<1>();
  auto sv = s.unchecked<1>();
  std::vector<Event> events(static_cast<std::size_t>(n));
  for (py::ssize_t i = 0; i < n; ++i) events[static_cast<std::size_t>(i)] = Event{xv(i), yv(i), tv(i), sv(i)};
  return validate_stream(std::move(events), StreamMeta{width, height, 0, 0});
}

py::array_t<std::uint8_t> to_numpy(const Mask& m) {
  py::array_t<std::uint8_t> out(static_cast<py::ssize_t>(m.size()));
  std::copy(m.begin(), m.end(), out.mutable_data());
  return out;
}

Mask from_numpy(py::array_t<std::uint8_t, py::array::forcecast> m) {
  return Mask(m.data(), m.data() + m.size());
}

py::dict score_dict(const FilterScore& s) {
  py::dict d;
  d["noise_total"] = s.noise_total;
  d["noise_removed"] = s.noise_removed;
  d["signal_total"] = s.signal_total;
  d["signal_removed"] = s.signal_removed;
  d["motion_total"] = s.motion_total;
  d["motion_removed"] = s.motion_removed;
  d["noise_removal_rate"] = s.noise_removal_rate;
  d["signal_loss_rate"] = s.signal_loss_rate;
  d["motion_removal_rate"] = s.motion_removal_rate;
  return d;
}

py::dict vibration_dict(const VibrationStats& v) {
  py::dict d;
  d["mean"] = v.mean;
  d["range"] = v.range;
  d["std"] = v.std_dev;
  d["oscillation_count"] = v.oscillation_count;
  d["dominant_freq"] = v.dominant_freq;
  d["spectral_peak_freq"] = v.spectral_peak_freq;
  d["frequency_mismatch"] = v.frequency_mismatch;
  return d;
}

py::dict trajectory_dict(const CenterTrajectory& tr) {
  const auto n = static_cast<py::ssize_t>(tr.samples.size());
  py::array_t<std::int64_t> t(n);
  py::array_t<double> u(n), v(n);
  py::array_t<bool> stale(n);
  for (py::ssize_t i = 0; i < n; ++i) {
    const auto& s = tr.samples[static_cast<std::size_t>(i)];
    t.mutable_at(i) = s.t;
    u.mutable_at(i) = s.u;
    v.mutable_at(i) = s.v;
    stale.mutable_at(i) = s.stale;
  }
  py::dict d;
  d["marker_id"] = tr.marker_id;
  d["t"] = t;
  d["u"] = u;
  d["v"] = v;
  d["stale"] = stale;
  return d;
}

py::dict series_dict(const DisplacementSeries& s) {
  const auto n = static_cast<py::ssize_t>(s.samples.size());
  py::array_t<std::int64_t> t(n);
  py::array_t<double> du(n), dv(n), dx(n), dy(n);
  for (py::ssize_t i = 0; i < n; ++i) {
    const auto& p = s.samples[static_cast<std::size_t>(i)];
    t.mutable_at(i) = p.t;
    du.mutable_at(i) = p.du;
    dv.mutable_at(i) = p.dv;
    dx.mutable_at(i) = p.dx;
    dy.mutable_at(i) = p.dy;
  }
  py::dict d;
  d["marker_id"] = s.marker_id;
  d["u0"] = s.u0;
  d["v0"] = s.v0;
  d["magnification"] = s.magnification;
  d["t"] = t;
  d["du"] = du;
  d["dv"] = dv;
  d["dx"] = dx;
  d["dy"] = dy;
  return d;
}

py::dict result_dict(const PipelineResult& r) {
  py::dict d;
  d["complete"] = r.report.complete;
  d["failed_stage"] = r.report.failed_stage;
  d["error"] = r.report.error;
  d["report"] = format_report(r.report, false);
  d["kept"] = to_numpy(r.kept);
  py::list stages, markers, series, detrended;
  for (const auto& st : r.report.stages) {
    py::dict s;
    s["name"] = st.name;
    s["events_in"] = st.events_in;
    s["events_out"] = st.events_out;
    s["seconds"] = st.seconds;
    if (st.score) s["score"] = score_dict(*st.score);
    stages.append(s);
  }
  for (const auto& m : r.report.markers) {
    py::dict md;
    md["marker_id"] = m.marker_id;
    md["samples"] = m.samples;
    md["stale_samples"] = m.stale_samples;
    md["jitter_u"] = m.jitter_u;
    md["jitter_v"] = m.jitter_v;
    md["final_dx"] = m.final_dx;
    md["final_dy"] = m.final_dy;
    if (m.vibration_x) md["vibration_x"] = vibration_dict(*m.vibration_x);
    if (m.vibration_y) md["vibration_y"] = vibration_dict(*m.vibration_y);
    markers.append(md);
  }
  for (const auto& s : r.series) series.append(series_dict(s));
  for (const auto& s : r.detrended) detrended.append(series_dict(s));
  d["stages"] = stages;
  d["markers"] = markers;
  d["series"] = series;
  d["detrended"] = detrended;
  d["warnings"] = r.report.warnings;
  if (r.report.calibration) d["magnification"] = r.report.calibration->magnification;
  return d;
}

RunConfig config_from(const py::dict& overrides) {
  RunConfig c;
  for (const auto& [k, v] : overrides) set_config_value(c, py::str(k), py::str(v));
  return c;
}

}  // namespace

PYBIND11_MODULE(_evdeform, m) {
  m.doc() = "Event-camera LED marker tracking and planar deformation measurement";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<StageError>(m, "StageError", PyExc_RuntimeError);

  py::class_<RunConfig>(m, "Config")
      .def(py::init([](const py::dict& overrides) { return config_from(overrides); }), py::arg("overrides") = py::dict())
      .def_static("from_text", [](const std::string& text) {
        RunConfig c;
        apply_config_text(c, text);
        return c;
      })
      .def_static("load", &load_config)
      .def("set", &set_config_value, py::arg("key"), py::arg("value"))
      .def("validate", &RunConfig::validate)
      .def("to_text", [](const RunConfig& c) { return format_config(c); })
      .def("__str__", [](const RunConfig& c) { return format_config(c); });

  py::class_<EventStream>(m, "EventStream")
      .def(py::init(&make_stream), py::arg("x"), py::arg("y"), py::arg("t"), py::arg("s"), py::arg("width") = 1280,
           py::arg("height") = 720)
      .def("__len__", [](const EventStream& s) { return s.events.size(); })
      .def_property_readonly("x", [](const EventStream& s) { return column<std::uint16_t>(s.events, [](const Event& e) { return e.x; }); })
      .def_property_readonly("y", [](const EventStream& s) { return column<std::uint16_t>(s.events, [](const Event& e) { return e.y; }); })
      .def_property_readonly("t", [](const EventStream& s) { return column<std::int64_t>(s.events, [](const Event& e) { return e.t; }); })
      .def_property_readonly("s", [](const EventStream& s) { return column<std::uint8_t>(s.events, [](const Event& e) { return e.s; }); })
      .def_property_readonly("width", [](const EventStream& s) { return s.meta.sensor_width; })
      .def_property_readonly("height", [](const EventStream& s) { return s.meta.sensor_height; })
      .def_property_readonly("duration", [](const EventStream& s) { return s.meta.duration; })
      .def("select", [](const EventStream& s, py::array_t<std::uint8_t, py::array::forcecast> mask, bool keep) {
        return select(s, from_numpy(mask), keep);
      }, py::arg("mask"), py::arg("keep") = true)
      .def(py::self == py::self);

  py::class_<LabeledStream>(m, "LabeledStream")
      .def_readonly("stream", &LabeledStream::stream)
      .def_property_readonly("labels", [](const LabeledStream& s) {
        std::vector<std::string> out;
        out.reserve(s.labels.size());
        for (const auto& l : s.labels) out.push_back(to_string(l.cls));
        return out;
      })
      .def_property_readonly("marker_ids", [](const LabeledStream& s) {
        py::array_t<std::int32_t> out(static_cast<py::ssize_t>(s.labels.size()));
        for (std::size_t i = 0; i < s.labels.size(); ++i)
          out.mutable_at(static_cast<py::ssize_t>(i)) = s.labels[i].marker_id.value_or(-1);
        return out;
      })
      .def("__len__", [](const LabeledStream& s) { return s.stream.events.size(); });

  m.def("synth", [](const RunConfig& c) { return synth_scene(c.scene); }, py::arg("config"),
        "Labelled synthetic stream of the config's scene.");
  m.def("denoise", [](const EventStream& s, const RunConfig& c) { return to_numpy(denoise_two_stage(s, c.denoise).mask); },
        py::arg("stream"), py::arg("config"), "Keep-mask of the two-stage noise filter.");
  m.def("coarse_filter", [](const EventStream& s, const RunConfig& c) { return to_numpy(coarse_count_mask(s.events, c.denoise)); },
        py::arg("stream"), py::arg("config"));
  m.def("spatiotemporal_filter",
        [](const EventStream& s, const RunConfig& c) { return to_numpy(spatiotemporal_mask(s.events, s.meta, c.denoise)); },
        py::arg("stream"), py::arg("config"));
  m.def("gate", [](const EventStream& s, const RunConfig& c) { return to_numpy(gate_stream(s, c.gate).mask); },
        py::arg("stream"), py::arg("config"), "Keep-mask of the blink-frequency gate.");
  m.def("track", [](const EventStream& s, const RunConfig& c) {
        const auto r = track(s, c.tracker, c.markers);
        py::list out;
        for (const auto& t : r.trajectories) out.append(trajectory_dict(t));
        return out;
      }, py::arg("stream"), py::arg("config"), "Marker-centre trajectories, one dict per marker.");
  m.def("eval_filter", [](const LabeledStream& s, py::array_t<std::uint8_t, py::array::forcecast> mask) {
        return score_dict(eval_filter(s.labels, from_numpy(mask)));
      }, py::arg("labeled"), py::arg("mask"));
  m.def("run", [](const RunConfig& c) { return result_dict(run_pipeline(c)); }, py::arg("config"),
        "Full pipeline, writing outputs into config output_dir.");
  m.def("run_stages", [](const LabeledStream& s, const RunConfig& c) { return result_dict(run_stages(s, c)); },
        py::arg("labeled"), py::arg("config"), "All stages in memory, no files written.");
  m.def("highpass_detrend", [](const std::vector<double>& v, Micros period, double cutoff) {
        return highpass_detrend(v, period, cutoff);
      }, py::arg("values"), py::arg("sample_period_us"), py::arg("cutoff_hz"));
  m.def("vibration_stats", [](const std::vector<double>& v, Micros period) { return vibration_dict(vibration_stats(v, period)); },
        py::arg("values"), py::arg("sample_period_us"));
  m.def("read_events", [](const std::string& path) { return read_events(path, format_for_path(path)); }, py::arg("path"));
  m.def("write_events", [](const std::string& path, const EventStream& s) { return write_events(path, s, format_for_path(path)); },
        py::arg("path"), py::arg("stream"));
}
