import numpy as np
import pytest

import evdeform


def short_config(**extra):
    keys = {"scene.duration_us": 300000}
    keys.update(extra)
    return evdeform.Config(keys)


def test_config_round_trip():
    cfg = short_config(**{"gate.f_th": 25})
    again = evdeform.Config.from_text(cfg.to_text())
    assert again.to_text() == cfg.to_text()
    with pytest.raises(evdeform.ConfigError):
        cfg.set("nosuch.key", "1")


def test_stream_from_arrays():
    s = evdeform.EventStream([3, 1], [4, 2], [70, 30], [1, 0], width=8, height=8)
    assert len(s) == 2
    assert list(s.t) == [30, 70]
    assert s.duration == 71
    with pytest.raises(evdeform.DataError):
        evdeform.EventStream([9], [0], [0], [0], width=8, height=8)


def test_stages_on_synthetic_scene():
    cfg = short_config()
    labeled = evdeform.synth(cfg)
    stream = labeled.stream
    assert len(labeled.labels) == len(stream)

    mask = evdeform.denoise(stream, cfg)
    assert mask.shape == (len(stream),)
    score = evdeform.eval_filter(labeled, mask)
    assert score["signal_loss_rate"] == 0.0
    assert score["noise_removal_rate"] > 0.9

    kept = stream.select(mask)
    gated = kept.select(evdeform.gate(kept, cfg))
    trajs = evdeform.track(gated, cfg)
    assert [t["marker_id"] for t in trajs] == [0, 1]
    assert abs(np.mean(trajs[0]["u"]) - 500.3) < 0.2


def test_run_stages_report():
    cfg = short_config()
    r = evdeform.run_stages(evdeform.synth(cfg), cfg)
    assert r["complete"]
    assert r["magnification"] == pytest.approx(0.004, rel=1e-3)
    assert all(m["jitter_u"] <= 0.1 for m in r["markers"])
    assert "[marker.0]" in r["report"]


def test_signal_helpers():
    t = np.arange(2000) * 1e-3
    x = np.sin(2 * np.pi * 50 * t)
    st = evdeform.vibration_stats(x, 1000)
    assert st["oscillation_count"] == 100
    assert st["spectral_peak_freq"] == pytest.approx(50.0)
    flat = evdeform.highpass_detrend(np.full(3000, 2.0), 1000, 1.0)
    assert np.allclose(flat, 0.0)


def test_file_round_trip(tmp_path):
    cfg = short_config()
    stream = evdeform.synth(cfg).stream
    path = str(tmp_path / "events.bin")
    assert evdeform.write_events(path, stream) == 16 + 13 * len(stream)
    assert evdeform.read_events(path).stream == stream
