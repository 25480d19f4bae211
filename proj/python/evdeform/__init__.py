"""Event-camera LED marker tracking and planar deformation measurement."""

from ._evdeform import (
    Config,
    ConfigError,
    DataError,
    EventStream,
    LabeledStream,
    StageError,
    coarse_filter,
    denoise,
    eval_filter,
    gate,
    highpass_detrend,
    read_events,
    run,
    run_stages,
    spatiotemporal_filter,
    synth,
    track,
    vibration_stats,
    write_events,
)

__all__ = [
    "Config",
    "ConfigError",
    "DataError",
    "EventStream",
    "LabeledStream",
    "StageError",
    "coarse_filter",
    "denoise",
    "eval_filter",
    "gate",
    "highpass_detrend",
    "read_events",
    "run",
    "run_stages",
    "spatiotemporal_filter",
    "synth",
    "track",
    "vibration_stats",
    "write_events",
]
