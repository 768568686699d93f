"""Trace-driven simulator of a hybrid SRAM / STT-MRAM GPU L1 data cache."""

import json

from ._fusesim import (
    Op,
    Trace,
    TraceParseError,
    TraceRecord,
    _run_json,
    csv_columns,
    format_trace,
    generate,
    label_fractions,
    load_trace,
    parse_trace,
    presets,
)

__all__ = [
    "Op",
    "Trace",
    "TraceParseError",
    "TraceRecord",
    "csv_columns",
    "format_trace",
    "generate",
    "label_fractions",
    "load_trace",
    "parse_trace",
    "presets",
    "run",
    "compare",
]


def run(trace, preset="Dy-FUSE", overrides=None, seed=1, check_invariants=False):
    """Simulate `trace` on one preset and return the report as a dict.

    `overrides` maps dotted config keys to values, e.g. {"cbf.counters": 64}.
    """
    return json.loads(_run_json(trace, preset, dict(overrides or {}), seed, check_invariants))


def compare(trace, presets_=None, **kwargs):
    """Run several presets on the same trace; returns {preset: report}."""
    names = presets_ or presets()
    return {name: run(trace, name, **kwargs) for name in names}
