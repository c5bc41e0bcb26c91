"""Parsing and summarizing of CAN speed/pedal CSV logs.

The wire format is a three-column CSV ``time_s,signal,value`` where signal
is ``speed`` (km/h) or ``pedal`` (throttle position, percent). Rows may be
interleaved arbitrarily; parsing sorts each signal by timestamp with a
stable sort so equal-time rows keep file order.
"""

from __future__ import annotations

import gzip
import io
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    DuplicateTimestamp,
    EmptyLog,
    MalformedRow,
    NonMonotonicTime,
    UnknownSignal,
)

HEADER = "time_s,signal,value"
SIGNALS = ("speed", "pedal")


class CanSample(NamedTuple):
    time_s: float
    value: float


@dataclass(frozen=True)
class _Series:
    """Timestamp-ordered samples of one signal, stored as numpy arrays."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise ValueError("times and values must be 1-D arrays of equal length")

    @property
    def count(self) -> int:
        return int(self.times.size)

    @property
    def samples(self) -> list[CanSample]:
        return [CanSample(float(t), float(v)) for t, v in zip(self.times, self.values)]

    def __eq__(self, other):
        if not isinstance(other, _Series):
            return NotImplemented
        return np.array_equal(self.times, other.times) and np.array_equal(
            self.values, other.values
        )


class SpeedSeries(_Series):
    """Vehicle speed in km/h; values are never negative."""


class PedalSeries(_Series):
    """Throttle pedal position in percent; values are never negative."""

    @property
    def idle_value(self) -> float:
        """The resting pedal level, taken as the series minimum."""
        return float(self.values.min())


@dataclass(frozen=True)
class CanLog:
    speed: SpeedSeries
    pedal: PedalSeries

    @property
    def duration_s(self) -> float:
        t0 = min(self.speed.times[0], self.pedal.times[0])
        t1 = max(self.speed.times[-1], self.pedal.times[-1])
        return float(t1 - t0)


def _build_series(cls, rows: list[tuple[float, float, int]], name: str):
    if not rows:
        raise EmptyLog(f"no {name} rows in log")
    # stable order: timestamp first, original file position breaks ties
    rows.sort(key=lambda r: (r[0], r[2]))
    times = np.array([r[0] for r in rows], dtype=np.float64)
    values = np.array([r[1] for r in rows], dtype=np.float64)
    dup = np.nonzero(np.diff(times) == 0.0)[0]
    if dup.size:
        warnings.warn(
            f"{dup.size} duplicate {name} timestamp(s); keeping first occurrence",
            DuplicateTimestamp,
            stacklevel=3,
        )
        keep = np.ones(times.size, dtype=bool)
        keep[dup + 1] = False
        times = times[keep]
        values = values[keep]
    return cls(times=times, values=values)


def parse_can_csv(raw) -> CanLog:
    """Parse CSV text, bytes, or a file object into a CanLog.

    Args:
        raw: str, bytes, or a readable file object holding the CSV.

    Returns:
        CanLog with both series sorted by time and deduplicated.

    Raises:
        EmptyLog: header only, or one signal has no rows at all.
        MalformedRow: wrong column count or a non-numeric field.
        UnknownSignal: a signal other than speed/pedal.
        NonMonotonicTime: a negative timestamp.
    """
    if isinstance(raw, bytes):
        text = raw.decode("utf-8")
    elif isinstance(raw, str):
        text = raw
    else:
        text = raw.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")

    lines = text.splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise MalformedRow(f"first line must be the header {HEADER!r}")

    speed_rows: list[tuple[float, float, int]] = []
    pedal_rows: list[tuple[float, float, int]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise MalformedRow(f"line {lineno}: expected 3 fields, got {len(parts)}")
        t_str, signal, v_str = (p.strip() for p in parts)
        try:
            t = float(t_str)
            v = float(v_str)
        except ValueError:
            raise MalformedRow(f"line {lineno}: non-numeric field") from None
        if signal not in SIGNALS:
            raise UnknownSignal(f"line {lineno}: unknown signal {signal!r}")
        if t < 0.0:
            raise NonMonotonicTime(f"line {lineno}: negative timestamp {t}")
        if v < 0.0:
            raise MalformedRow(f"line {lineno}: negative {signal} value {v}")
        (speed_rows if signal == "speed" else pedal_rows).append((t, v, lineno))

    if not speed_rows and not pedal_rows:
        raise EmptyLog("log has a header but no data rows")
    speed = _build_series(SpeedSeries, speed_rows, "speed")
    pedal = _build_series(PedalSeries, pedal_rows, "pedal")
    return CanLog(speed=speed, pedal=pedal)


def read_can_csv(path) -> CanLog:
    """Load a log from a file path; names ending in .gz are gunzipped."""
    path = str(path)
    opener = gzip.open if path.endswith(".gz") else open
    with opener(path, "rt", encoding="utf-8") as fh:
        return parse_can_csv(fh.read())


def to_csv(log: CanLog) -> str:
    """Serialize a CanLog back to CSV text.

    Rows are merged in (time, signal) order and floats use repr so that
    parse_can_csv(to_csv(log)) == log holds exactly.
    """
    rows = [(t, 0, v) for t, v in zip(log.speed.times, log.speed.values)]
    rows += [(t, 1, v) for t, v in zip(log.pedal.times, log.pedal.values)]
    rows.sort(key=lambda r: (r[0], r[1]))
    out = io.StringIO()
    out.write(HEADER + "\n")
    for t, sig, v in rows:
        out.write(f"{float(t)!r},{SIGNALS[sig]},{float(v)!r}\n")
    return out.getvalue()


def write_can_csv(log: CanLog, path) -> None:
    path = str(path)
    opener = gzip.open if path.endswith(".gz") else open
    with opener(path, "wt", encoding="utf-8") as fh:
        fh.write(to_csv(log))


def series_stats(log: CanLog) -> dict:
    """Per-signal duration, sample-rate estimate, and counts.

    Rate is count/duration; a single-sample series reports None.
    """
    out = {}
    for name in SIGNALS:
        series = getattr(log, name)
        duration = float(series.times[-1] - series.times[0])
        rate = series.count / duration if duration > 0 else None
        out[name] = {"count": series.count, "duration_s": duration, "rate_hz": rate}
    return out
