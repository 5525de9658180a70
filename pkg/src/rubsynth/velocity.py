"""Pointer trajectory to 100 Hz velocity: resample, smooth, differentiate.

Positions arrive at whatever rate the input device produces; the chain
puts them on the uniform 10 ms grid, applies a short moving average to
kill pointer quantization jitter, and differentiates with central
differences.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from rubsynth.corpus import TRACE_DT, TRACE_RATE, TraceFormatError, VelocityTrace

POSITIONS_HEADER = ("t_s", "x_mm", "y_mm")

DEFAULT_SMOOTH_WINDOW = 3


@dataclass(frozen=True)
class PointerEvent:
    """One position sample: seconds, millimeters."""

    t: float
    x: float
    y: float


def load_positions(path: str | Path) -> list[PointerEvent]:
    """Read a `t_s,x_mm,y_mm` CSV of raw position samples."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise TraceFormatError(f"cannot read {path}: {exc}") from exc
    rows = list(csv.reader(text.splitlines()))
    if not rows or tuple(h.strip() for h in rows[0]) != POSITIONS_HEADER:
        raise TraceFormatError(f"{path}: header must be {','.join(POSITIONS_HEADER)}")
    events = []
    for i, row in enumerate(rows[1:]):
        if len(row) != 3:
            raise TraceFormatError(f"{path}: malformed row {i + 2}: {row!r}")
        try:
            t, x, y = (float(cell) for cell in row)
        except ValueError as exc:
            raise TraceFormatError(f"{path}: malformed row {i + 2}: {row!r}") from exc
        if not np.isfinite([t, x, y]).all():
            raise TraceFormatError(f"{path}: non-finite value in row {i + 2}")
        events.append(PointerEvent(t, x, y))
    if not events:
        raise TraceFormatError(f"{path}: empty positions file")
    return events


def resample_positions(events: list[PointerEvent]) -> np.ndarray:
    """Linearly interpolate positions onto the 10 ms grid.

    The grid covers [t_first, t_last]; nothing is extrapolated beyond the
    event span. Returns an (n, 2) array.
    """
    if len(events) < 2:
        raise ValueError("need at least 2 pointer events to resample")
    t = np.array([e.t for e in events])
    if np.any(np.diff(t) <= 0):
        raise ValueError("pointer event timestamps must be strictly increasing")
    span = t[-1] - t[0]
    if span < 2 * TRACE_DT - 1e-12:
        raise ValueError(f"events span {span:.4f} s, need at least {2 * TRACE_DT} s")

    n = int(np.floor(span / TRACE_DT + 1e-9)) + 1
    grid = t[0] + TRACE_DT * np.arange(n)
    x = np.array([e.x for e in events])
    y = np.array([e.y for e in events])
    return np.column_stack([np.interp(grid, t, x), np.interp(grid, t, y)])


def smooth_positions(positions: np.ndarray, window: int = DEFAULT_SMOOTH_WINDOW) -> np.ndarray:
    """Centered moving average; edges use the truncated window."""
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 1, got {window}")
    positions = np.asarray(positions, dtype=np.float64)
    if window == 1:
        return positions.copy()
    half = window // 2
    n = len(positions)
    out = np.empty_like(positions)
    # cumulative sum with a leading zero row makes each window a subtraction
    csum = np.vstack([np.zeros((1, positions.shape[1])), np.cumsum(positions, axis=0)])
    for i in range(n):
        lo = max(0, i - half)
        hi = min(n, i + half + 1)
        out[i] = (csum[hi] - csum[lo]) / (hi - lo)
    return out


def differentiate(positions: np.ndarray) -> VelocityTrace:
    """Central differences on the 10 ms grid; one-sided at the ends."""
    positions = np.asarray(positions, dtype=np.float64)
    if len(positions) < 3:
        raise ValueError(f"need at least 3 samples to differentiate, got {len(positions)}")
    v = np.empty_like(positions)
    v[1:-1] = (positions[2:] - positions[:-2]) / (2 * TRACE_DT)
    v[0] = (positions[1] - positions[0]) / TRACE_DT
    v[-1] = (positions[-1] - positions[-2]) / TRACE_DT
    return VelocityTrace(rate=TRACE_RATE, samples=v)


def pipeline(events: list[PointerEvent], window: int = DEFAULT_SMOOTH_WINDOW) -> VelocityTrace:
    """Full chain: resample, smooth, differentiate."""
    return differentiate(smooth_positions(resample_positions(events), window))
