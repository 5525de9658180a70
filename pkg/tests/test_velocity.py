import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rubsynth.corpus import TraceFormatError
from rubsynth.velocity import (
    PointerEvent,
    differentiate,
    load_positions,
    pipeline,
    resample_positions,
    smooth_positions,
)


def events_from(ts, xs, ys):
    return [PointerEvent(t, x, y) for t, x, y in zip(ts, xs, ys)]


# ----------------------------------------------------------------- resampling


def test_resample_two_events_linear():
    events = events_from([0.0, 0.1], [0.0, 10.0], [0.0, 0.0])
    positions = resample_positions(events)
    assert positions.shape == (11, 2)
    assert np.allclose(positions[:, 0], np.arange(11), atol=1e-12)
    assert np.all(positions[:, 1] == 0.0)


def test_resample_on_grid_identity():
    ts = np.arange(20) * 0.01
    xs = np.sin(ts * 3.0)
    ys = np.cos(ts * 2.0)
    positions = resample_positions(events_from(ts, xs, ys))
    assert positions.shape == (20, 2)
    assert np.array_equal(positions[:, 0], xs)
    assert np.array_equal(positions[:, 1], ys)


def test_resample_single_event_errors():
    with pytest.raises(ValueError, match="at least 2"):
        resample_positions([PointerEvent(0.0, 1.0, 2.0)])


def test_resample_non_monotonic_errors():
    events = events_from([0.0, 0.05, 0.04], [0, 1, 2], [0, 0, 0])
    with pytest.raises(ValueError, match="increasing"):
        resample_positions(events)


def test_resample_short_span_errors():
    events = events_from([0.0, 0.015], [0, 1], [0, 0])
    with pytest.raises(ValueError, match="span"):
        resample_positions(events)


def test_resample_never_extrapolates():
    events = events_from([0.0, 0.025], [0.0, 2.5], [0, 0])
    positions = resample_positions(events)
    assert len(positions) == 3  # grid 0.00, 0.01, 0.02; 0.03 is past the span


# ------------------------------------------------------------------ smoothing


def test_smooth_window_one_identity():
    positions = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    out = smooth_positions(positions, window=1)
    assert np.array_equal(out, positions)


def test_smooth_constant_unchanged():
    positions = np.full((10, 2), 7.0)
    assert np.array_equal(smooth_positions(positions, 5), positions)


def test_smooth_impulse_window3():
    positions = np.array([0.0, 0.0, 3.0, 0.0, 0.0]).reshape(-1, 1)
    out = smooth_positions(positions, 3)
    assert np.allclose(out[:, 0], [0.0, 1.0, 1.0, 1.0, 0.0], atol=1e-12)


def test_smooth_even_window_errors():
    with pytest.raises(ValueError, match="odd"):
        smooth_positions(np.zeros((5, 2)), 4)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([1, 3, 5, 7]))
def test_smooth_never_amplifies(seed, window):
    rng = np.random.default_rng(seed)
    positions = rng.uniform(-50, 50, (30, 2))
    out = smooth_positions(positions, window)
    assert np.max(np.abs(out)) <= np.max(np.abs(positions)) + 1e-12


# ------------------------------------------------------------ differentiation


def test_differentiate_linear_motion():
    ts = np.arange(50) * 0.01
    positions = np.column_stack([ts * 50.0, np.zeros(50)])
    trace = differentiate(positions)
    assert trace.rate == 100
    assert trace.samples.shape == (50, 2)
    assert np.allclose(trace.samples[:, 0], 50.0, atol=1e-9)
    assert np.allclose(trace.samples[:, 1], 0.0, atol=1e-9)


def test_differentiate_constant_position():
    positions = np.full((10, 2), 3.0)
    trace = differentiate(positions)
    assert np.all(trace.samples == 0.0)


def test_differentiate_quadratic_exact():
    # x = t^2: central difference (x(t+h) - x(t-h)) / 2h = 2t exactly
    ts = np.arange(20) * 0.01
    positions = np.column_stack([ts**2, np.zeros(20)])
    trace = differentiate(positions)
    assert np.allclose(trace.samples[1:-1, 0], 2 * ts[1:-1], atol=1e-9)
    assert trace.samples[5, 0] == pytest.approx(0.1, abs=1e-9)


def test_differentiate_too_short():
    with pytest.raises(ValueError, match="at least 3"):
        differentiate(np.zeros((2, 2)))


@settings(max_examples=30, deadline=None)
@given(st.floats(-10, 10, allow_nan=False), st.integers(0, 2**31))
def test_pipeline_linearity(a, seed):
    rng = np.random.default_rng(seed)
    ts = np.sort(rng.uniform(0, 1, 12))
    ts[0], ts[-1] = 0.0, 1.0
    xs = rng.uniform(-30, 30, 12)
    ys = rng.uniform(-30, 30, 12)
    base = pipeline(events_from(ts, xs, ys))
    scaled = pipeline(events_from(ts, a * xs, a * ys))
    assert np.allclose(scaled.samples, a * base.samples, atol=1e-6 * max(1.0, abs(a)))


# ------------------------------------------------------------- position files


def test_load_positions(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("t_s,x_mm,y_mm\n0.0,1.0,2.0\n0.1,3.0,4.0\n")
    events = load_positions(path)
    assert events == [PointerEvent(0.0, 1.0, 2.0), PointerEvent(0.1, 3.0, 4.0)]


def test_load_positions_bad_header(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("t,x,y\n0,1,2\n")
    with pytest.raises(TraceFormatError, match="header"):
        load_positions(path)


def test_load_positions_empty(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("t_s,x_mm,y_mm\n")
    with pytest.raises(TraceFormatError, match="empty"):
        load_positions(path)
