"""Grain scheduling: selection, freezing, extension, crossfaded output.

Each 10 ms hop consumes one query velocity and emits one 480-sample
stereo block. A selected fragment is held ("frozen") for a fixed number
of hops to avoid machine-gun re-selection, extended into a longer grain
by pulling in its neighboring fragments from the source clip, and
blended into the running output with a raised-cosine crossfade whose
cos/sin envelope pair keeps power constant through the transition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from rubsynth.audio import REQUIRED_SAMPLE_RATE, AudioClip
from rubsynth.corpus import FRAGMENT_LENGTH, Corpus, VelocityTrace
from rubsynth.index import GrainIndex, embed
from rubsynth.rng import SplitMix64

HOP = FRAGMENT_LENGTH  # 480 samples, 10 ms


@dataclass(frozen=True)
class SynthParams:
    k: int = 25  # neighbors retrieved per query
    n: int = 28  # neighbor fragments merged into a grain, split half before/after
    freeze_hops: int = 5  # hops a selection is held; 50 ms kills repetition artifacts
    fade_len: int = 480  # crossfade length in samples
    v_silence: float = 1.0  # mm/s; below this the output ramps to silence

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.n < 0 or self.n % 2 != 0:
            raise ValueError(f"n must be even and >= 0, got {self.n}")
        if self.freeze_hops < 1:
            raise ValueError(f"freeze_hops must be >= 1, got {self.freeze_hops}")
        if not (0 < self.fade_len <= HOP):
            raise ValueError(f"fade_len must be in (0, {HOP}], got {self.fade_len}")
        if self.v_silence <= 0:
            raise ValueError(f"v_silence must be positive, got {self.v_silence}")


@dataclass(frozen=True)
class Grain:
    """A contiguous source window: a center fragment plus its neighbors."""

    start: int  # first source sample
    length: int  # samples, whole multiple of 480
    center_fragment: int


def fade_envelopes(fade_len: int) -> tuple[np.ndarray, np.ndarray]:
    """Equal-power envelope pair w_out(t) = cos, w_in(t) = sin of pi*t/(2L).

    w_out^2 + w_in^2 == 1 at every t; the crossfade applies the squares
    as amplitude weights, so blending a signal with itself reproduces it
    exactly and blended output never exceeds its sources.
    """
    t = np.arange(fade_len)
    phase = math.pi * t / (2 * fade_len)
    return np.cos(phase), np.sin(phase)


def build_grain(corpus: Corpus, fragment_id: int, n: int) -> Grain:
    """Extend a fragment into a grain with n/2 neighbors on each side.

    Neighbors are taken by position in the source clip whether or not
    they survived outlier filtering; the window clamps at clip edges.
    """
    capacity = corpus.clip_fragment_capacity
    if not (0 <= fragment_id < capacity):
        raise ValueError(f"fragment {fragment_id} outside clip ({capacity} windows)")
    half = n // 2
    lo = max(0, fragment_id - half)
    hi = min(capacity - 1, fragment_id + half)
    return Grain(
        start=lo * FRAGMENT_LENGTH,
        length=(hi - lo + 1) * FRAGMENT_LENGTH,
        center_fragment=fragment_id,
    )


class SynthState:
    """Per-session scheduler state over one shared corpus + index."""

    def __init__(
        self,
        corpus: Corpus,
        index: GrainIndex,
        params: SynthParams | None = None,
        seed: int = 0,
    ):
        self.corpus = corpus
        self.index = index
        self.params = params or SynthParams()
        self.rng = SplitMix64(seed)
        self.active_grain: Grain | None = None
        self.cursor = 0
        self.freeze_remaining = 0
        self.silent = True
        self.selections = 0

        w_out, w_in = fade_envelopes(self.params.fade_len)
        self._w_out2 = w_out * w_out
        self._w_in2 = w_in * w_in
        # linear mute ramp; hits exactly zero on its last sample
        L = self.params.fade_len
        self._mute_ramp = 1.0 - (np.arange(L) + 1.0) / L

    def unread(self) -> int:
        if self.active_grain is None:
            return 0
        return self.active_grain.length - self.cursor


def select_grain(state: SynthState, v_in: tuple[float, float]) -> Grain:
    """Pick one of the k nearest fragments uniformly and grow its grain.

    Consumes exactly one RNG draw. Resets the freeze counter.
    """
    hits = state.index.query(v_in, state.params.k)
    chosen = hits[state.rng.below(len(hits))][0]
    state.freeze_remaining = state.params.freeze_hops
    state.selections += 1
    return build_grain(state.corpus, chosen, state.params.n)


def process_hop(state: SynthState, v_in: tuple[float, float]) -> np.ndarray:
    """Emit the next 480-sample stereo block for one query velocity.

    Per hop: below v_silence the output ramps linearly to zero and the
    session goes silent. Otherwise a new grain is selected (and
    crossfaded in over fade_len samples) when coming out of silence,
    when the freeze expires, or when the active grain is nearly
    exhausted; in all other hops the active grain simply continues. A
    selection is held for exactly freeze_hops hops: the selection hop
    plays the grain's head and counts against the freeze.
    """
    params = state.params
    vx, vy = float(v_in[0]), float(v_in[1])
    speed = math.hypot(vx, vy)
    L = params.fade_len

    if speed < params.v_silence:
        block = np.zeros((2, HOP))
        if not state.silent:
            block[:, :L] = _continuation(state, L) * state._mute_ramp
            state.silent = True
            state.active_grain = None
            state.cursor = 0
        return block

    if state.silent or state.freeze_remaining == 0 or state.unread() < HOP + L:
        old_tail = _continuation(state, L)
        grain = select_grain(state, (vx, vy))
        head = state.corpus.clip.samples[:, grain.start : grain.start + HOP]
        block = np.empty((2, HOP))
        block[:, :L] = state._w_out2 * old_tail + state._w_in2 * head[:, :L]
        if L < HOP:
            block[:, L:] = head[:, L:]
        state.active_grain = grain
        state.cursor = HOP
        state.silent = False
    else:
        grain = state.active_grain
        pos = grain.start + state.cursor
        block = state.corpus.clip.samples[:, pos : pos + HOP].copy()
        state.cursor += HOP

    state.freeze_remaining -= 1
    return block


def render_offline(
    corpus: Corpus,
    trace: VelocityTrace,
    seed: int,
    params: SynthParams | None = None,
) -> AudioClip:
    """Deterministic replay of the interactive path over a whole trace."""
    if len(trace) == 0:
        raise ValueError("trace is empty")
    index = embed(corpus)
    state = SynthState(corpus, index, params, seed)
    out = np.empty((2, len(trace) * HOP))
    for h in range(len(trace)):
        out[:, h * HOP : (h + 1) * HOP] = process_hop(state, tuple(trace.samples[h]))
    return AudioClip(sample_rate=REQUIRED_SAMPLE_RATE, samples=out)


def _continuation(state: SynthState, length: int) -> np.ndarray:
    """Next `length` samples the active grain would have played; zero-padded."""
    out = np.zeros((2, length))
    grain = state.active_grain
    if grain is not None:
        take = min(length, state.unread())
        if take > 0:
            pos = grain.start + state.cursor
            out[:, :take] = state.corpus.clip.samples[:, pos : pos + take]
    return out
