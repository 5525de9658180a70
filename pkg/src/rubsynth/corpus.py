"""Grain corpus construction: segmentation, annotation, outlier filtering.

A recorded rubbing clip is cut into 480-sample fragments (10 ms at
48 kHz, one per velocity sample). Each fragment carries the finger
velocity at that instant and its RMS loudness. Fragments whose
loudness-to-squared-speed ratio falls outside the configured percentile
band are rejected; the survivors plus the mean ratio form the corpus the
synthesizer queries.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from rubsynth.audio import REQUIRED_SAMPLE_RATE, AudioClip, file_sha256, load_audio

FRAGMENT_LENGTH = 480
TRACE_RATE = 100
TRACE_DT = 1.0 / TRACE_RATE
TRACE_DT_TOLERANCE = 1e-6
TRACE_HEADER = ("t_s", "vx_mm_s", "vy_mm_s")

CORPUS_FORMAT_VERSION = 1

# a corpus must keep at least this many fragments to serve k-NN queries
DEFAULT_MIN_FRAGMENTS = 25


class TraceFormatError(Exception):
    """Malformed or wrong-rate velocity trace file."""


class CorpusBuildError(Exception):
    """Segmentation or filtering produced an unusable corpus."""


class CorpusManifestError(Exception):
    """Corpus file is unreadable, stale, or references bad audio."""


class CorpusWarning(UserWarning):
    pass


@dataclass
class VelocityTrace:
    """Uniform 100 Hz 2D finger-velocity sequence, mm/s."""

    rate: int
    samples: np.ndarray  # shape (n, 2)

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class Fragment:
    """One annotated 480-sample window of the source clip.

    ``ratio`` is loudness / squared speed; it stays None until
    filter_outliers assigns it (fragments slower than v_min never get
    one, they are dropped first).
    """

    index: int
    velocity: tuple[float, float]
    loudness: float
    ratio: float | None = None

    @property
    def speed(self) -> float:
        return math.hypot(self.velocity[0], self.velocity[1])


@dataclass(frozen=True)
class PrepParams:
    p_lo: float = 5.0
    p_hi: float = 95.0
    v_min: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.p_lo < self.p_hi <= 100.0):
            raise ValueError(f"need 0 <= p_lo < p_hi <= 100, got ({self.p_lo}, {self.p_hi})")
        if self.v_min <= 0.0:
            raise ValueError(f"v_min must be positive, got {self.v_min}")


@dataclass
class FilterStats:
    total: int
    dropped_velocity: int
    dropped_percentile: int
    retained: int


@dataclass
class Corpus:
    """Filtered fragment set plus the stats the synthesizer needs."""

    fragments: list[Fragment]
    mean_ratio: float
    clip: AudioClip
    clip_path: str = ""
    params: PrepParams = field(default_factory=PrepParams)
    filter_stats: FilterStats | None = None

    @property
    def clip_fragment_capacity(self) -> int:
        """Number of whole 480-sample windows in the source clip."""
        return self.clip.num_samples // FRAGMENT_LENGTH


def load_trace(path: str | Path) -> VelocityTrace:
    """Read a `t_s,vx_mm_s,vy_mm_s` CSV sampled at 100 Hz."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise TraceFormatError(f"cannot read {path}: {exc}") from exc

    rows = list(csv.reader(text.splitlines()))
    if not rows or tuple(h.strip() for h in rows[0]) != TRACE_HEADER:
        raise TraceFormatError(f"{path}: header must be {','.join(TRACE_HEADER)}")
    if len(rows) == 1:
        raise TraceFormatError(f"{path}: empty trace")

    times = np.empty(len(rows) - 1)
    samples = np.empty((len(rows) - 1, 2))
    for i, row in enumerate(rows[1:]):
        if len(row) != 3:
            raise TraceFormatError(f"{path}: malformed row {i + 2}: {row!r}")
        try:
            t, vx, vy = (float(cell) for cell in row)
        except ValueError as exc:
            raise TraceFormatError(f"{path}: malformed row {i + 2}: {row!r}") from exc
        times[i] = t
        samples[i] = (vx, vy)

    if not np.all(np.isfinite(times)) or not np.all(np.isfinite(samples)):
        raise TraceFormatError(f"{path}: non-finite value in trace")
    if len(times) > 1:
        steps = np.diff(times)
        if np.any(np.abs(steps - TRACE_DT) > TRACE_DT_TOLERANCE):
            raise TraceFormatError(f"{path}: trace not sampled at {TRACE_RATE} Hz")
    return VelocityTrace(rate=TRACE_RATE, samples=samples)


def rms_loudness(window: np.ndarray) -> float:
    """RMS amplitude of one 480-sample window, pooled over channels."""
    window = np.asarray(window, dtype=np.float64)
    if window.ndim == 1:
        window = window[np.newaxis, :]
    if window.shape[1] != FRAGMENT_LENGTH:
        raise ValueError(f"window must be {FRAGMENT_LENGTH} samples, got {window.shape[1]}")
    return float(np.sqrt(np.mean(window * window)))


def segment(clip: AudioClip, trace: VelocityTrace) -> list[Fragment]:
    """Cut the clip into annotated fragments, one per velocity sample.

    The shorter input wins: excess audio or trace samples are truncated
    with a warning. A trailing partial window is never a fragment.
    """
    if clip.sample_rate != REQUIRED_SAMPLE_RATE:
        raise CorpusBuildError(f"clip sample rate {clip.sample_rate} != {REQUIRED_SAMPLE_RATE}")
    audio_capacity = clip.num_samples // FRAGMENT_LENGTH
    count = min(audio_capacity, len(trace))
    if count == 0:
        raise CorpusBuildError("no complete fragments: clip or trace too short")
    if audio_capacity != len(trace):
        warnings.warn(
            f"clip holds {audio_capacity} fragments but trace has {len(trace)} samples; "
            f"truncating to {count}",
            CorpusWarning,
            stacklevel=2,
        )

    windows = clip.samples[:, : count * FRAGMENT_LENGTH].reshape(
        clip.channels, count, FRAGMENT_LENGTH
    )
    fragments = []
    for j in range(count):
        vx, vy = trace.samples[j]
        fragments.append(
            Fragment(
                index=j,
                velocity=(float(vx), float(vy)),
                loudness=rms_loudness(windows[:, j, :]),
            )
        )
    return fragments


def linear_percentile(sorted_values: np.ndarray, p: float) -> float:
    """Linear-interpolation percentile with inclusive endpoints.

    rank = p/100 * (N-1) over the sorted list, interpolating between the
    two bracketing order statistics.
    """
    n = len(sorted_values)
    if n == 0:
        raise ValueError("empty population")
    rank = p / 100.0 * (n - 1)
    lo = int(math.floor(rank))
    hi = min(lo + 1, n - 1)
    frac = rank - lo
    return float(sorted_values[lo] + frac * (sorted_values[hi] - sorted_values[lo]))


def filter_outliers(
    fragments: list[Fragment],
    clip: AudioClip,
    params: PrepParams | None = None,
    clip_path: str = "",
    min_fragments: int = DEFAULT_MIN_FRAGMENTS,
) -> Corpus:
    """Drop slow and ratio-outlier fragments, producing the corpus.

    Fragments slower than v_min carry no usable rubbing sound and no
    defined ratio; they go first. The rest get ratio = loudness/speed^2,
    and those strictly outside the [p_lo, p_hi] percentile band of the
    ratio population are removed. Degenerate all-equal populations keep
    everything.
    """
    params = params or PrepParams()
    total = len(fragments)

    with_ratio = []
    for frag in fragments:
        if frag.speed < params.v_min:
            continue
        with_ratio.append(replace(frag, ratio=frag.loudness / frag.speed**2))
    dropped_velocity = total - len(with_ratio)
    if not with_ratio:
        raise CorpusBuildError(f"no fragment reaches v_min = {params.v_min} mm/s")

    ratios = np.sort(np.array([f.ratio for f in with_ratio]))
    lo_value = linear_percentile(ratios, params.p_lo)
    hi_value = linear_percentile(ratios, params.p_hi)
    retained = [f for f in with_ratio if lo_value <= f.ratio <= hi_value]
    dropped_percentile = len(with_ratio) - len(retained)

    if len(retained) < min_fragments:
        raise CorpusBuildError(
            f"only {len(retained)} fragments retained, need at least {min_fragments}"
        )
    mean_ratio = float(np.mean([f.ratio for f in retained]))

    return Corpus(
        fragments=retained,
        mean_ratio=mean_ratio,
        clip=clip,
        clip_path=clip_path,
        params=params,
        filter_stats=FilterStats(
            total=total,
            dropped_velocity=dropped_velocity,
            dropped_percentile=dropped_percentile,
            retained=len(retained),
        ),
    )


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write the corpus manifest as JSON next to its source WAV.

    Audio samples are not embedded; the manifest stores a relative path
    and a SHA-256 digest so the WAV can be re-read and verified on load.
    """
    path = Path(path)
    if not corpus.clip_path:
        raise CorpusManifestError("corpus has no source WAV path; save the audio first")
    audio_path = Path(corpus.clip_path)
    if not audio_path.exists():
        raise CorpusManifestError(f"source WAV missing: {audio_path}")

    manifest = {
        "format_version": CORPUS_FORMAT_VERSION,
        "audio_path": _relative_to(audio_path, path.parent),
        "audio_sha256": file_sha256(audio_path),
        "sample_rate": REQUIRED_SAMPLE_RATE,
        "fragment_length": FRAGMENT_LENGTH,
        "mean_ratio": corpus.mean_ratio,
        "params": {
            "p_lo": corpus.params.p_lo,
            "p_hi": corpus.params.p_hi,
            "v_min": corpus.params.v_min,
        },
        "fragments": [
            {
                "index": f.index,
                "vx": f.velocity[0],
                "vy": f.velocity[1],
                "loudness": f.loudness,
                "ratio": f.ratio,
            }
            for f in corpus.fragments
        ],
    }
    path.write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")


def load_corpus(path: str | Path) -> Corpus:
    """Read a manifest, re-read its WAV, and verify the digest."""
    path = Path(path)
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise CorpusManifestError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CorpusManifestError(f"{path}: not valid JSON: {exc}") from exc

    version = manifest.get("format_version")
    if version != CORPUS_FORMAT_VERSION:
        raise CorpusManifestError(
            f"{path}: unknown format_version {version!r} (expected {CORPUS_FORMAT_VERSION})"
        )
    if manifest.get("fragment_length") != FRAGMENT_LENGTH:
        raise CorpusManifestError(f"{path}: unsupported fragment_length")

    audio_path = (path.parent / manifest["audio_path"]).resolve()
    if not audio_path.exists():
        raise CorpusManifestError(f"{path}: referenced audio missing: {audio_path}")
    digest = file_sha256(audio_path)
    if digest != manifest["audio_sha256"]:
        raise CorpusManifestError(
            f"{path}: audio digest mismatch for {audio_path} "
            f"(expected {manifest['audio_sha256']}, found {digest})"
        )
    clip = load_audio(audio_path)

    params = PrepParams(**manifest["params"])
    fragments = [
        Fragment(
            index=int(row["index"]),
            velocity=(float(row["vx"]), float(row["vy"])),
            loudness=float(row["loudness"]),
            ratio=float(row["ratio"]),
        )
        for row in manifest["fragments"]
    ]
    capacity = clip.num_samples // FRAGMENT_LENGTH
    for frag in fragments:
        if not (0 <= frag.index < capacity):
            raise CorpusManifestError(
                f"{path}: fragment {frag.index} outside clip ({capacity} windows)"
            )

    return Corpus(
        fragments=fragments,
        mean_ratio=float(manifest["mean_ratio"]),
        clip=clip,
        clip_path=str(audio_path),
        params=params,
    )


def _relative_to(target: Path, base: Path) -> str:
    try:
        return str(target.resolve().relative_to(base.resolve()))
    except ValueError:
        import os

        return os.path.relpath(target.resolve(), base.resolve())
