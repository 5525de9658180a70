"""RIFF/WAVE input and output at 48 kHz.

Reads PCM 16/24-bit integer and 32-bit float WAV files, always yielding
stereo float64 samples in [-1, 1]. Writes 24-bit PCM. No resampling:
anything that is not 48 kHz is rejected so corpus fragment boundaries
stay aligned with the 100 Hz velocity grid.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

REQUIRED_SAMPLE_RATE = 48000

_FORMAT_PCM = 0x0001
_FORMAT_IEEE_FLOAT = 0x0003

# full-scale divisors used to normalize integer PCM to [-1, 1]
_INT16_SCALE = 32768.0
_INT24_SCALE = 8388608.0
# 24-bit writes map +/-1.0 to +/-(2^23 - 1) so +1.0 never overflows
_INT24_WRITE_SCALE = 8388607.0


class AudioFormatError(Exception):
    """Unreadable, unsupported, or wrong-rate WAV input."""


@dataclass
class AudioClip:
    """Stereo sample buffer, channels-first float64 in [-1, 1]."""

    sample_rate: int
    samples: np.ndarray  # shape (channels, n)

    @property
    def channels(self) -> int:
        return self.samples.shape[0]

    @property
    def num_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        return self.num_samples / self.sample_rate


def load_audio(path: str | Path) -> AudioClip:
    """Read a 48 kHz mono/stereo WAV file; mono is duplicated to stereo."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise AudioFormatError(f"cannot read {path}: {exc}") from exc

    if len(raw) < 12 or raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise AudioFormatError(f"{path} is not a RIFF/WAVE file")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw):
        chunk_id = raw[pos : pos + 4]
        (chunk_size,) = struct.unpack_from("<I", raw, pos + 4)
        body = raw[pos + 8 : pos + 8 + chunk_size]
        if chunk_id == b"fmt ":
            if chunk_size < 16:
                raise AudioFormatError(f"{path}: truncated fmt chunk")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            data = body
        pos += 8 + chunk_size + (chunk_size & 1)  # chunks are word-aligned

    if fmt is None or data is None:
        raise AudioFormatError(f"{path}: missing fmt or data chunk")

    format_tag, channels, sample_rate, _byte_rate, _block_align, bits = fmt
    if sample_rate != REQUIRED_SAMPLE_RATE:
        raise AudioFormatError(
            f"{path}: unsupported sample rate {sample_rate} (need {REQUIRED_SAMPLE_RATE})"
        )
    if channels not in (1, 2):
        raise AudioFormatError(f"{path}: unsupported channel count {channels}")

    if format_tag == _FORMAT_PCM and bits == 16:
        flat = np.frombuffer(data[: len(data) - len(data) % 2], dtype="<i2")
        values = flat.astype(np.float64) / _INT16_SCALE
    elif format_tag == _FORMAT_PCM and bits == 24:
        usable = len(data) - len(data) % 3
        triplets = np.frombuffer(data[:usable], dtype=np.uint8).reshape(-1, 3)
        ints = (
            triplets[:, 0].astype(np.int32)
            | (triplets[:, 1].astype(np.int32) << 8)
            | (triplets[:, 2].astype(np.int32) << 16)
        )
        ints = np.where(ints >= 1 << 23, ints - (1 << 24), ints)
        values = ints.astype(np.float64) / _INT24_SCALE
    elif format_tag == _FORMAT_IEEE_FLOAT and bits == 32:
        flat = np.frombuffer(data[: len(data) - len(data) % 4], dtype="<f4")
        values = flat.astype(np.float64)
    else:
        raise AudioFormatError(
            f"{path}: unsupported encoding (format tag {format_tag}, {bits}-bit)"
        )

    usable_frames = len(values) - len(values) % channels
    frames = values[:usable_frames].reshape(-1, channels).T
    if channels == 1:
        frames = np.vstack([frames, frames])
    return AudioClip(sample_rate=sample_rate, samples=np.ascontiguousarray(frames))


def save_wav24(path: str | Path, clip: AudioClip) -> None:
    """Write a stereo 24-bit PCM WAV, clamping samples to [-1, 1].

    Quantization rounds half away from zero so renders are bit-stable
    across platforms.
    """
    samples = np.clip(clip.samples, -1.0, 1.0)
    scaled = samples * _INT24_WRITE_SCALE
    quantized = np.sign(scaled) * np.floor(np.abs(scaled) + 0.5)
    ints = quantized.astype(np.int64).T.reshape(-1)  # interleave frames

    u = (ints & 0xFFFFFF).astype(np.uint32)
    body = np.empty((len(u), 3), dtype=np.uint8)
    body[:, 0] = u & 0xFF
    body[:, 1] = (u >> 8) & 0xFF
    body[:, 2] = (u >> 16) & 0xFF
    payload = body.tobytes()

    channels = clip.channels
    byte_rate = clip.sample_rate * channels * 3
    header = b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE"
    header += b"fmt " + struct.pack(
        "<IHHIIHH", 16, _FORMAT_PCM, channels, clip.sample_rate, byte_rate, channels * 3, 24
    )
    header += b"data" + struct.pack("<I", len(payload))
    Path(path).write_bytes(header + payload)


def file_sha256(path: str | Path) -> str:
    """Lowercase hex SHA-256 of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()
