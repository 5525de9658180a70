import numpy as np
import pytest

from rubsynth.audio import AudioClip, load_audio, save_wav24
from rubsynth.corpus import (
    FRAGMENT_LENGTH,
    Corpus,
    PrepParams,
    VelocityTrace,
    filter_outliers,
    save_corpus,
    segment,
)


def make_noise_clip(n_fragments: int, target_rms: np.ndarray, seed: int = 0) -> AudioClip:
    """Stereo noise clip whose j-th 480-sample window has RMS target_rms[j]."""
    rng = np.random.default_rng(seed)
    samples = rng.standard_normal((2, n_fragments * FRAGMENT_LENGTH))
    windows = samples.reshape(2, n_fragments, FRAGMENT_LENGTH)
    current = np.sqrt(np.mean(windows**2, axis=(0, 2)))
    windows *= (target_rms / current)[np.newaxis, :, np.newaxis]
    return AudioClip(sample_rate=48000, samples=np.clip(samples, -1.0, 1.0))


def make_quadratic_corpus(
    n_fragments: int = 400,
    seed: int = 0,
    coeff: float = 1e-5,
    speeds: np.ndarray | None = None,
) -> tuple[Corpus, VelocityTrace]:
    """Corpus whose loudness follows loudness = coeff * speed^2 exactly.

    The velocity profile is temporally smooth, like a real rubbing
    gesture: speed sweeps up and back down with a little jitter while the
    direction wanders. Smoothness matters because grains pull in
    clip-order neighbor fragments. Window RMS targets are set before
    clipping, so very loud windows can deviate; coeff keeps everything
    well under full scale.
    """
    rng = np.random.default_rng(seed)
    if speeds is None:
        ramp = np.abs(np.linspace(-1.0, 1.0, n_fragments))
        speeds = 280.0 - 275.0 * ramp + rng.uniform(-2.0, 2.0, n_fragments)
        speeds = np.clip(speeds, 5.0, 280.0)
    angles = np.cumsum(rng.uniform(-0.2, 0.2, n_fragments))
    velocities = np.column_stack([speeds * np.cos(angles), speeds * np.sin(angles)])
    trace = VelocityTrace(rate=100, samples=velocities)
    clip = make_noise_clip(n_fragments, coeff * speeds**2, seed=seed + 1)
    fragments = segment(clip, trace)
    corpus = filter_outliers(fragments, clip, PrepParams())
    return corpus, trace


@pytest.fixture
def small_corpus():
    corpus, _ = make_quadratic_corpus(n_fragments=200, seed=3)
    return corpus


@pytest.fixture
def disk_corpus(tmp_path):
    """Corpus whose WAV and manifest live on disk, annotations matching the
    quantized 24-bit audio exactly."""
    corpus_mem, trace = make_quadratic_corpus(n_fragments=300, seed=11)
    wav_path = tmp_path / "material.wav"
    save_wav24(wav_path, corpus_mem.clip)
    clip = load_audio(wav_path)
    fragments = segment(clip, trace)
    corpus = filter_outliers(fragments, clip, PrepParams(), clip_path=str(wav_path))
    manifest_path = tmp_path / "material.json"
    save_corpus(corpus, manifest_path)
    return corpus, manifest_path, wav_path, trace
