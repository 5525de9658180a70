"""rubsynth: velocity-driven granular synthesis of material rubbing sound.

Builds an annotated grain corpus from a recorded rubbing clip plus a
synchronized finger-velocity trace, then synthesizes continuous contact
sound from live or recorded pointer velocity.
"""

from rubsynth.audio import AudioClip, AudioFormatError, load_audio, save_wav24
from rubsynth.corpus import (
    Corpus,
    CorpusBuildError,
    CorpusManifestError,
    Fragment,
    PrepParams,
    TraceFormatError,
    VelocityTrace,
    filter_outliers,
    load_corpus,
    load_trace,
    rms_loudness,
    save_corpus,
    segment,
)
from rubsynth.index import GrainIndex, distance, embed, knn
from rubsynth.synth import Grain, SynthParams, SynthState, build_grain, process_hop, render_offline, select_grain

__version__ = "0.1.0"

__all__ = [
    "AudioClip",
    "AudioFormatError",
    "Corpus",
    "CorpusBuildError",
    "CorpusManifestError",
    "Fragment",
    "Grain",
    "GrainIndex",
    "PrepParams",
    "SynthParams",
    "SynthState",
    "TraceFormatError",
    "VelocityTrace",
    "build_grain",
    "distance",
    "embed",
    "filter_outliers",
    "knn",
    "load_audio",
    "load_corpus",
    "load_trace",
    "process_hop",
    "render_offline",
    "rms_loudness",
    "save_corpus",
    "save_wav24",
    "segment",
    "select_grain",
]
