"""Interactive sonification service.

Hosts corpora and runs sessions: pointer events come in over a
full-duplex WebSocket (text JSON control messages), audio goes back as
binary frames, one 480-sample stereo block per 10 ms tick. The
SessionEngine is the transport-free core - it owns the pointer buffer,
the incremental velocity pipeline, and the synthesizer state - so tests
drive it with a logical clock and the WebSocket layer stays thin.
"""

from __future__ import annotations

import asyncio
import json
import secrets
import struct
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import FileResponse, JSONResponse

from rubsynth.corpus import Corpus, load_corpus
from rubsynth.index import GrainIndex, embed
from rubsynth.synth import HOP, SynthParams, SynthState, process_hop
from rubsynth.velocity import DEFAULT_SMOOTH_WINDOW, PointerEvent, pipeline

TICK_SECONDS = 0.01
IDLE_TIMEOUT = 0.1  # no events for this long means the finger lifted
EVENT_WINDOW = 0.25  # velocity is derived from events this recent
MM_PER_INCH = 25.4
MAX_SESSIONS = 64

FRAME_MAGIC = 0x534F4E47
FRAME_VERSION = 1
# little-endian: magic u32, version u16, flags u16, sequence u32, reserved u32
_FRAME_HEADER = struct.Struct("<IHHII")
FRAME_HEADER_BYTES = _FRAME_HEADER.size  # 16
FRAME_PAYLOAD_BYTES = HOP * 2 * 4  # 3840: interleaved stereo f32le
FRAME_BYTES = FRAME_HEADER_BYTES + FRAME_PAYLOAD_BYTES  # 3856


def opened_message(session_id: str) -> dict:
    """Control reply sent once a session is live."""
    return {
        "type": "opened",
        "session": session_id,
        "sample_rate": 48000,
        "block": HOP,
        "format": "f32le",
    }


def error_message(code: str, message: str) -> dict:
    return {"type": "error", "code": code, "message": message}


def encode_frame(sequence: int, block: np.ndarray) -> bytes:
    """Pack one stereo hop block into the wire frame."""
    header = _FRAME_HEADER.pack(FRAME_MAGIC, FRAME_VERSION, 0, sequence & 0xFFFFFFFF, 0)
    interleaved = np.empty(HOP * 2, dtype="<f4")
    interleaved[0::2] = block[0]
    interleaved[1::2] = block[1]
    return header + interleaved.tobytes()


def decode_frame(data: bytes) -> tuple[int, np.ndarray]:
    """Unpack a wire frame into (sequence, stereo block)."""
    if len(data) != FRAME_BYTES:
        raise ValueError(f"frame must be {FRAME_BYTES} bytes, got {len(data)}")
    magic, version, _flags, sequence, _reserved = _FRAME_HEADER.unpack_from(data)
    if magic != FRAME_MAGIC:
        raise ValueError(f"bad frame magic 0x{magic:08X}")
    if version != FRAME_VERSION:
        raise ValueError(f"unsupported frame version {version}")
    interleaved = np.frombuffer(data, dtype="<f4", offset=FRAME_HEADER_BYTES)
    return sequence, np.vstack([interleaved[0::2], interleaved[1::2]]).astype(np.float64)


@dataclass
class SessionConfig:
    corpus_id: str
    dpi: float = 96.0
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.dpi <= 0:
            raise ValueError(f"dpi must be positive, got {self.dpi}")


@dataclass
class SessionStats:
    hops: int = 0
    underruns: int = 0
    dropped_events: int = 0
    selections: int = 0


class SessionEngine:
    """One session's pipeline: pointer buffer -> velocity -> synth -> frames.

    All methods run on a single logical clock that advances 10 ms per
    tick; the transport layer is responsible for calling tick() on a
    real-time cadence.
    """

    def __init__(
        self,
        corpus: Corpus,
        index: GrainIndex,
        dpi: float = 96.0,
        seed: int = 0,
        params: SynthParams | None = None,
        record_velocities: bool = False,
    ):
        self.state = SynthState(corpus, index, params, seed)
        self.dpi = dpi
        self.stats = SessionStats()
        self.now = 0.0
        self._events: deque[PointerEvent] = deque()
        self._last_event_t: float | None = None  # client timebase
        self._clock_offset: float | None = None  # session time - client time
        self.velocity_log: list[tuple[float, float]] | None = [] if record_velocities else None

    def ingest_pointer(self, t: float, x_px: float, y_px: float) -> bool:
        """Buffer one pointer event (pixels); returns False if dropped."""
        if self._last_event_t is not None and t <= self._last_event_t:
            self.stats.dropped_events += 1
            return False
        self._last_event_t = t
        if self._clock_offset is None:
            self._clock_offset = self.now - t
        scale = MM_PER_INCH / self.dpi
        self._events.append(PointerEvent(t + self._clock_offset, x_px * scale, y_px * scale))
        return True

    def current_velocity(self) -> tuple[float, float]:
        """Velocity for the upcoming hop: newest clean pipeline output.

        Zero when the pointer is idle (> 100 ms without events) or when
        too few events have arrived to differentiate. The last two grid
        samples of the chain are skipped: truncated-window smoothing
        biases them (a constant-velocity stroke would read at half
        speed), so the freshest unbiased estimate lags 20 ms.
        """
        while self._events and self._events[0].t < self.now - EVENT_WINDOW:
            self._events.popleft()
        usable = [e for e in self._events if e.t <= self.now + 1e-9]
        if not usable or self.now - usable[-1].t > IDLE_TIMEOUT:
            return (0.0, 0.0)
        if len(usable) < 2 or usable[-1].t - usable[0].t < 2 * TICK_SECONDS:
            return (0.0, 0.0)
        trace = pipeline(usable, DEFAULT_SMOOTH_WINDOW)
        newest_clean = max(0, len(trace.samples) - DEFAULT_SMOOTH_WINDOW // 2 - 2)
        vx, vy = trace.samples[newest_clean]
        return (float(vx), float(vy))

    def tick(self) -> bytes:
        """Advance one hop: derive velocity, synthesize, frame the block."""
        velocity = self.current_velocity()
        if self.velocity_log is not None:
            self.velocity_log.append(velocity)
        block = process_hop(self.state, velocity)
        frame = encode_frame(self.stats.hops, block)
        self.stats.hops += 1
        self.stats.selections = self.state.selections
        self.now = self.stats.hops * TICK_SECONDS
        return frame


class CorpusHost:
    """Loads and caches corpora (and their indexes) from a directory."""

    def __init__(self, corpus_dir: str | Path):
        self.corpus_dir = Path(corpus_dir)
        self._cache: dict[str, tuple[Corpus, GrainIndex]] = {}

    def list_ids(self) -> list[str]:
        return sorted(p.stem for p in self.corpus_dir.glob("*.json"))

    def get(self, corpus_id: str) -> tuple[Corpus, GrainIndex]:
        if corpus_id not in self._cache:
            manifest = self.corpus_dir / f"{corpus_id}.json"
            if not manifest.exists():
                raise KeyError(corpus_id)
            corpus = load_corpus(manifest)
            self._cache[corpus_id] = (corpus, embed(corpus))
        return self._cache[corpus_id]

    def image_path(self, corpus_id: str) -> Path | None:
        for suffix in (".png", ".jpg", ".jpeg"):
            candidate = self.corpus_dir / f"{corpus_id}{suffix}"
            if candidate.exists():
                return candidate
        return None


def create_app(corpus_dir: str | Path) -> FastAPI:
    """FastAPI app serving the corpus catalog and live sessions."""
    host = CorpusHost(corpus_dir)
    app = FastAPI(title="rubsynth service")
    app.state.host = host
    app.state.active_sessions = 0

    @app.get("/corpora")
    def corpora():
        entries = []
        for corpus_id in host.list_ids():
            try:
                corpus, _ = host.get(corpus_id)
            except Exception:
                continue  # unreadable manifests are not listed
            entries.append(
                {
                    "id": corpus_id,
                    "fragments": len(corpus.fragments),
                    "duration_s": corpus.clip.duration,
                }
            )
        return entries

    @app.get("/materials/{corpus_id}/image")
    def material_image(corpus_id: str):
        path = host.image_path(corpus_id)
        if path is None:
            return JSONResponse({"error": "no image"}, status_code=404)
        return FileResponse(path)

    @app.websocket("/session")
    async def session(ws: WebSocket):
        await ws.accept()
        engine: SessionEngine | None = None
        ticker: asyncio.Task | None = None

        async def run_ticker():
            loop = asyncio.get_running_loop()
            next_t = loop.time() + TICK_SECONDS
            while True:
                delay = next_t - loop.time()
                if delay > 0:
                    await asyncio.sleep(delay)
                else:
                    engine.stats.underruns += 1
                await ws.send_bytes(engine.tick())
                next_t += TICK_SECONDS

        async def send_error(code: str, message: str):
            await ws.send_text(json.dumps(error_message(code, message)))

        try:
            while True:
                try:
                    raw = await ws.receive_text()
                except (WebSocketDisconnect, RuntimeError, KeyError):
                    break
                try:
                    msg = json.loads(raw)
                    msg_type = msg["type"]
                except (json.JSONDecodeError, KeyError, TypeError):
                    await send_error("bad_message", "not a valid control message")
                    continue

                if msg_type == "open":
                    if engine is not None:
                        await send_error("already_open", "session already open")
                        continue
                    if app.state.active_sessions >= MAX_SESSIONS:
                        await send_error("capacity", "too many sessions")
                        continue
                    try:
                        corpus, index = host.get(str(msg["corpus"]))
                    except KeyError:
                        await send_error("unknown_corpus", f"no corpus {msg.get('corpus')!r}")
                        continue
                    except Exception as exc:
                        await send_error("corpus_error", str(exc))
                        continue
                    try:
                        config = SessionConfig(
                            corpus_id=str(msg["corpus"]),
                            dpi=float(msg.get("dpi", 96.0)),
                            seed=msg.get("seed"),
                        )
                    except (ValueError, TypeError) as exc:
                        await send_error("bad_config", str(exc))
                        continue
                    seed = config.seed
                    if seed is None:
                        seed = secrets.randbits(63)
                    engine = SessionEngine(corpus, index, dpi=config.dpi, seed=int(seed))
                    session_id = secrets.token_hex(8)
                    app.state.active_sessions += 1
                    await ws.send_text(json.dumps(opened_message(session_id)))
                    ticker = asyncio.create_task(run_ticker())
                elif msg_type == "pointer":
                    if engine is None:
                        await send_error("not_open", "open a session first")
                        continue
                    try:
                        engine.ingest_pointer(float(msg["t"]), float(msg["x"]), float(msg["y"]))
                    except (KeyError, TypeError, ValueError):
                        await send_error("bad_message", "pointer needs numeric t, x, y")
                elif msg_type == "close":
                    break
                else:
                    await send_error("bad_message", f"unknown type {msg_type!r}")
        finally:
            if ticker is not None:
                ticker.cancel()
            if engine is not None:
                app.state.active_sessions -= 1

    return app
