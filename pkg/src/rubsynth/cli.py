"""Command-line front end: corpus prep, offline render, bench, serve, stats.

Exit codes: 0 success, 1 build/processing failure, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from rubsynth.audio import AudioFormatError, load_audio, save_wav24
from rubsynth.corpus import (
    CorpusBuildError,
    CorpusManifestError,
    PrepParams,
    TraceFormatError,
    filter_outliers,
    load_corpus,
    load_trace,
    save_corpus,
    segment,
)
from rubsynth.index import embed, knn
from rubsynth.synth import HOP, SynthParams, SynthState, process_hop, render_offline
from rubsynth.velocity import load_positions, pipeline

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_BAD_INPUT = 2


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (AudioFormatError, TraceFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (CorpusBuildError, CorpusManifestError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rubsynth")
    sub = parser.add_subparsers(dest="command", required=True)

    prep = sub.add_parser("prepare", help="build a corpus from a recording and a trace")
    prep.add_argument("--audio", required=True, help="48 kHz WAV of the rubbing recording")
    prep.add_argument("--trace", required=True, help="velocity CSV (or positions CSV)")
    prep.add_argument(
        "--positions",
        action="store_true",
        help="treat --trace as t_s,x_mm,y_mm positions and derive velocity",
    )
    prep.add_argument("--out", required=True, help="corpus JSON to write")
    prep.add_argument("--p-lo", type=float, default=5.0)
    prep.add_argument("--p-hi", type=float, default=95.0)
    prep.add_argument("--v-min", type=float, default=1.0)
    prep.set_defaults(func=_cmd_prepare)

    rend = sub.add_parser("render", help="render a trace through a corpus to WAV")
    rend.add_argument("--corpus", required=True)
    rend.add_argument("--trace", required=True)
    rend.add_argument("--out", required=True)
    rend.add_argument("--seed", type=int, default=0)
    rend.set_defaults(func=_cmd_render)

    bench = sub.add_parser("bench", help="measure per-hop and k-NN latency")
    bench.add_argument("--corpus", required=True)
    bench.add_argument("--hops", type=int, default=10000)
    bench.set_defaults(func=_cmd_bench)

    stats = sub.add_parser("stats", help="print corpus summary")
    stats.add_argument("--corpus", required=True)
    stats.add_argument("--csv", help="write v_sq,loudness,ratio rows for plotting")
    stats.set_defaults(func=_cmd_stats)

    serve = sub.add_parser("serve", help="run the interactive sonification service")
    serve.add_argument("--listen", default="127.0.0.1:8765", help="host:port")
    serve.add_argument("--corpus-dir", required=True)
    serve.set_defaults(func=_cmd_serve)

    return parser


def _cmd_prepare(args) -> int:
    clip = load_audio(args.audio)
    if args.positions:
        trace = pipeline(load_positions(args.trace))
    else:
        trace = load_trace(args.trace)
    params = PrepParams(p_lo=args.p_lo, p_hi=args.p_hi, v_min=args.v_min)

    fragments = segment(clip, trace)
    corpus = filter_outliers(fragments, clip, params, clip_path=str(Path(args.audio).resolve()))
    save_corpus(corpus, args.out)

    stats = corpus.filter_stats
    print(f"total fragments: {stats.total}")
    print(f"dropped (velocity < {params.v_min} mm/s): {stats.dropped_velocity}")
    print(f"dropped (ratio percentile): {stats.dropped_percentile}")
    print(f"retained: {stats.retained}")
    print(f"mean_ratio: {corpus.mean_ratio!r}")
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_render(args) -> int:
    try:
        corpus = load_corpus(args.corpus)
        trace = load_trace(args.trace)
    except (TraceFormatError, AudioFormatError) as exc:
        # render treats every input problem as a processing failure
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    t0 = time.perf_counter()
    clip = render_offline(corpus, trace, seed=args.seed)
    elapsed = time.perf_counter() - t0
    save_wav24(args.out, clip)
    rtf = clip.duration / elapsed if elapsed > 0 else float("inf")
    print(f"rendered {clip.duration:.2f} s to {args.out}")
    print(f"realtime_factor: {rtf:.1f}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    corpus = load_corpus(args.corpus)
    index = embed(corpus)
    state = SynthState(corpus, index, SynthParams(), seed=1)
    hops = args.hops

    # synthetic sweep exercising selection, freezing, and silence
    rng = np.random.default_rng(7)
    speeds = np.abs(300.0 * np.sin(np.linspace(0, 20 * np.pi, hops))) + 2.0
    angles = rng.uniform(0, 2 * np.pi, hops)
    velocities = np.column_stack([speeds * np.cos(angles), speeds * np.sin(angles)])

    process_hop(state, tuple(velocities[0]))  # warm the JIT path before timing
    hop_times = np.empty(hops)
    for i in range(hops):
        t0 = time.perf_counter()
        block = process_hop(state, tuple(velocities[i]))
        hop_times[i] = time.perf_counter() - t0
        assert block.shape == (2, HOP)

    queries = velocities[rng.integers(0, hops, 1000)]
    knn_times = np.empty(len(queries))
    for i, q in enumerate(queries):
        t0 = time.perf_counter()
        knn(index, tuple(q), SynthParams().k)
        knn_times[i] = time.perf_counter() - t0

    us = 1e6
    report = {
        "fragments": len(corpus.fragments),
        "hops": hops,
        "p50_hop_us": round(float(np.percentile(hop_times, 50) * us), 1),
        "p99_hop_us": round(float(np.percentile(hop_times, 99) * us), 1),
        "max_hop_us": round(float(hop_times.max() * us), 1),
        "p50_knn_us": round(float(np.percentile(knn_times, 50) * us), 1),
        "p99_knn_us": round(float(np.percentile(knn_times, 99) * us), 1),
        "max_knn_us": round(float(knn_times.max() * us), 1),
        "realtime_factor": round(float(hops * HOP / 48000 / hop_times.sum()), 1),
    }
    print(json.dumps(report, indent=1))
    return EXIT_OK


def _cmd_stats(args) -> int:
    corpus = load_corpus(args.corpus)
    speeds_sq = np.array([f.speed**2 for f in corpus.fragments])
    loudness = np.array([f.loudness for f in corpus.fragments])
    ratios = np.array([f.ratio for f in corpus.fragments])

    print(f"corpus: {args.corpus}")
    print(f"source: {corpus.clip_path}")
    print(f"duration_s: {corpus.clip.duration:.2f}")
    print(f"retained: {len(corpus.fragments)}")
    print(f"mean_ratio: {corpus.mean_ratio!r}")
    print(f"speed_mm_s: min {np.sqrt(speeds_sq.min()):.2f} max {np.sqrt(speeds_sq.max()):.2f}")
    print(f"loudness: min {loudness.min():.6f} max {loudness.max():.6f}")

    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write("v_sq,loudness,ratio\n")
            for v2, a, r in zip(speeds_sq, loudness, ratios):
                fh.write(f"{float(v2)!r},{float(a)!r},{float(r)!r}\n")
        print(f"wrote {args.csv}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from rubsynth.service import create_app

    host, _, port = args.listen.rpartition(":")
    app = create_app(args.corpus_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
