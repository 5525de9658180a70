/**
 * Gapless scheduling of decoded audio frames onto an audio sink.
 *
 * The sink abstracts WebAudio so the player runs identically under a
 * real AudioContext and under test clocks. Frames pass through the
 * jitter buffer, then each is scheduled at a running timeline position
 * exactly one block after its predecessor; falling behind the sink
 * clock counts as an underrun and realigns the timeline.
 */

import { JitterBuffer } from "./jitterBuffer.js";
import { AudioFrame, BLOCK_SECONDS, decodeFrame } from "./protocol.js";

export interface AudioSink {
  readonly sampleRate: number;
  /** Current playback clock in seconds. */
  now(): number;
  /** Schedule one stereo block to start at `when` (sink clock seconds). */
  schedule(frame: AudioFrame, when: number): void;
}

export interface PlayerStats {
  played: number;
  underruns: number;
  gaps: number;
  late: number;
  decodeErrors: number;
}

export class StreamPlayer {
  private sink: AudioSink;
  private buffer: JitterBuffer;
  private jitterDelay: number;
  private nextTime: number | null = null;
  private underruns = 0;
  private played = 0;
  private decodeErrors = 0;

  constructor(sink: AudioSink, jitterFrames = 3) {
    this.sink = sink;
    this.buffer = new JitterBuffer(jitterFrames);
    this.jitterDelay = jitterFrames * BLOCK_SECONDS;
  }

  /** Added latency of the prefill, for the on-screen meter. */
  get jitterDelayMs(): number {
    return this.jitterDelay * 1000;
  }

  get stats(): PlayerStats {
    return {
      played: this.played,
      underruns: this.underruns,
      gaps: this.buffer.gaps,
      late: this.buffer.late,
      decodeErrors: this.decodeErrors,
    };
  }

  /** Decode one wire frame and schedule whatever became ready. */
  pushFrameBytes(data: ArrayBuffer): void {
    let frame: AudioFrame;
    try {
      frame = decodeFrame(data);
    } catch {
      this.decodeErrors += 1;
      return;
    }
    this.buffer.push(frame);
    this.pump();
  }

  private pump(): void {
    for (let frame = this.buffer.next(); frame !== null; frame = this.buffer.next()) {
      if (this.nextTime === null) {
        this.nextTime = this.sink.now() + this.jitterDelay;
      }
      if (this.nextTime < this.sink.now()) {
        this.underruns += 1;
        this.nextTime = this.sink.now() + BLOCK_SECONDS;
      }
      this.sink.schedule(frame, this.nextTime);
      this.nextTime += BLOCK_SECONDS;
      this.played += 1;
    }
  }
}

/**
 * Sliding-window latency meter: mean of (frame receipt time - newest
 * pointer send time) over the last second, plus the fixed jitter delay.
 */
export class LatencyMeter {
  private lastPointerAt: number | null = null;
  private samples: Array<{ at: number; latency: number }> = [];
  private jitterMs: number;

  constructor(jitterMs: number) {
    this.jitterMs = jitterMs;
  }

  pointerSent(nowSeconds: number): void {
    this.lastPointerAt = nowSeconds;
  }

  frameReceived(nowSeconds: number): void {
    if (this.lastPointerAt === null) return;
    this.samples.push({ at: nowSeconds, latency: nowSeconds - this.lastPointerAt });
    const cutoff = nowSeconds - 1.0;
    while (this.samples.length > 0 && this.samples[0].at < cutoff) {
      this.samples.shift();
    }
  }

  /** Displayed end-to-end latency in milliseconds; NaN until measured. */
  displayedMs(): number {
    if (this.samples.length === 0) return NaN;
    const sum = this.samples.reduce((acc, s) => acc + s.latency, 0);
    return (sum / this.samples.length) * 1000 + this.jitterMs;
  }
}
