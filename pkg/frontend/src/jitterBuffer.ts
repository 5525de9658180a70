/**
 * Sequence-ordered frame queue with a small prefill.
 *
 * Playback must not start until a few frames are buffered (absorbing
 * network jitter), frames must come out strictly in sequence order, and
 * a missing sequence number is replaced by one block of silence rather
 * than stalling the stream.
 */

import { AudioFrame, silentFrame } from "./protocol.js";

export class JitterBuffer {
  private frames = new Map<number, AudioFrame>();
  private nextSeq: number | null = null;
  private prefill: number;
  private running = false;

  /** Frames substituted with silence because their sequence never arrived. */
  gaps = 0;
  /** Frames that arrived after their slot had already been played. */
  late = 0;

  constructor(prefillFrames = 3) {
    this.prefill = Math.max(1, prefillFrames);
  }

  get depth(): number {
    return this.frames.size;
  }

  get started(): boolean {
    return this.running;
  }

  push(frame: AudioFrame): void {
    if (this.nextSeq === null) {
      this.nextSeq = frame.sequence;
    }
    if (frame.sequence < this.nextSeq) {
      this.late += 1;
      return;
    }
    this.frames.set(frame.sequence, frame);
    if (!this.running && this.frames.size >= this.prefill) {
      this.running = true;
    }
  }

  /** Next in-order frame, silence for a detected gap, or null if idle. */
  next(): AudioFrame | null {
    if (!this.running || this.nextSeq === null || this.frames.size === 0) {
      return null;
    }
    const frame = this.frames.get(this.nextSeq);
    if (frame !== undefined) {
      this.frames.delete(this.nextSeq);
      this.nextSeq += 1;
      return frame;
    }
    // a later frame exists, so this sequence number is genuinely missing
    this.gaps += 1;
    return silentFrame(this.nextSeq++);
  }
}
