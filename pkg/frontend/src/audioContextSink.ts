/** WebAudio adapter: schedules stereo blocks on a real AudioContext. */

import { AudioSink } from "./player.js";
import { AudioFrame, SAMPLE_RATE, SAMPLES_PER_BLOCK } from "./protocol.js";

export class AudioContextSink implements AudioSink {
  readonly sampleRate = SAMPLE_RATE;
  private ctx: AudioContext;

  constructor(ctx?: AudioContext) {
    this.ctx = ctx ?? new AudioContext({ sampleRate: SAMPLE_RATE });
  }

  /** Must be called from a user gesture before playback can start. */
  async resume(): Promise<void> {
    if (this.ctx.state !== "running") {
      await this.ctx.resume();
    }
  }

  now(): number {
    return this.ctx.currentTime;
  }

  schedule(frame: AudioFrame, when: number): void {
    const buffer = this.ctx.createBuffer(2, SAMPLES_PER_BLOCK, SAMPLE_RATE);
    buffer.copyToChannel(frame.left, 0);
    buffer.copyToChannel(frame.right, 1);
    const source = this.ctx.createBufferSource();
    source.buffer = buffer;
    source.connect(this.ctx.destination);
    source.start(Math.max(when, this.ctx.currentTime));
  }
}
