/**
 * Wire protocol shared with the sonification service.
 *
 * Control messages are JSON text both ways. Audio arrives as binary
 * frames: a 16-byte little-endian header (magic u32, version u16,
 * flags u16, sequence u32, reserved u32) followed by 480 interleaved
 * stereo float32 samples (3840 bytes, 3856 total).
 */

export const FRAME_MAGIC = 0x534f4e47;
export const FRAME_VERSION = 1;
export const FRAME_HEADER_BYTES = 16;
export const SAMPLES_PER_BLOCK = 480;
export const CHANNELS = 2;
export const FRAME_PAYLOAD_BYTES = SAMPLES_PER_BLOCK * CHANNELS * 4;
export const FRAME_BYTES = FRAME_HEADER_BYTES + FRAME_PAYLOAD_BYTES;
export const SAMPLE_RATE = 48000;
export const BLOCK_SECONDS = SAMPLES_PER_BLOCK / SAMPLE_RATE;

export interface OpenMessage {
  type: "open";
  corpus: string;
  dpi: number;
  seed?: number;
}

export interface PointerMessage {
  type: "pointer";
  t: number;
  x: number;
  y: number;
}

export interface CloseMessage {
  type: "close";
}

export type ClientMessage = OpenMessage | PointerMessage | CloseMessage;

export interface OpenedMessage {
  type: "opened";
  session: string;
  sample_rate: number;
  block: number;
  format: string;
}

export interface ServerErrorMessage {
  type: "error";
  code: string;
  message: string;
}

export type ServerMessage = OpenedMessage | ServerErrorMessage;

export interface AudioFrame {
  sequence: number;
  left: Float32Array;
  right: Float32Array;
}

export function encodeOpen(corpus: string, dpi: number, seed?: number): string {
  const msg: OpenMessage = { type: "open", corpus, dpi };
  if (seed !== undefined) msg.seed = seed;
  return JSON.stringify(msg);
}

export function encodePointer(t: number, x: number, y: number): string {
  const msg: PointerMessage = { type: "pointer", t, x, y };
  return JSON.stringify(msg);
}

export function encodeClose(): string {
  const msg: CloseMessage = { type: "close" };
  return JSON.stringify(msg);
}

export function parseServerMessage(text: string): ServerMessage {
  const parsed = JSON.parse(text) as Record<string, unknown>;
  if (parsed.type === "opened") {
    if (
      typeof parsed.session !== "string" ||
      typeof parsed.sample_rate !== "number" ||
      typeof parsed.block !== "number" ||
      typeof parsed.format !== "string"
    ) {
      throw new Error("malformed opened message");
    }
    return parsed as unknown as OpenedMessage;
  }
  if (parsed.type === "error") {
    if (typeof parsed.code !== "string" || typeof parsed.message !== "string") {
      throw new Error("malformed error message");
    }
    return parsed as unknown as ServerErrorMessage;
  }
  throw new Error(`unknown server message type ${String(parsed.type)}`);
}

export function decodeFrame(data: ArrayBuffer): AudioFrame {
  if (data.byteLength !== FRAME_BYTES) {
    throw new Error(`frame must be ${FRAME_BYTES} bytes, got ${data.byteLength}`);
  }
  const view = new DataView(data);
  const magic = view.getUint32(0, true);
  if (magic !== FRAME_MAGIC) {
    throw new Error(`bad frame magic 0x${magic.toString(16)}`);
  }
  const version = view.getUint16(4, true);
  if (version !== FRAME_VERSION) {
    throw new Error(`unsupported frame version ${version}`);
  }
  const sequence = view.getUint32(8, true);
  const interleaved = new Float32Array(data, FRAME_HEADER_BYTES, SAMPLES_PER_BLOCK * CHANNELS);
  const left = new Float32Array(SAMPLES_PER_BLOCK);
  const right = new Float32Array(SAMPLES_PER_BLOCK);
  for (let i = 0; i < SAMPLES_PER_BLOCK; i++) {
    left[i] = interleaved[2 * i];
    right[i] = interleaved[2 * i + 1];
  }
  return { sequence, left, right };
}

export function encodeFrame(frame: AudioFrame): ArrayBuffer {
  const buffer = new ArrayBuffer(FRAME_BYTES);
  const view = new DataView(buffer);
  view.setUint32(0, FRAME_MAGIC, true);
  view.setUint16(4, FRAME_VERSION, true);
  view.setUint16(6, 0, true);
  view.setUint32(8, frame.sequence >>> 0, true);
  view.setUint32(12, 0, true);
  const interleaved = new Float32Array(buffer, FRAME_HEADER_BYTES, SAMPLES_PER_BLOCK * CHANNELS);
  for (let i = 0; i < SAMPLES_PER_BLOCK; i++) {
    interleaved[2 * i] = frame.left[i];
    interleaved[2 * i + 1] = frame.right[i];
  }
  return buffer;
}

export function silentFrame(sequence: number): AudioFrame {
  return {
    sequence,
    left: new Float32Array(SAMPLES_PER_BLOCK),
    right: new Float32Array(SAMPLES_PER_BLOCK),
  };
}
