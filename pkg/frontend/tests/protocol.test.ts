/** Protocol conformance against the service's golden byte fixtures. */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import {
  FRAME_BYTES,
  decodeFrame,
  encodeClose,
  encodeFrame,
  encodeOpen,
  encodePointer,
  parseServerMessage,
} from "../src/protocol.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

function loadFrames(): ArrayBuffer[] {
  const raw = readFileSync(join(FIXTURES, "frames.bin"));
  const frames: ArrayBuffer[] = [];
  for (let offset = 0; offset < raw.length; offset += FRAME_BYTES) {
    frames.push(raw.buffer.slice(raw.byteOffset + offset, raw.byteOffset + offset + FRAME_BYTES));
  }
  return frames;
}

describe("frame decoding against golden bytes", () => {
  const goldenFrames = loadFrames();
  const expected = JSON.parse(readFileSync(join(FIXTURES, "frames.json"), "utf-8"));

  it("decodes every golden frame to the expected samples", () => {
    expect(goldenFrames.length).toBe(expected.length);
    for (let i = 0; i < goldenFrames.length; i++) {
      const frame = decodeFrame(goldenFrames[i]);
      expect(frame.sequence).toBe(expected[i].sequence);
      expect(Array.from(frame.left.slice(0, 8))).toEqual(expected[i].left_head);
      expect(Array.from(frame.right.slice(0, 8))).toEqual(expected[i].right_head);
      const rms = (xs: Float32Array) =>
        Math.sqrt(xs.reduce((acc, v) => acc + v * v, 0) / xs.length);
      expect(rms(frame.left)).toBeCloseTo(expected[i].left_rms, 9);
      expect(rms(frame.right)).toBeCloseTo(expected[i].right_rms, 9);
    }
  });

  it("re-encodes decoded frames byte-identically", () => {
    for (const golden of goldenFrames) {
      const encoded = encodeFrame(decodeFrame(golden));
      expect(new Uint8Array(encoded)).toEqual(new Uint8Array(golden));
    }
  });

  it("rejects corrupted frames", () => {
    expect(() => decodeFrame(new ArrayBuffer(12))).toThrow(/bytes/);
    const bad = new Uint8Array(goldenFrames[0].slice(0));
    bad[0] ^= 0xff;
    expect(() => decodeFrame(bad.buffer)).toThrow(/magic/);
  });
});

describe("control messages against golden JSON", () => {
  const control = JSON.parse(readFileSync(join(FIXTURES, "control.json"), "utf-8"));

  it("parses the service's replies", () => {
    const opened = parseServerMessage(control.server_messages[0]);
    expect(opened.type).toBe("opened");
    if (opened.type === "opened") {
      expect(opened.session).toBe("a1b2c3d4e5f60708");
      expect(opened.sample_rate).toBe(48000);
      expect(opened.block).toBe(480);
      expect(opened.format).toBe("f32le");
    }
    const error = parseServerMessage(control.server_messages[1]);
    expect(error.type).toBe("error");
    if (error.type === "error") {
      expect(error.code).toBe("unknown_corpus");
      expect(error.message).toContain("nope");
    }
  });

  it("encodes client messages matching the golden shapes", () => {
    expect(JSON.parse(encodeOpen("leather-1", 96.0, 7))).toEqual(control.client_messages.open);
    expect(JSON.parse(encodeOpen("leather-1", 132.5))).toEqual(
      control.client_messages.open_no_seed,
    );
    expect(JSON.parse(encodePointer(1.25, 310.5, 192.0))).toEqual(
      control.client_messages.pointer,
    );
    expect(JSON.parse(encodeClose())).toEqual(control.client_messages.close);
  });

  it("rejects unknown server messages", () => {
    expect(() => parseServerMessage('{"type":"mystery"}')).toThrow(/unknown/);
    expect(() => parseServerMessage('{"type":"opened"}')).toThrow(/malformed/);
  });
});
