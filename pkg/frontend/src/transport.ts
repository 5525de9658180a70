/**
 * Session channel over a WebSocket-like object.
 *
 * The socket is injected so the same channel runs in the browser and in
 * node test harnesses. Text messages are parsed control replies; binary
 * messages are raw audio frames handed to the caller undecoded.
 */

import {
  OpenedMessage,
  ServerErrorMessage,
  encodeClose,
  encodeOpen,
  encodePointer,
  parseServerMessage,
} from "./protocol.js";

export interface SocketLike {
  binaryType: string;
  send(data: string): void;
  close(): void;
  addEventListener(type: string, listener: (event: any) => void): void;
}

export interface ChannelCallbacks {
  onReady?: () => void;
  onOpened?: (msg: OpenedMessage) => void;
  onServerError?: (msg: ServerErrorMessage) => void;
  onFrame?: (data: ArrayBuffer) => void;
  onClose?: () => void;
}

function toArrayBuffer(data: unknown): ArrayBuffer | null {
  if (data instanceof ArrayBuffer) return data;
  // node Buffer / typed array views
  if (ArrayBuffer.isView(data)) {
    const view = data as ArrayBufferView;
    return view.buffer.slice(view.byteOffset, view.byteOffset + view.byteLength) as ArrayBuffer;
  }
  return null;
}

export class SessionChannel {
  private socket: SocketLike;

  constructor(socket: SocketLike, callbacks: ChannelCallbacks) {
    this.socket = socket;
    socket.binaryType = "arraybuffer";
    socket.addEventListener("open", () => callbacks.onReady?.());
    socket.addEventListener("close", () => callbacks.onClose?.());
    socket.addEventListener("message", (event: { data: unknown }) => {
      if (typeof event.data === "string") {
        const msg = parseServerMessage(event.data);
        if (msg.type === "opened") callbacks.onOpened?.(msg);
        else callbacks.onServerError?.(msg);
        return;
      }
      const bytes = toArrayBuffer(event.data);
      if (bytes !== null) callbacks.onFrame?.(bytes);
    });
  }

  open(corpus: string, dpi: number, seed?: number): void {
    this.socket.send(encodeOpen(corpus, dpi, seed));
  }

  pointer(t: number, x: number, y: number): void {
    this.socket.send(encodePointer(t, x, y));
  }

  close(): void {
    this.socket.send(encodeClose());
    this.socket.close();
  }
}
