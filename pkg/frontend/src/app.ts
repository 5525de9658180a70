/**
 * Single-page client: pick a material, rub its photo, hear it live.
 *
 * The page lists the corpora the service hosts, opens a session over
 * the WebSocket channel when a tile is selected, streams raw pointer
 * events to the server (all velocity processing is server-side), and
 * plays the returned audio frames through a jitter-buffered WebAudio
 * scheduler. A meter shows measured latency and the underrun count.
 */

import { AudioContextSink } from "./audioContextSink.js";
import { attachPointerCapture } from "./pointer.js";
import { LatencyMeter, StreamPlayer } from "./player.js";
import { SessionChannel } from "./transport.js";

interface CorpusEntry {
  id: string;
  fragments: number;
  duration_s: number;
}

const serviceUrl = (() => {
  const params = new URLSearchParams(window.location.search);
  return params.get("service") ?? `${window.location.protocol}//${window.location.host}`;
})();

function wsUrl(): string {
  return serviceUrl.replace(/^http/, "ws") + "/session";
}

let channel: SessionChannel | null = null;
let detachPointer: (() => void) | null = null;

async function loadMaterials(): Promise<void> {
  const grid = document.getElementById("materials")!;
  const banner = document.getElementById("banner")!;
  let entries: CorpusEntry[];
  try {
    const response = await fetch(`${serviceUrl}/corpora`);
    entries = await response.json();
  } catch {
    banner.textContent = `service unreachable at ${serviceUrl}`;
    return;
  }
  grid.innerHTML = "";
  if (entries.length === 0) {
    banner.textContent = "no materials available";
    return;
  }
  banner.textContent = "pick a material, then rub it";
  for (const entry of entries) {
    const tile = document.createElement("div");
    tile.className = "tile";
    const img = document.createElement("img");
    img.src = `${serviceUrl}/materials/${entry.id}/image`;
    img.alt = entry.id;
    img.onerror = () => {
      img.remove();
      tile.textContent = entry.id;
    };
    const label = document.createElement("span");
    label.textContent = `${entry.id} (${entry.duration_s.toFixed(0)} s)`;
    tile.append(img, label);
    tile.addEventListener("click", () => openSession(entry.id));
    grid.append(tile);
  }
}

async function openSession(corpusId: string): Promise<void> {
  closeSession();
  const sink = new AudioContextSink();
  await sink.resume(); // we are inside a click gesture
  const player = new StreamPlayer(sink, 3);
  const meter = new LatencyMeter(player.jitterDelayMs);
  const surface = document.getElementById("surface") as HTMLElement;
  const status = document.getElementById("status")!;

  const socket = new WebSocket(wsUrl());
  channel = new SessionChannel(socket, {
    onReady: () => channel!.open(corpusId, window.devicePixelRatio * 96),
    onOpened: (msg) => {
      status.textContent = `session ${msg.session} on ${corpusId}`;
      detachPointer = attachPointerCapture(surface, (t, x, y) => {
        meter.pointerSent(performance.now() / 1000);
        channel!.pointer(t, x, y);
      });
    },
    onServerError: (msg) => {
      status.textContent = `error ${msg.code}: ${msg.message}`;
    },
    onFrame: (bytes) => {
      meter.frameReceived(performance.now() / 1000);
      player.pushFrameBytes(bytes);
    },
    onClose: () => {
      status.textContent = "session closed";
    },
  });

  const surfaceImg = document.getElementById("surface-img") as HTMLImageElement;
  surfaceImg.src = `${serviceUrl}/materials/${corpusId}/image`;

  const updateMeter = () => {
    const stats = player.stats;
    const latency = meter.displayedMs();
    document.getElementById("meter")!.textContent =
      `latency ${Number.isNaN(latency) ? "--" : latency.toFixed(0)} ms | ` +
      `underruns ${stats.underruns} | gaps ${stats.gaps} | frames ${stats.played}`;
  };
  window.setInterval(updateMeter, 250);
}

function closeSession(): void {
  detachPointer?.();
  detachPointer = null;
  try {
    channel?.close();
  } catch {
    // socket may already be gone
  }
  channel = null;
}

window.addEventListener("beforeunload", closeSession);
loadMaterials();
