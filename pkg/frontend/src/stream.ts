import type { StreamMessage } from "./types.js";

export interface StreamHandlers {
  onMessage(msg: StreamMessage): void;
  onStateChange?(state: "open" | "closed" | "reconnecting"): void;
}

type SocketFactory = (url: string) => WebSocket;

/** WebSocket stream consumer with exponential-backoff reconnect. After a
 * drop the server sends a fresh full snapshot on reconnect, so consumers
 * resync automatically; tick-keyed series dedupe any overlap. Message
 * handling stays synchronous and cheap so the UI thread never blocks at
 * the stream's 10 messages/second ceiling. */
export class StreamClient {
  private socket: WebSocket | null = null;
  private attempts = 0;
  private closed = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly url: string,
    private readonly handlers: StreamHandlers,
    private readonly makeSocket: SocketFactory = (u) => new WebSocket(u),
  ) {}

  connect(): void {
    this.closed = false;
    this.open();
  }

  private open(): void {
    const sock = this.makeSocket(this.url);
    this.socket = sock;
    sock.onopen = () => {
      this.attempts = 0;
      this.handlers.onStateChange?.("open");
    };
    sock.onmessage = (ev: MessageEvent) => {
      let parsed: StreamMessage;
      try {
        parsed = JSON.parse(String(ev.data)) as StreamMessage;
      } catch {
        return; // garbage frame: ignore
      }
      this.handlers.onMessage(parsed);
      if (parsed.type === "end") this.close();
    };
    sock.onclose = () => {
      this.socket = null;
      if (this.closed) return;
      this.handlers.onStateChange?.("reconnecting");
      this.scheduleReconnect();
    };
    sock.onerror = () => {
      try {
        sock.close();
      } catch {
        // already closing
      }
    };
  }

  private scheduleReconnect(): void {
    const backoffMs = Math.min(500 * 2 ** this.attempts, 15_000);
    this.attempts += 1;
    this.timer = setTimeout(() => this.open(), backoffMs);
  }

  close(): void {
    this.closed = true;
    if (this.timer) clearTimeout(this.timer);
    this.socket?.close();
    this.socket = null;
    this.handlers.onStateChange?.("closed");
  }
}
