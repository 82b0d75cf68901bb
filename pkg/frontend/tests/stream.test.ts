import { describe, expect, it, vi } from "vitest";

import { StreamClient } from "../src/stream.js";
import type { StreamMessage } from "../src/types.js";
import { delta, snapshot } from "./helpers.js";

/** Minimal scripted WebSocket double. */
class FakeSocket {
  onopen: (() => void) | null = null;
  onmessage: ((ev: { data: string }) => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: (() => void) | null = null;
  closed = false;

  open(): void {
    this.onopen?.();
  }

  emit(msg: unknown): void {
    this.onmessage?.({ data: JSON.stringify(msg) });
  }

  emitRaw(data: string): void {
    this.onmessage?.({ data });
  }

  close(): void {
    if (this.closed) return;
    this.closed = true;
    this.onclose?.();
  }
}

function makeClient() {
  const sockets: FakeSocket[] = [];
  const messages: StreamMessage[] = [];
  const states: string[] = [];
  const client = new StreamClient(
    "ws://test/stream",
    {
      onMessage: (m) => messages.push(m),
      onStateChange: (s) => states.push(s),
    },
    () => {
      const s = new FakeSocket();
      sockets.push(s);
      return s as unknown as WebSocket;
    },
  );
  return { client, sockets, messages, states };
}

describe("StreamClient", () => {
  it("dispatches parsed snapshot and delta messages", () => {
    const { client, sockets, messages } = makeClient();
    client.connect();
    sockets[0].open();
    sockets[0].emit(snapshot(0));
    sockets[0].emit(delta(1));
    expect(messages.map((m) => m.type)).toEqual(["snapshot", "delta"]);
  });

  it("ignores garbage frames", () => {
    const { client, sockets, messages } = makeClient();
    client.connect();
    sockets[0].open();
    sockets[0].emitRaw("{nope");
    sockets[0].emit(delta(1));
    expect(messages).toHaveLength(1);
  });

  it("reconnects with backoff after an unexpected close", () => {
    vi.useFakeTimers();
    try {
      const { client, sockets, states } = makeClient();
      client.connect();
      sockets[0].open();
      sockets[0].close(); // dropped by the server
      expect(states).toContain("reconnecting");
      expect(sockets).toHaveLength(1);
      vi.advanceTimersByTime(600);
      expect(sockets).toHaveLength(2); // new socket after backoff
      sockets[1].open();
      expect(states[states.length - 1]).toBe("open");
    } finally {
      vi.useRealTimers();
    }
  });

  it("stops reconnecting after an explicit close or end message", () => {
    vi.useFakeTimers();
    try {
      const { client, sockets } = makeClient();
      client.connect();
      sockets[0].open();
      sockets[0].emit({ type: "end", tick: 288 });
      expect(sockets[0].closed).toBe(true);
      vi.advanceTimersByTime(60_000);
      expect(sockets).toHaveLength(1); // no new socket
    } finally {
      vi.useRealTimers();
    }
  });
});
