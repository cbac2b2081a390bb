// TeleopSession behavior against a scripted WebSocket: status transitions,
// the 40 Hz send loop, and per-session sequence numbering.

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { SEND_PERIOD_MS, TeleopSession } from "../src/client.js";

class FakeWebSocket {
  static instances: FakeWebSocket[] = [];
  static failNext = false;
  static OPEN = 1;
  static CLOSED = 3;

  url: string;
  readyState = 0;
  sent: string[] = [];
  onopen: (() => void) | null = null;
  onmessage: ((event: { data: string }) => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: (() => void) | null = null;

  constructor(url: string) {
    this.url = url;
    FakeWebSocket.instances.push(this);
    queueMicrotask(() => {
      if (FakeWebSocket.failNext) {
        FakeWebSocket.failNext = false;
        this.readyState = FakeWebSocket.CLOSED;
        this.onerror?.();
        this.onclose?.();
      } else {
        this.readyState = FakeWebSocket.OPEN;
        this.onopen?.();
      }
    });
  }

  send(text: string): void {
    if (this.readyState !== FakeWebSocket.OPEN) {
      throw new Error("send on closed socket");
    }
    this.sent.push(text);
  }

  close(): void {
    this.readyState = FakeWebSocket.CLOSED;
    this.onclose?.();
  }

  serverCloses(): void {
    this.readyState = FakeWebSocket.CLOSED;
    this.onclose?.();
  }
}

function flushMicrotasks(): Promise<void> {
  return new Promise((resolve) => {
    const immediate = setTimeout(resolve, 0);
    vi.advanceTimersByTime(0);
    clearTimeout(immediate);
    resolve();
  });
}

describe("teleop session", () => {
  const statuses: string[] = [];
  let session: TeleopSession;

  beforeEach(() => {
    vi.useFakeTimers();
    vi.stubGlobal("WebSocket", FakeWebSocket);
    vi.stubGlobal("performance", { now: () => Date.now() });
    FakeWebSocket.instances = [];
    FakeWebSocket.failNext = false;
    statuses.length = 0;
    session = new TeleopSession(
      "ws://test/ws",
      () => new Array(12).fill(1),
      {
        onReply: () => {},
        onError: () => {},
        onStatus: (status) => statuses.push(status),
      },
    );
  });

  afterEach(() => {
    session.disconnect();
    vi.unstubAllGlobals();
    vi.useRealTimers();
  });

  it("streams at the send period once connected", async () => {
    session.connect();
    await flushMicrotasks();
    vi.advanceTimersByTime(SEND_PERIOD_MS * 10);
    const socket = FakeWebSocket.instances[0];
    expect(statuses).toContain("connected");
    expect(socket.sent).toHaveLength(10);
    const first = JSON.parse(socket.sent[0]);
    expect(first.seq).toBe(1);
    expect(first.q_deg).toHaveLength(12);
  });

  it("failed connection shows disconnected and sends nothing", async () => {
    FakeWebSocket.failNext = true;
    session.connect();
    await flushMicrotasks();
    vi.advanceTimersByTime(SEND_PERIOD_MS * 5);
    expect(statuses[statuses.length - 1]).toBe("disconnected");
    expect(FakeWebSocket.instances[0].sent).toHaveLength(0);
  });

  it("sequence numbering restarts after a reconnect", async () => {
    session.connect();
    await flushMicrotasks();
    vi.advanceTimersByTime(SEND_PERIOD_MS * 4);
    expect(session.sequence).toBe(4);

    FakeWebSocket.instances[0].serverCloses();
    session.connect();
    await flushMicrotasks();
    vi.advanceTimersByTime(SEND_PERIOD_MS * 2);
    const second = FakeWebSocket.instances[1];
    expect(JSON.parse(second.sent[0]).seq).toBe(1);
    expect(session.sequence).toBe(2);
  });

  it("send loop stops once the server closes the session", async () => {
    session.connect();
    await flushMicrotasks();
    vi.advanceTimersByTime(SEND_PERIOD_MS * 2);
    const socket = FakeWebSocket.instances[0];
    socket.serverCloses();
    vi.advanceTimersByTime(SEND_PERIOD_MS * 6);
    expect(socket.sent).toHaveLength(2);
    expect(statuses[statuses.length - 1]).toBe("disconnected");
  });
});
