/**
 * End-to-end: a full 4-theme interview against the real session service,
 * including one "Pardon?" repair and one timeout-driven encouragement,
 * finishing with an event-for-event transcript reconciliation.
 *
 * Spawns `python3 -m interviewkit.cli serve` with short turn timeouts.
 */

import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { ServerEvent, SystemUtteranceEvent } from "../src/protocol.js";
import { createSession, fetchTranscript, SessionClient, SocketLike } from "../src/session.js";

const PORT = 8907;
const BASE_URL = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;

function wsFactory(url: string): SocketLike {
  const socket = new WebSocket(url);
  const adapter: SocketLike = {
    send: (data) => socket.send(data),
    close: () => socket.close(),
    onmessage: null,
    onopen: null,
    onclose: null,
  };
  socket.on("open", () => adapter.onopen?.());
  socket.on("close", () => adapter.onclose?.());
  socket.on("message", (data) => adapter.onmessage?.({ data: data.toString() }));
  return adapter;
}

async function waitForHealthz(timeoutMs = 20_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE_URL}/healthz`);
      if (response.status === 200) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  throw new Error("service did not become healthy in time");
}

class EventCursor {
  private index = 0;

  constructor(private client: SessionClient) {}

  async next(predicate: (event: ServerEvent) => boolean, timeoutMs = 10_000): Promise<ServerEvent> {
    const deadline = Date.now() + timeoutMs;
    while (Date.now() < deadline) {
      while (this.index < this.client.events.length) {
        const event = this.client.events[this.index];
        this.index += 1;
        if (predicate(event)) return event;
      }
      await new Promise((resolve) => setTimeout(resolve, 20));
    }
    throw new Error(`timed out waiting for event; saw ${JSON.stringify(this.client.events.map((e) => e.type))}`);
  }

  nextUtterance(timeoutMs = 10_000): Promise<SystemUtteranceEvent> {
    return this.next((e) => e.type === "system_utterance", timeoutMs) as Promise<SystemUtteranceEvent>;
  }
}

beforeAll(async () => {
  const dir = mkdtempSync(join(tmpdir(), "ik-e2e-"));
  const config = {
    port: PORT,
    data_dir: join(dir, "data"),
    llm_mode: "mock",
    heartbeat_s: 60,
    idle_expiry_s: 120,
    fluency: { standard_timeout_s: 1.0, low_timeout_s: 2.0 },
  };
  const configPath = join(dir, "service.json");
  writeFileSync(configPath, JSON.stringify(config));
  server = spawn("python3", ["-m", "interviewkit.cli", "serve", "--config", configPath], {
    stdio: ["ignore", "pipe", "pipe"],
  });
  await waitForHealthz();
}, 30_000);

afterAll(() => {
  server?.kill("SIGTERM");
});

describe("full interview over the wire", () => {
  it("completes all four themes with a repair and a timeout-encourage, transcript verified",
    async () => {
      const sessionId = await createSession(BASE_URL);
      const client = new SessionClient({
        baseUrl: BASE_URL,
        sessionId,
        socketFactory: wsFactory,
      });
      client.connect();
      const cursor = new EventCursor(client);

      const answer = (text: string) => {
        client.onKeystroke();
        const result = client.submitAnswer(text);
        expect(result.ok).toBe(true);
      };

      // theme 1: interaction qualities, with a repair in the middle
      const q1 = await cursor.nextUtterance();
      expect(q1.kind).toBe("ask");
      expect(q1.text).toContain("most important thing");
      answer("Pardon?");
      const repeat = await cursor.nextUtterance();
      expect(repeat.kind).toBe("repeat");
      expect(repeat.text).toBe(q1.text); // the same question again
      answer("I value accuracy because wrong answers cost trust.");

      // theme 2: human likeness, answered only after the timeout escalation
      const q2 = await cursor.nextUtterance();
      expect(q2.kind).toBe("ask");
      expect(q2.text).toContain("human-like");
      const nudge = await cursor.next((e) => e.type === "backchannel", 8_000);
      expect(nudge.token).toBeDefined(); // first timeout: a quiet nudge
      const encourage = await cursor.nextUtterance(8_000);
      expect(encourage.kind).toBe("encourage"); // second timeout: spoken support
      answer("Yeah, definitely, I think so.");

      // theme 3: negative traits
      const q3 = await cursor.nextUtterance();
      expect(q3.kind).toBe("ask");
      expect(q3.text).toContain("negative human traits");
      answer("Yes, because small flaws can make it relatable.");

      // theme 4: misuse prevention
      const q4 = await cursor.nextUtterance();
      expect(q4.kind).toBe("ask");
      expect(q4.text).toContain("misuse");
      answer("Clear rules, because misuse is a real risk.");

      // experience question, positive close
      const q5 = await cursor.nextUtterance();
      expect(q5.text).toContain("How did you feel");
      answer("Yeah, it was a really interesting experience because this is my first time.");
      const close = await cursor.nextUtterance();
      expect(close.kind).toBe("close");
      expect(close.text).toContain("glad that you enjoyed");

      await cursor.next((e) => e.type === "interview_complete");
      expect(client.completed).toBe(true);
      expect(client.orderingViolations).toBe(0);

      // the displayed stream matches the stored transcript event-for-event
      const transcript = await fetchTranscript(BASE_URL, sessionId);
      expect(client.reconcile(transcript)).toEqual([]);

      client.disconnect();
    },
    40_000);

  it("reconnect resumes at the last seq without gaps or duplicates", async () => {
    const sessionId = await createSession(BASE_URL);
    const client = new SessionClient({ baseUrl: BASE_URL, sessionId, socketFactory: wsFactory });
    client.connect();
    const cursor = new EventCursor(client);
    await cursor.nextUtterance();
    const seen = client.events.length;
    client.disconnect();
    await new Promise((resolve) => setTimeout(resolve, 100));

    client.reconnect();
    client.onKeystroke();
    // answer quickly so new events arrive on the resumed connection
    const deadline = Date.now() + 5_000;
    while (client.connection !== "open" && Date.now() < deadline) {
      await new Promise((resolve) => setTimeout(resolve, 20));
    }
    client.submitAnswer("I value accuracy because wrong answers cost trust.");
    await cursor.nextUtterance();
    expect(client.events.length).toBeGreaterThan(seen);
    const seqs = client.events.map((e) => e.seq);
    expect(seqs).toEqual(Array.from({ length: seqs.length }, (_, i) => i + 1));
    client.disconnect();
  }, 20_000);
});
