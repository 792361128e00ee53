/**
 * Headless session client: all dialogue-facing state for the live interview
 * view, with no DOM dependency so the logic is testable anywhere.
 *
 * Everything rendered derives from server wire events; the client adds no
 * dialogue logic of its own. Events are appended strictly in arrival order
 * and gap-checked against the contiguous server seq; on a detected gap the
 * client resynchronizes by reconnecting with `after_seq`.
 */

import {
  countWords,
  InboundMessage,
  isServerEvent,
  OutboundMessage,
  ServerEvent,
  SystemUtteranceEvent,
} from "./protocol.js";

/** Minimal WebSocket surface so tests can substitute a fake. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onmessage: ((event: { data: string }) => void) | null;
  onopen: (() => void) | null;
  onclose: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export type ConnectionState = "idle" | "connecting" | "open" | "closed";

export interface BackchannelCue {
  token: string;
  nod: { frequency: number; speed: string } | null;
  at: number;
}

/** Reveal speed for the speaking-pace animation, in ms per word. */
export function revealMsPerWord(rateFactor: number, baseWpm = 150): number {
  const effective = baseWpm * Math.max(rateFactor, 0.1);
  return 60000 / effective;
}

export interface SessionClientOptions {
  baseUrl: string; // e.g. http://localhost:8077
  sessionId: string;
  socketFactory?: SocketFactory;
  now?: () => number; // ms clock, injectable for tests
}

export class SessionClient {
  readonly sessionId: string;

  connection: ConnectionState = "idle";
  /** Every server event, in arrival order; the reconciliation source. */
  events: ServerEvent[] = [];
  currentQuestion: string | null = null;
  lastUtterance: SystemUtteranceEvent | null = null;
  rateFactor = 1.0;
  backchannelOverlay: BackchannelCue | null = null;
  gesture: string | null = null;
  completed = false;
  summaryPointer: string | null = null;
  orderingViolations = 0;
  errors: string[] = [];

  private readonly baseUrl: string;
  private readonly makeSocket: SocketFactory;
  private readonly now: () => number;
  private socket: SocketLike | null = null;
  private lastSeq = 0;
  private composingSince: number | null = null;

  constructor(options: SessionClientOptions) {
    this.baseUrl = options.baseUrl.replace(/\/$/, "");
    this.sessionId = options.sessionId;
    this.makeSocket =
      options.socketFactory ?? ((url: string) => new WebSocket(url) as unknown as SocketLike);
    this.now = options.now ?? (() => Date.now());
  }

  get fluency(): "standard" | "slow" {
    return this.rateFactor < 1.0 ? "slow" : "standard";
  }

  get revealMsPerWord(): number {
    return revealMsPerWord(this.rateFactor);
  }

  streamUrl(afterSeq: number): string {
    const ws = this.baseUrl.replace(/^http/, "ws");
    return `${ws}/sessions/${this.sessionId}/stream?after_seq=${afterSeq}`;
  }

  connect(): void {
    this.connection = "connecting";
    this.socket = this.makeSocket(this.streamUrl(this.lastSeq));
    this.socket.onopen = () => {
      this.connection = "open";
    };
    this.socket.onclose = () => {
      this.connection = "closed";
    };
    this.socket.onmessage = (event) => this.handleRaw(event.data);
  }

  disconnect(): void {
    this.socket?.close();
    this.socket = null;
    this.connection = "closed";
  }

  /** Reconnect and resume from the last delivered seq (gap-free by contract). */
  reconnect(): void {
    this.disconnect();
    this.connect();
  }

  handleRaw(data: string): void {
    let message: InboundMessage;
    try {
      message = JSON.parse(data) as InboundMessage;
    } catch {
      this.errors.push("malformed server message");
      return;
    }
    this.handleMessage(message);
  }

  handleMessage(message: InboundMessage): void {
    if (message.type === "heartbeat") {
      return;
    }
    if (message.type === "error") {
      this.errors.push(String((message as { error?: unknown }).error ?? "unknown"));
      return;
    }
    if (!isServerEvent(message)) {
      this.errors.push(`unexpected message type ${message.type}`);
      return;
    }
    if (message.seq <= this.lastSeq) {
      return; // duplicate delivery after resume; never re-render
    }
    if (message.seq !== this.lastSeq + 1) {
      // a gap means lost events: count it and resynchronize from lastSeq
      this.orderingViolations += 1;
      this.reconnect();
      return;
    }
    this.lastSeq = message.seq;
    this.events.push(message);
    this.apply(message);
  }

  private apply(event: ServerEvent): void {
    switch (event.type) {
      case "system_utterance": {
        const utterance = event as SystemUtteranceEvent;
        this.lastUtterance = utterance;
        this.rateFactor = utterance.rate_factor;
        this.currentQuestion = utterance.text;
        this.backchannelOverlay = null;
        this.composingSince = null; // a new prompt restarts composition timing
        break;
      }
      case "backchannel": {
        this.backchannelOverlay = {
          token: String(event.token),
          nod: (event.nod as BackchannelCue["nod"]) ?? null,
          at: event.t,
        };
        break;
      }
      case "gesture": {
        this.gesture = String(event.tag);
        break;
      }
      case "interview_complete": {
        this.completed = true;
        this.summaryPointer = String(event.summary ?? "");
        this.currentQuestion = null;
        break;
      }
      case "state_change":
        break;
    }
  }

  /** First keystroke of an answer starts the duration measurement. */
  onKeystroke(): void {
    if (this.composingSince === null) {
      this.composingSince = this.now();
    }
  }

  submitAnswer(text: string): { ok: boolean; reason?: string } {
    if (!text.trim()) {
      return { ok: false, reason: "empty answer" }; // blocked client-side
    }
    if (this.completed) {
      return { ok: false, reason: "interview already complete" };
    }
    if (this.connection !== "open" || this.socket === null) {
      return { ok: false, reason: "not connected" };
    }
    const startedAt = this.composingSince ?? this.now();
    const durationS = Math.max((this.now() - startedAt) / 1000, 0.001);
    const message: OutboundMessage = {
      type: "user_text",
      text,
      duration_s: durationS,
      word_count: countWords(text),
    };
    this.socket.send(JSON.stringify(message));
    this.composingSince = null;
    return { ok: true };
  }

  /**
   * Compare the locally displayed stream against the stored transcript's
   * server events; returns a list of mismatch descriptions (empty = equal).
   */
  reconcile(transcript: { events: Array<{ seq: number; kind: string; payload: Record<string, unknown> }> }): string[] {
    const serverKinds = new Set(["system_utterance", "backchannel", "gesture", "state_change"]);
    const stored = transcript.events.filter((e) => serverKinds.has(e.kind));
    const problems: string[] = [];
    if (stored.length !== this.events.length) {
      problems.push(`event count: client ${this.events.length}, transcript ${stored.length}`);
    }
    const n = Math.min(stored.length, this.events.length);
    for (let i = 0; i < n; i++) {
      const mine = this.events[i];
      const theirs = stored[i];
      if (mine.transcript_seq !== theirs.seq) {
        problems.push(`event ${i}: transcript_seq ${mine.transcript_seq} != stored seq ${theirs.seq}`);
        continue;
      }
      const myKind = mine.type === "interview_complete" ? "state_change" : mine.type;
      if (myKind !== theirs.kind) {
        problems.push(`event ${i}: type ${myKind} != kind ${theirs.kind}`);
        continue;
      }
      const payload: Record<string, unknown> = {};
      for (const [key, value] of Object.entries(mine)) {
        if (!["type", "seq", "transcript_seq", "t"].includes(key)) {
          payload[key] = value;
        }
      }
      if (JSON.stringify(sortKeys(payload)) !== JSON.stringify(sortKeys(theirs.payload))) {
        problems.push(`event ${i}: payload mismatch`);
      }
    }
    return problems;
  }
}

function sortKeys(value: unknown): unknown {
  if (Array.isArray(value)) {
    return value.map(sortKeys);
  }
  if (value !== null && typeof value === "object") {
    const out: Record<string, unknown> = {};
    for (const key of Object.keys(value as Record<string, unknown>).sort()) {
      out[key] = sortKeys((value as Record<string, unknown>)[key]);
    }
    return out;
  }
  return value;
}

/** POST /sessions and return the new session's id. */
export async function createSession(
  baseUrl: string,
  scriptId = "default",
  fetchFn: typeof fetch = fetch,
): Promise<string> {
  const response = await fetchFn(`${baseUrl.replace(/\/$/, "")}/sessions`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({ script_id: scriptId }),
  });
  if (response.status !== 201) {
    throw new Error(`create session failed: HTTP ${response.status}`);
  }
  const body = (await response.json()) as { session_id: string };
  return body.session_id;
}

/** GET the stored transcript document for reconciliation. */
export async function fetchTranscript(
  baseUrl: string,
  sessionId: string,
  fetchFn: typeof fetch = fetch,
): Promise<{ events: Array<{ seq: number; kind: string; payload: Record<string, unknown> }> }> {
  const response = await fetchFn(`${baseUrl.replace(/\/$/, "")}/sessions/${sessionId}/transcript`);
  if (response.status !== 200) {
    throw new Error(`transcript fetch failed: HTTP ${response.status}`);
  }
  return (await response.json()) as {
    events: Array<{ seq: number; kind: string; payload: Record<string, unknown> }>;
  };
}
