/**
 * Browser wiring: a text-first interview surface over SessionClient.
 *
 * The question text reveals word by word at the server-provided speaking
 * pace (slower when the session switched to low-proficiency mode), answers
 * are composed in a textarea whose first keystroke starts the duration
 * measurement, and backchannel cues appear as transient overlays while
 * typing. At interview completion the displayed stream is reconciled
 * against GET /sessions/{id}/transcript and the result shown.
 */

import { SessionClient, createSession, fetchTranscript } from "./session.js";
import { SystemUtteranceEvent } from "./protocol.js";

const OVERLAY_MS = 1800;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export async function startApp(baseUrl: string): Promise<void> {
  const questionEl = el<HTMLDivElement>("question");
  const answerEl = el<HTMLTextAreaElement>("answer");
  const sendEl = el<HTMLButtonElement>("send");
  const overlayEl = el<HTMLDivElement>("overlay");
  const fluencyEl = el<HTMLSpanElement>("fluency");
  const statusEl = el<HTMLSpanElement>("status");
  const logEl = el<HTMLUListElement>("log");
  const summaryEl = el<HTMLDivElement>("summary");

  const sessionId = await createSession(baseUrl);
  const client = new SessionClient({ baseUrl, sessionId });

  let revealTimer: number | undefined;
  let overlayTimer: number | undefined;

  function revealQuestion(utterance: SystemUtteranceEvent): void {
    window.clearInterval(revealTimer);
    const words = utterance.text.split(/\s+/);
    let shown = 0;
    questionEl.textContent = "";
    revealTimer = window.setInterval(() => {
      shown += 1;
      questionEl.textContent = words.slice(0, shown).join(" ");
      if (shown >= words.length) window.clearInterval(revealTimer);
    }, client.revealMsPerWord);
  }

  function render(): void {
    statusEl.textContent = client.connection;
    fluencyEl.textContent = client.fluency === "slow" ? "adapted pace" : "standard pace";
    if (client.completed) {
      summaryEl.hidden = false;
      answerEl.disabled = true;
      sendEl.disabled = true;
    }
  }

  // poll-free: hook message handling by wrapping handleMessage
  const originalHandle = client.handleMessage.bind(client);
  client.handleMessage = (message) => {
    const before = client.events.length;
    originalHandle(message);
    for (const event of client.events.slice(before)) {
      if (event.type === "system_utterance") {
        const utterance = event as SystemUtteranceEvent;
        revealQuestion(utterance);
        const item = document.createElement("li");
        item.textContent = `ROBOT: ${utterance.text}`;
        logEl.appendChild(item);
      } else if (event.type === "backchannel") {
        const nod = client.backchannelOverlay?.nod;
        overlayEl.textContent = nod
          ? `${String(event.token)}  (nod x${nod.frequency} ${nod.speed})`
          : String(event.token);
        overlayEl.hidden = false;
        window.clearTimeout(overlayTimer);
        overlayTimer = window.setTimeout(() => {
          overlayEl.hidden = true;
        }, OVERLAY_MS);
      } else if (event.type === "interview_complete") {
        void showSummary();
      }
    }
    render();
  };

  async function showSummary(): Promise<void> {
    const transcript = await fetchTranscript(baseUrl, sessionId);
    const problems = client.reconcile(transcript);
    summaryEl.textContent = problems.length
      ? `transcript mismatch: ${problems.join("; ")}`
      : `interview complete: ${client.events.length} events, transcript verified`;
    summaryEl.hidden = false;
  }

  answerEl.addEventListener("input", () => client.onKeystroke());
  sendEl.addEventListener("click", () => {
    const result = client.submitAnswer(answerEl.value);
    if (result.ok) {
      const item = document.createElement("li");
      item.textContent = `YOU: ${answerEl.value}`;
      logEl.appendChild(item);
      answerEl.value = "";
    } else {
      overlayEl.textContent = result.reason ?? "cannot send";
      overlayEl.hidden = false;
    }
  });

  client.connect();
  render();
}
