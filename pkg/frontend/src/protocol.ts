/**
 * Wire protocol of the interviewkit session service.
 *
 * One JSON object per WebSocket message. Server events carry a contiguous
 * per-session `seq` plus the `transcript_seq` the same event holds in the
 * stored transcript; `heartbeat` and `error` are protocol-level messages
 * without sequence numbers.
 */

export type ServerEventType =
  | "system_utterance"
  | "backchannel"
  | "gesture"
  | "state_change"
  | "interview_complete";

export interface ServerEvent {
  type: ServerEventType;
  seq: number;
  transcript_seq: number;
  t: number;
  [key: string]: unknown;
}

export interface SystemUtteranceEvent extends ServerEvent {
  type: "system_utterance";
  kind: "ask" | "repeat" | "encourage" | "filler" | "close";
  text: string;
  rate_factor: number;
  topic_id: string | null;
}

export interface BackchannelEvent extends ServerEvent {
  type: "backchannel";
  token: string;
  asset_id: string;
  nod: { frequency: number; speed: "slow" | "fast" } | null;
}

export interface GestureEvent extends ServerEvent {
  type: "gesture";
  tag: string;
}

export interface ProtocolMessage {
  type: "heartbeat" | "error";
  [key: string]: unknown;
}

export type InboundMessage = ServerEvent | ProtocolMessage;

export interface UserTextMessage {
  type: "user_text";
  text: string;
  duration_s: number;
  word_count: number;
}

export interface VoiceActivityMessage {
  type: "voice_activity";
  state: "begin" | "end";
}

export type OutboundMessage = UserTextMessage | VoiceActivityMessage;

export const SERVER_EVENT_TYPES: ReadonlySet<string> = new Set([
  "system_utterance",
  "backchannel",
  "gesture",
  "state_change",
  "interview_complete",
]);

export function isServerEvent(message: InboundMessage): message is ServerEvent {
  return SERVER_EVENT_TYPES.has(message.type) && typeof (message as ServerEvent).seq === "number";
}

/** Count words the same way a human would eyeball it: non-empty runs. */
export function countWords(text: string): number {
  const matches = text.toLowerCase().match(/[a-z0-9]+(?:['-][a-z0-9]+)*/g);
  return matches ? matches.length : 0;
}
