#!/usr/bin/env python3
"""Replay the six exemplar dialogue traces and one full interview.

Prints every system action and backchannel cue, and leaves the transcripts
under ./demo_data/sessions/ so you can point the pipeline at them:

    python3 scripts/demo_interview.py
    interviewkit pipeline run --sessions all --mock --data-dir demo_data
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from interviewkit.dialogue import default_script
from interviewkit.session import TraceTurn, run_trace
from interviewkit.transcript import TranscriptStore

FIXTURES = Path(__file__).resolve().parents[1] / "tests" / "fixtures"
DATA_DIR = Path("demo_data")

FULL_SESSION = [
    "I value accuracy because wrong answers cost trust.",
    "Yeah, not only human-like but also considering the user's preferences.",
    "Yes, because small flaws can make it relatable.",
    "Clear rules, because misuse is a real risk.",
    "Yeah, it was a really interesting experience because this is my first time.",
]


def show(events) -> None:
    for event in events:
        if event.type == "system_utterance":
            print(f"  ROBOT: {event.payload['text']}")
        elif event.type == "backchannel":
            print(f"  [{event.payload['token']}]")
        elif event.type == "gesture":
            print(f"  ({event.payload['tag']})")


def main() -> int:
    script = default_script()
    store = TranscriptStore(DATA_DIR / "sessions")

    for fixture in sorted(FIXTURES.glob("dialogue*.json")):
        doc = json.loads(fixture.read_text(encoding="utf-8"))
        turns = [TraceTurn(t["text"], float(t["duration_s"])) for t in doc["turns"]]
        print(f"--- {fixture.stem} ---")
        transcript, events = run_trace(script, turns, doc["session_id"],
                                       started_at=doc.get("started_at", "1970-01-01T00:00:00Z"),
                                       store=store, start_topic=doc.get("start_topic"))
        for turn in turns:
            print(f"  HUMAN: {turn.text}")
        show(events)

    print("--- full interview ---")
    transcript, events = run_trace(script, [TraceTurn(a, 4.0) for a in FULL_SESSION],
                                   "demo-full", started_at="2026-05-01T12:00:00Z",
                                   store=store)
    show(events)
    print(f"\ntranscripts in {DATA_DIR / 'sessions'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
