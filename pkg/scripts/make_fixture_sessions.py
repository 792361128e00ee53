#!/usr/bin/env python3
"""Generate a batch of synthetic interview sessions for pipeline experiments.

    python3 scripts/make_fixture_sessions.py --count 42 --data-dir demo_data

The generated population mirrors the case-study split: roughly 69% of
sessions close on a positive note, 26% mixed, 5% negative.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from interviewkit.dialogue import default_script
from interviewkit.session import TraceTurn, run_trace
from interviewkit.transcript import TranscriptStore

OPENERS = [
    "I value accuracy because wrong answers cost trust.",
    "Mostly speed, because waiting kills the flow.",
    "Understanding matters because nuance is everything.",
]
LIKENESS = [
    "Yeah, not only human-like but also considering the user's preferences.",
    "Um, not really. I think that conversational AI can be useful even if it's not human-like.",
    "Yes, within reasonable limits for sure.",
]
TRAITS = [
    "Yes, because small flaws can make it relatable.",
    "No, because negative traits would erode trust.",
]
MISUSE = [
    "Clear rules, because misuse is a real risk.",
    "Transparency, because hidden behavior invites misuse.",
]
EXPERIENCE = {
    "positive": "Yeah, it was a really interesting experience because this is my first time.",
    "neutral": "Interesting but I experienced an error in the middle.",
    "negative": "It's a little creepy.",
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=42)
    parser.add_argument("--data-dir", default="demo_data")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    script = default_script()
    store = TranscriptStore(Path(args.data_dir) / "sessions")

    for i in range(args.count):
        roll = rng.random()
        mood = "positive" if roll < 0.69 else ("neutral" if roll < 0.95 else "negative")
        likeness = rng.choice(LIKENESS)
        answers = [rng.choice(OPENERS), likeness]
        if "not really" not in likeness:
            answers.append(rng.choice(TRAITS))  # agree path visits negative traits
        answers += [rng.choice(MISUSE), EXPERIENCE[mood]]
        turns = [TraceTurn(a, rng.uniform(2.5, 9.0)) for a in answers]
        run_trace(script, turns, f"synth{i:03d}",
                  started_at="2026-05-01T09:00:00Z", store=store)
    print(f"wrote {args.count} sessions to {store.root}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
