"""Stage prompt templates, loaded from the packaged ``prompts/`` directory.

Templates are versioned text files; tests pin mock fixtures to the full
template content, so editing a template invalidates the pinned fixtures
instead of silently changing behavior.
"""

from __future__ import annotations

import hashlib
from functools import lru_cache
from pathlib import Path

from ..resources import PROMPTS_DIR

STAGES = ("01_correct", "02_summarize", "03_analysis", "04_slides", "05_script")


@lru_cache(maxsize=None)
def stage_prompt(stage: str, prompt_dir: str | None = None) -> str:
    base = Path(prompt_dir) if prompt_dir else PROMPTS_DIR
    path = base / f"{stage}.txt"
    return path.read_text(encoding="utf-8")


def prompt_sha(stage: str, prompt_dir: str | None = None) -> str:
    return hashlib.sha256(stage_prompt(stage, prompt_dir).encode("utf-8")).hexdigest()


@lru_cache(maxsize=1)
def _registry() -> dict[str, str]:
    return {stage: stage_prompt(stage) for stage in STAGES}


def identify_stage(prompt: str) -> str:
    """Map a prompt back to its stage name (exact template match)."""
    for stage, text in _registry().items():
        if prompt == text:
            return stage
    return "unknown"
