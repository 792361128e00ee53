"""Locations of packaged data files (scripts, lexicons, prompt templates)."""

from __future__ import annotations

from pathlib import Path

_PKG_ROOT = Path(__file__).resolve().parent

DATA_DIR = _PKG_ROOT / "data"
PROMPTS_DIR = _PKG_ROOT / "prompts"


def data_path(*parts: str) -> Path:
    return DATA_DIR.joinpath(*parts)


def prompt_path(name: str) -> Path:
    return PROMPTS_DIR / name
