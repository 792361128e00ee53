"""Follow-up question generation: fixed templates or a language model.

The case-study configuration is template-only; generative mode adapts the
probe to the answer but always falls back to templates when the model call
fails, so an interview can never stall on a dead endpoint.
"""

from __future__ import annotations

import json
import logging
from enum import Enum
from typing import TYPE_CHECKING, Sequence

from ..errors import ClientError
from ..resources import prompt_path
from .script import InterviewScript

if TYPE_CHECKING:  # pragma: no cover
    from ..pipeline.client import LanguageModelClient

logger = logging.getLogger(__name__)


class FollowupMode(str, Enum):
    TEMPLATE = "template"
    GENERATIVE = "generative"


def _followup_prompt() -> str:
    return prompt_path("followup.txt").read_text(encoding="utf-8")


def _template_followup(script: InterviewScript, cursor: int) -> tuple[str, int]:
    templates = script.followup_templates
    if cursor >= len(templates):
        logger.info("follow-up templates exhausted; reusing the last one")
        return templates[-1], cursor
    return templates[cursor], cursor + 1


def _constrain_to_question(completion: str) -> str:
    """Reduce a model completion to a single question line."""
    line = completion.strip().splitlines()[0].strip().strip('"') if completion.strip() else ""
    if not line:
        return ""
    if "?" in line:
        return line[:line.index("?") + 1]
    return line.rstrip(".!") + "?"


def generate_followup(
    context: Sequence[tuple[str, str]],
    mode: FollowupMode,
    llm: "LanguageModelClient | None",
    script: InterviewScript,
    cursor: int,
) -> tuple[str, int]:
    """Produce the next follow-up question and the advanced template cursor.

    ``context`` is the recent (speaker, text) turns, newest last. Template
    mode never touches the client. Generative mode requires one and falls
    back to the template path on any client error.
    """
    if mode is FollowupMode.TEMPLATE:
        return _template_followup(script, cursor)
    if llm is None:
        raise ValueError("generative follow-up mode requires a language-model client")
    payload = json.dumps([{"speaker": s, "text": t} for s, t in context], ensure_ascii=False)
    try:
        completion = llm.complete(_followup_prompt(), payload)
    except ClientError as exc:
        logger.warning("generative follow-up failed (%s); using template", exc)
        return _template_followup(script, cursor)
    question = _constrain_to_question(completion)
    if not question:
        return _template_followup(script, cursor)
    return question, cursor
