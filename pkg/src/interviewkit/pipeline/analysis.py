"""Opinion-distribution arithmetic and the model-assisted analysis stage.

Percentages are always computed in code from record counts (half-up to two
decimals); the model only ranks reasons and clusters motivations. Nothing
numeric in the final report can originate from model text.
"""

from __future__ import annotations

import json
import logging
from decimal import ROUND_HALF_UP, Decimal
from typing import Sequence

from ..errors import EmptyInputError, StageError
from .client import LanguageModelClient
from .prompts import stage_prompt
from .records import (
    EXPERIENCE_LABELS,
    STANCES,
    AnalysisReport,
    StructuredRecord,
    ThemeAnalysis,
)

logger = logging.getLogger(__name__)

STAGE = "03_analysis"


def percentage(count: int, total: int) -> float:
    """100 * count / total, rounded half-up to two decimals."""
    if total <= 0:
        return 0.0
    value = (Decimal(count) * 100) / Decimal(total)
    return float(value.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def distribution(counts: dict[str, int], categories: Sequence[str]) -> dict[str, float]:
    """Per-category percentages; categories with zero records report 0.00."""
    total = sum(counts.get(c, 0) for c in categories)
    return {c: percentage(counts.get(c, 0), total) for c in categories}


def analyze(
    records: Sequence[StructuredRecord],
    llm: LanguageModelClient,
    extra_queries: Sequence[str] = (),
) -> AnalysisReport:
    """Aggregate records into an :class:`AnalysisReport`.

    Raises :class:`EmptyInputError` for an empty record list and
    :class:`StageError` when the model's qualitative output cannot be parsed.
    """
    if not records:
        raise EmptyInputError("analysis requires at least one record")

    ordered = sorted(records, key=lambda r: r.session_id)
    n = len(ordered)

    label_counts: dict[str, int] = {}
    reasons: dict[str, list[str]] = {label: [] for label in EXPERIENCE_LABELS}
    for record in ordered:
        label_counts[record.experience_label] = label_counts.get(record.experience_label, 0) + 1
        if record.experience_reason.strip():
            reasons[record.experience_label].append(record.experience_reason.strip())

    themes = sorted({theme for record in ordered for theme in record.themes})
    stance_counts: dict[str, dict[str, int]] = {t: {} for t in themes}
    motivations: dict[str, list[str]] = {t: [] for t in themes}
    for record in ordered:
        for theme, answer in record.themes.items():
            stance_counts[theme][answer.stance] = stance_counts[theme].get(answer.stance, 0) + 1
            if answer.motivation.strip():
                motivations[theme].append(answer.motivation.strip())

    model_input = json.dumps({
        "overall": {label: {"count": label_counts.get(label, 0), "reasons": reasons[label]}
                    for label in EXPERIENCE_LABELS},
        "themes": {theme: {"stances": stance_counts[theme], "motivations": motivations[theme]}
                   for theme in themes},
        "queries": list(extra_queries),
    }, ensure_ascii=False, sort_keys=True)

    raw = llm.complete(stage_prompt(STAGE), model_input)
    try:
        qualitative = json.loads(raw)
        top_reasons = {label: tuple(str(r) for r in qualitative.get("top_reasons", {}).get(label, ()))
                       for label in EXPERIENCE_LABELS}
        clusters = {theme: tuple(str(m) for m in qualitative.get("motivation_clusters", {}).get(theme, ()))
                    for theme in themes}
        findings = tuple({"query": str(f.get("query", "")), "finding": str(f.get("finding", ""))}
                         for f in qualitative.get("query_findings", ()))
    except (json.JSONDecodeError, AttributeError, TypeError) as exc:
        raise StageError(STAGE, f"model analysis output is not valid JSON: {exc}") from exc

    if extra_queries and len(findings) != len(extra_queries):
        raise StageError(STAGE, f"expected {len(extra_queries)} query findings, "
                                f"model returned {len(findings)}")

    return AnalysisReport(
        n_sessions=n,
        distribution=distribution(label_counts, EXPERIENCE_LABELS),
        top_reasons=top_reasons,
        per_theme={theme: ThemeAnalysis(
            stances=distribution(stance_counts[theme], STANCES),
            motivations=clusters.get(theme, ()))
            for theme in themes},
        additional_queries=findings,
    )
