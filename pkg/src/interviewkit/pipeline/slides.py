"""Slide deck drafting, numeric injection, and deterministic rendering.

The model drafts titles and bullets; every percentage in the final deck is
injected from the analysis report by the orchestrator. Rendering emits a
plain-markdown deck (slides separated by ``---`` rules) whose bytes are a
pure function of the spec, and ``parse_deck`` inverts it exactly.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass

from ..errors import StageError
from .client import LanguageModelClient
from .prompts import stage_prompt
from .records import EXPERIENCE_LABELS, STANCES, AnalysisReport

logger = logging.getLogger(__name__)

STAGE = "04_slides"

MIN_SLIDES = 3
MAX_SLIDES = 15


@dataclass(frozen=True)
class TableRow:
    label: str
    value: float


@dataclass(frozen=True)
class Slide:
    title: str
    bullets: tuple[str, ...] = ()
    table: tuple[TableRow, ...] | None = None


@dataclass(frozen=True)
class SlideDeckSpec:
    slides: tuple[Slide, ...]
    event_name: str = ""
    date: str = ""

    def to_dict(self) -> dict:
        return {
            "event_name": self.event_name,
            "date": self.date,
            "slides": [
                {"title": s.title, "bullets": list(s.bullets),
                 "table": None if s.table is None else
                 [[row.label, row.value] for row in s.table]}
                for s in self.slides
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SlideDeckSpec":
        slides = tuple(
            Slide(title=str(s["title"]),
                  bullets=tuple(str(b) for b in s.get("bullets", ())),
                  table=None if s.get("table") is None else
                  tuple(TableRow(str(label), float(value)) for label, value in s["table"]))
            for s in doc.get("slides", ()))
        return cls(slides=slides, event_name=str(doc.get("event_name", "")),
                   date=str(doc.get("date", "")))


# ----------------------------------------------------------------------
# numeric injection

_PLACEHOLDER_RE = re.compile(r"\{\{pct:([^}]+)\}\}")


def value_index(report: AnalysisReport) -> dict[str, float]:
    """All injectable percentages, keyed case-insensitively."""
    index: dict[str, float] = {}
    for label, value in report.distribution.items():
        index[label.lower()] = value
    for theme, analysis in report.per_theme.items():
        for stance, value in analysis.stances.items():
            index[f"{theme.lower()}:{stance.lower()}"] = value
    return index


def inject_percentages(text: str, index: dict[str, float]) -> str:
    """Substitute placeholders and overwrite label-adjacent numbers.

    Two passes: ``{{pct:KEY}}`` placeholders become report values, then any
    literal number sitting next to an overall category name is overwritten by
    the report value, which neutralizes model-invented figures.
    """

    def _placeholder(match: re.Match) -> str:
        key = match.group(1).strip().lower()
        if key in index:
            return f"{index[key]:.2f}"
        logger.warning("unknown percentage placeholder %r left as 0.00", match.group(1))
        return "0.00"

    out = _PLACEHOLDER_RE.sub(_placeholder, text)
    for label in EXPERIENCE_LABELS:
        if label not in index and label.lower() not in index:
            continue
        value = index[label.lower()]
        pattern = re.compile(
            rf"(\b{label}\b[^0-9\n{{}}]{{0,40}}?)\d+(?:\.\d+)?(\s*(?:%|percent))",
            re.IGNORECASE)
        out = pattern.sub(lambda m, v=value: f"{m.group(1)}{v:.2f}{m.group(2)}", out)
    return out


def _resolve_table_value(slide_title: str, label: str,
                         report: AnalysisReport) -> float | None:
    lowered = label.lower()
    if lowered in (l.lower() for l in EXPERIENCE_LABELS):
        return report.distribution.get(lowered, 0.0)
    if lowered in STANCES:
        normalized_title = re.sub(r"[^a-z0-9]+", "_", slide_title.lower())
        for theme, analysis in report.per_theme.items():
            if theme.lower() in normalized_title:
                return analysis.stances.get(lowered, 0.0)
    return None


def generate_slide_content(report: AnalysisReport, llm: LanguageModelClient,
                           event_name: str = "", date: str = "",
                           min_slides: int = MIN_SLIDES,
                           max_slides: int = MAX_SLIDES) -> SlideDeckSpec:
    """Draft deck content with the model, then inject every number from the report."""
    report_json = json.dumps(report.to_dict(), ensure_ascii=False, sort_keys=True)
    raw = llm.complete(stage_prompt(STAGE), report_json)
    try:
        doc = json.loads(raw)
        drafted = doc["slides"]
        assert isinstance(drafted, list)
    except (json.JSONDecodeError, KeyError, AssertionError, TypeError) as exc:
        raise StageError(STAGE, f"model slide output is not a valid slide list: {exc}") from exc

    index = value_index(report)
    slides: list[Slide] = []
    for position, raw_slide in enumerate(drafted):
        title = str(raw_slide.get("title", "")).strip() or f"Slide {position + 1}"
        bullets = tuple(inject_percentages(str(b), index)
                        for b in raw_slide.get("bullets", ()) or ())
        table_rows: tuple[TableRow, ...] | None = None
        raw_table = raw_slide.get("table")
        if raw_table:
            rows = []
            for entry in raw_table:
                label = str(entry[0])
                value = _resolve_table_value(title, label, report)
                if value is None:
                    logger.warning("dropping table row with unknown label %r", label)
                    continue
                rows.append(TableRow(label=label, value=value))
            table_rows = tuple(rows) if rows else None
        if position == 0:
            bullets, table_rows = (), None  # first slide is the title slide
        slides.append(Slide(title=title, bullets=bullets, table=table_rows))

    if not (min_slides <= len(slides) <= max_slides):
        raise StageError(STAGE, f"deck has {len(slides)} slides, "
                                f"outside the allowed [{min_slides}, {max_slides}]")
    return SlideDeckSpec(slides=tuple(slides), event_name=event_name, date=date)


# ----------------------------------------------------------------------
# deterministic rendering

_SEPARATOR = "\n---\n\n"


def render_slides(spec: SlideDeckSpec) -> str:
    """Render the deck as markdown; identical specs give identical bytes."""
    sections: list[str] = []
    for i, slide in enumerate(spec.slides):
        lines: list[str] = []
        if i == 0:
            lines.append(f"# {slide.title}")
            if spec.event_name or spec.date:
                lines.append("")
            if spec.event_name:
                lines.append(f"*Event: {spec.event_name}*")
            if spec.date:
                lines.append(f"*Date: {spec.date}*")
        else:
            lines.append(f"## {slide.title}")
            if slide.bullets:
                lines.append("")
                lines.extend(f"- {bullet}" for bullet in slide.bullets)
            if slide.table is not None:
                lines.append("")
                lines.append("| Category | Percent |")
                lines.append("| --- | --- |")
                lines.extend(f"| {row.label} | {row.value:.2f} |" for row in slide.table)
        sections.append("\n".join(lines) + "\n")
    return _SEPARATOR.join(sections)


def parse_deck(text: str) -> SlideDeckSpec:
    """Invert :func:`render_slides`; used by round-trip checks."""
    sections = text.split(_SEPARATOR)
    slides: list[Slide] = []
    event_name = ""
    date = ""
    for i, section in enumerate(sections):
        title = ""
        bullets: list[str] = []
        rows: list[TableRow] = []
        saw_table = False
        for line in section.splitlines():
            if line.startswith("# ") and i == 0:
                title = line[2:]
            elif line.startswith("## "):
                title = line[3:]
            elif line.startswith("- "):
                bullets.append(line[2:])
            elif line.startswith("|"):
                cells = [c.strip() for c in line.strip("|").split("|")]
                if cells[0] in ("Category", "---"):
                    saw_table = True
                    continue
                rows.append(TableRow(label=cells[0], value=float(cells[1])))
                saw_table = True
            elif line.startswith("*Event: ") and line.endswith("*") and i == 0:
                event_name = line[len("*Event: "):-1]
            elif line.startswith("*Date: ") and line.endswith("*") and i == 0:
                date = line[len("*Date: "):-1]
        slides.append(Slide(title=title, bullets=tuple(bullets),
                            table=tuple(rows) if saw_table and rows else None))
    return SlideDeckSpec(slides=tuple(slides), event_name=event_name, date=date)
