"""Interview script model, JSON loader, and load-time validation.

A script is a JSON document (see ``interviewkit/data/script.schema.json``).
Lexicon values may be given inline as string arrays or as ``{"file": path}``
references to UTF-8 text files with one entry per line, resolved relative to
the script file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ScriptError
from ..text import tokenize
from .types import Agreement, Sentiment

END = "END"

_DEFAULT_SCRIPT_RESOURCE = "default_script.json"


@dataclass(frozen=True)
class Topic:
    id: str
    base_question: str
    routing: dict[Agreement, str]   # target topic id or END
    max_followups: int = 0


@dataclass(frozen=True)
class InterviewScript:
    script_id: str
    topics: tuple[Topic, ...]
    positive_words: tuple[str, ...]
    negative_words: tuple[str, ...]
    agree_phrases: tuple[str, ...]
    disagree_phrases: tuple[str, ...]
    reason_keywords: tuple[str, ...]
    followup_templates: tuple[str, ...]
    interim_fillers: tuple[str, ...]
    encourage_responses: tuple[str, ...]
    closing_responses: dict[Sentiment, str]
    confusion_phrases: tuple[str, ...]
    giving_up_phrases: tuple[str, ...]
    extensive_answer_ceiling: int = 20
    min_answer_words: int = 5
    minimal_backchannel_token: str = "mhmm"
    experience_topic_id: str | None = None
    _topic_index: dict[str, Topic] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_topic_index", {t.id: t for t in self.topics})

    def topic(self, topic_id: str) -> Topic:
        try:
            return self._topic_index[topic_id]
        except KeyError:
            raise ScriptError(f"unknown topic id: {topic_id!r}") from None

    @property
    def first_topic(self) -> Topic:
        return self.topics[0]

    def theme_ids(self) -> list[str]:
        """Topic ids treated as analysis themes (the experience topic is reported separately)."""
        return [t.id for t in self.topics if t.id != self.experience_topic_id]


def _normalize_entries(entries: list[str], label: str, lowercase: bool) -> tuple[str, ...]:
    out: list[str] = []
    for raw in entries:
        entry = raw.strip().lower() if lowercase else raw.strip()
        if not entry:
            continue
        if not tokenize(entry):
            raise ScriptError(f"{label} entry {raw!r} contains no words")
        out.append(entry)
    if not out:
        raise ScriptError(f"{label} must not be empty")
    return tuple(out)


def _load_entry_list(value: object, base_dir: Path, label: str,
                     lowercase: bool = True) -> tuple[str, ...]:
    # Lexicons used for matching are normalized to lowercase; spoken response
    # lists (fillers, templates, encouragements) keep their casing.
    if isinstance(value, dict) and "file" in value:
        path = base_dir / str(value["file"])
        if not path.is_file():
            raise ScriptError(f"{label} lexicon file not found: {path}")
        lines = path.read_text(encoding="utf-8").splitlines()
        return _normalize_entries(lines, label, lowercase)
    if isinstance(value, list):
        return _normalize_entries([str(v) for v in value], label, lowercase)
    raise ScriptError(f"{label} must be a list of strings or a {{'file': ...}} reference")


def _check_acyclic(topics: tuple[Topic, ...]) -> None:
    # Any cycle in the routing graph could keep a session alive forever,
    # so cyclic scripts are rejected at load time.
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {t.id: WHITE for t in topics}
    index = {t.id: t for t in topics}

    def visit(tid: str, stack: list[str]) -> None:
        color[tid] = GRAY
        for target in index[tid].routing.values():
            if target == END:
                continue
            if color[target] == GRAY:
                cycle = " -> ".join(stack + [tid, target])
                raise ScriptError(f"routing graph has a cycle: {cycle}")
            if color[target] == WHITE:
                visit(target, stack + [tid])
        color[tid] = BLACK

    for t in topics:
        if color[t.id] == WHITE:
            visit(t.id, [])


def build_script(doc: dict, base_dir: Path | None = None, script_id: str | None = None) -> InterviewScript:
    """Validate a parsed script document and build an :class:`InterviewScript`."""
    base_dir = base_dir or Path(".")
    raw_topics = doc.get("topics")
    if not raw_topics:
        raise ScriptError("script must define at least one topic")

    topics: list[Topic] = []
    for raw in raw_topics:
        tid = raw.get("id")
        if not tid:
            raise ScriptError("every topic needs an id")
        routing_raw = raw.get("routing", {})
        routing: dict[Agreement, str] = {}
        for cls in Agreement:
            if cls.value not in routing_raw:
                raise ScriptError(f"topic {tid!r} routing missing class {cls.value!r}")
            routing[cls] = str(routing_raw[cls.value])
        max_followups = int(raw.get("max_followups", 0))
        if max_followups < 0:
            raise ScriptError(f"topic {tid!r}: max_followups must be >= 0")
        question = str(raw.get("base_question", "")).strip()
        if not question:
            raise ScriptError(f"topic {tid!r} needs a base_question")
        topics.append(Topic(id=tid, base_question=question, routing=routing,
                            max_followups=max_followups))

    ids = [t.id for t in topics]
    if len(set(ids)) != len(ids):
        raise ScriptError("duplicate topic ids")
    known = set(ids)
    for t in topics:
        for cls, target in t.routing.items():
            if target != END and target not in known:
                raise ScriptError(
                    f"topic {t.id!r} routes {cls.value!r} to unknown topic {target!r}")
    _check_acyclic(tuple(topics))

    min_answer_words = int(doc.get("min_answer_words", 5))
    ceiling = int(doc.get("extensive_answer_ceiling", 20))
    if min_answer_words < 1:
        raise ScriptError("min_answer_words must be >= 1")
    if ceiling <= min_answer_words:
        raise ScriptError("extensive_answer_ceiling must exceed min_answer_words")

    closings_raw = doc.get("closing_responses", {})
    closings: dict[Sentiment, str] = {}
    for sentiment in Sentiment:
        if sentiment.value not in closings_raw:
            raise ScriptError(f"closing_responses missing {sentiment.value!r}")
        closings[sentiment] = str(closings_raw[sentiment.value])

    experience_topic = doc.get("experience_topic")
    if experience_topic is not None and experience_topic not in known:
        raise ScriptError(f"experience_topic {experience_topic!r} is not a topic id")

    polarity = doc.get("polarity_lexicon", {})
    agreement = doc.get("agreement_lexicon", {})
    repair = doc.get("repair_lexicon", {})

    return InterviewScript(
        script_id=str(script_id or doc.get("script_id", "default")),
        topics=tuple(topics),
        positive_words=_load_entry_list(polarity.get("positive", []), base_dir, "polarity.positive"),
        negative_words=_load_entry_list(polarity.get("negative", []), base_dir, "polarity.negative"),
        agree_phrases=_load_entry_list(agreement.get("agree", []), base_dir, "agreement.agree"),
        disagree_phrases=_load_entry_list(agreement.get("disagree", []), base_dir, "agreement.disagree"),
        reason_keywords=_load_entry_list(doc.get("reason_keywords", ["because", "as"]), base_dir, "reason_keywords"),
        followup_templates=_load_entry_list(doc.get("followup_templates", []), base_dir, "followup_templates", lowercase=False),
        interim_fillers=_load_entry_list(doc.get("interim_fillers", []), base_dir, "interim_fillers", lowercase=False),
        encourage_responses=_load_entry_list(doc.get("encourage_responses", []), base_dir, "encourage_responses", lowercase=False),
        confusion_phrases=_load_entry_list(
            doc.get("confusion_phrases", ["pardon", "could you say that again"]),
            base_dir, "confusion_phrases"),
        giving_up_phrases=_load_entry_list(
            doc.get("giving_up_phrases", ["i have no idea", "i don't know"]),
            base_dir, "giving_up_phrases"),
        closing_responses=closings,
        extensive_answer_ceiling=ceiling,
        min_answer_words=min_answer_words,
        minimal_backchannel_token=str(doc.get("minimal_backchannel_token", "mhmm")),
        experience_topic_id=experience_topic,
    )


def load_script(path: str | Path) -> InterviewScript:
    """Load and validate a script JSON file."""
    path = Path(path)
    if not path.is_file():
        raise ScriptError(f"script file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScriptError(f"script file {path} is not valid JSON: {exc}") from exc
    return build_script(doc, base_dir=path.parent, script_id=doc.get("script_id", path.stem))


def default_script() -> InterviewScript:
    """The packaged conversational-AI interview script."""
    from ..resources import DATA_DIR

    doc = json.loads((DATA_DIR / _DEFAULT_SCRIPT_RESOURCE).read_text(encoding="utf-8"))
    return build_script(doc, base_dir=DATA_DIR, script_id=doc.get("script_id"))


class ScriptRegistry:
    """Resolve script ids to loaded scripts: ``<script_dir>/<id>.json``,
    falling back to the packaged default for the id ``default``."""

    def __init__(self, script_dir: str | Path | None = None):
        self.script_dir = Path(script_dir) if script_dir else None
        self._cache: dict[str, InterviewScript] = {}

    def get(self, script_id: str) -> InterviewScript:
        if script_id in self._cache:
            return self._cache[script_id]
        if self.script_dir is not None:
            candidate = self.script_dir / f"{script_id}.json"
            if candidate.is_file():
                script = load_script(candidate)
                self._cache[script_id] = script
                return script
        if script_id == "default":
            script = default_script()
            self._cache[script_id] = script
            return script
        raise ScriptError(f"unknown script id {script_id!r} "
                          f"(searched {self.script_dir or 'packaged scripts only'})")
