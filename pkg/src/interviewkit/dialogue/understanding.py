"""Keyword-driven language understanding over script lexicons.

All matching is case-insensitive and whole-word: lexicon entries are
tokenized the same way as utterances, and phrases must appear as contiguous
token runs. This is what keeps "as" from firing inside "basically".
"""

from __future__ import annotations

from ..text import contains_phrase, count_phrase, tokenize
from .script import InterviewScript
from .types import Agreement, Sentiment, UnderstandingResult, UserUtterance


def classify_sentiment(text: str, script: InterviewScript) -> Sentiment:
    """Count polarity-lexicon hits; ties (including zero hits) are neutral."""
    tokens = tokenize(text)
    positive = sum(count_phrase(tokens, tokenize(w)) for w in script.positive_words)
    negative = sum(count_phrase(tokens, tokenize(w)) for w in script.negative_words)
    if positive > negative:
        return Sentiment.POSITIVE
    if negative > positive:
        return Sentiment.NEGATIVE
    return Sentiment.NEUTRAL


def detect_agreement(text: str, script: InterviewScript) -> Agreement:
    """Classify stance by lexicon phrases.

    Disagreement entries are checked first so that a negated phrase such as
    "not really" wins over an embedded "yeah" earlier in the utterance.
    """
    tokens = tokenize(text)
    for phrase in script.disagree_phrases:
        if contains_phrase(tokens, tokenize(phrase)):
            return Agreement.DISAGREE
    for phrase in script.agree_phrases:
        if contains_phrase(tokens, tokenize(phrase)):
            return Agreement.AGREE
    return Agreement.UNCLEAR


def has_reason_keyword(text: str, script: InterviewScript) -> bool:
    tokens = tokenize(text)
    return any(contains_phrase(tokens, tokenize(kw)) for kw in script.reason_keywords)


def needs_followup(utterance: UserUtterance, script: InterviewScript) -> bool:
    """Probe again when the answer is too short or gives no reasoning.

    Very short answers always get a follow-up. Longer ones get a follow-up
    only when they carry no reason keyword and stay below the extensive-answer
    ceiling; someone who spoke at length is never probed again even without
    an explicit "because".
    """
    wc = utterance.word_count
    if wc < script.min_answer_words:
        return True
    if not has_reason_keyword(utterance.text, script) and wc < script.extensive_answer_ceiling:
        return True
    return False


def understand(utterance: UserUtterance, script: InterviewScript) -> UnderstandingResult:
    """Full interpretation record for one turn, stored in the dialogue history."""
    return UnderstandingResult(
        sentiment=classify_sentiment(utterance.text, script),
        agreement=detect_agreement(utterance.text, script),
        has_reason_keyword=has_reason_keyword(utterance.text, script),
        word_count=utterance.word_count,
    )
