"""Exception hierarchy shared across the package."""

from __future__ import annotations


class InterviewKitError(Exception):
    """Base class for all errors raised by this package."""


class ScriptError(InterviewKitError):
    """Interview script is malformed or violates a load-time invariant."""


class SessionClosedError(InterviewKitError):
    """An event arrived for a session whose dialogue already completed."""


class NotFoundError(InterviewKitError):
    """A referenced session, script, or run does not exist."""


class OrderingError(InterviewKitError):
    """A transcript append skipped or duplicated a sequence number."""


class IntegrityError(InterviewKitError):
    """A stored session file is corrupt.

    ``offset`` is the byte offset at which decoding failed, when known.
    """

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset


class StreamOrderError(InterviewKitError):
    """Prosody frames arrived out of order; predictor state was reset."""


class ClientError(InterviewKitError):
    """The language-model client failed after exhausting its retry budget."""


class MockFixtureMiss(ClientError):
    """A strict mock client received a (prompt, input) pair with no fixture."""


class StageError(InterviewKitError):
    """A pipeline stage failed; the run can resume from the last checkpoint."""

    def __init__(self, stage: str, message: str, session_id: str | None = None,
                 checkpoint_path: str | None = None):
        detail = f"stage {stage}: {message}"
        if session_id:
            detail += f" (session {session_id})"
        if checkpoint_path:
            detail += f" [checkpoint: {checkpoint_path}]"
        super().__init__(detail)
        self.stage = stage
        self.message = message
        self.session_id = session_id
        self.checkpoint_path = checkpoint_path

    def with_checkpoint(self, checkpoint_path: str) -> "StageError":
        if self.checkpoint_path is not None:
            return self
        return StageError(self.stage, self.message, self.session_id, checkpoint_path)


class EmptyInputError(InterviewKitError):
    """An operation that requires at least one record received none."""


class RenderError(InterviewKitError):
    """Writing a rendered artifact to disk failed."""
