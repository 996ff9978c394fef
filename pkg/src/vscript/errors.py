"""Exception taxonomy for the pipeline.

Everything raised on purpose derives from VScriptError so callers can catch
pipeline failures without swallowing programming errors.
"""

from __future__ import annotations


class VScriptError(Exception):
    """Base class for all pipeline errors."""


# --- backend gateway ---------------------------------------------------------


class GatewayError(VScriptError):
    pass


class BackendUnavailable(GatewayError):
    """Transport-level failure talking to a backend; carries the raw payload."""

    def __init__(self, message: str, payload: object = None):
        super().__init__(message)
        self.payload = payload


class BackendMalformedReply(GatewayError):
    """Backend answered but violated the wire contract; carries the raw payload."""

    def __init__(self, message: str, payload: object = None):
        super().__init__(message)
        self.payload = payload


class EmptyText(GatewayError):
    pass


# --- plot generation ---------------------------------------------------------


class EmptyStartingWords(VScriptError):
    pass


class AllCandidatesEmpty(VScriptError):
    pass


class NoScorableCandidate(VScriptError):
    pass


class NoSentences(VScriptError):
    pass


# --- dialogue generation -----------------------------------------------------


class DialogueParseError(VScriptError):
    pass


class MalformedRecord(VScriptError):
    def __init__(self, message: str, record_index: int):
        super().__init__(f"record {record_index}: {message}")
        self.record_index = record_index


# --- scene assembly ----------------------------------------------------------


class CardinalityMismatch(VScriptError):
    pass


# --- video store -------------------------------------------------------------


class RejectedClip(VScriptError):
    """Clip failed database ingestion; reason is one of
    speaker_dominated / banned_caption / empty_caption."""

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason


class DuplicateClipId(VScriptError):
    pass


class CorruptIndex(VScriptError):
    """Persisted index failed verification; detail is a stable token such as
    bad_magic / bad_version / row_count_mismatch / bad_norm / bad_manifest."""

    def __init__(self, detail: str, message: str = ""):
        super().__init__(f"{detail}: {message}" if message else detail)
        self.detail = detail


class EmptyIndex(VScriptError):
    pass


class MissingMusicEntry(VScriptError):
    pass


# --- metrics -----------------------------------------------------------------


class NoNgrams(VScriptError):
    pass


class EmptySequence(VScriptError):
    pass


class LengthMismatch(VScriptError):
    pass


class EmptyCandidate(VScriptError):
    pass


# --- orchestrator ------------------------------------------------------------


class UnknownSession(VScriptError):
    pass


class InvalidSteer(VScriptError):
    pass


class CorruptSessionRecord(VScriptError):
    pass


class PipelineStageError(VScriptError):
    """Wraps the first failure inside a pipeline run with its stage name."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage}: {cause}")
        self.stage = stage
        self.cause = cause
