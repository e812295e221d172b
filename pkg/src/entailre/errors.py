"""Exception types raised across the package.

Everything derives from EntailreError so callers can catch broadly; the
leaf types exist because the CLI maps them onto distinct exit codes and
tests assert on them.
"""


class EntailreError(Exception):
    """Base class for all package errors."""


class ParseError(EntailreError, ValueError):
    """A file or stream does not match its declared format."""


class UnknownLabel(EntailreError, ValueError):
    """A label id is not part of the active label space."""


class MissingMask(EntailreError, ValueError):
    """A sentence or hypothesis lacks a required entity mask token."""


class SpanError(EntailreError, ValueError):
    """An entity span is out of bounds or overlaps its partner."""


class MissingTemplate(EntailreError, KeyError):
    """A template bank has no entry for a requested label or family."""


class BadSlot(EntailreError, ValueError):
    """A template pattern demands a slot the call site cannot fill."""


class EmptyCandidates(EntailreError, ValueError):
    """A loss or prediction was requested over no usable candidates."""


class NoAbstainLabel(EntailreError, ValueError):
    """An abstention-specific operation ran on a space without an abstain label."""


class DivergedLoss(EntailreError, RuntimeError):
    """Training produced a non-finite loss."""


class MissingScores(EntailreError, ValueError):
    """An ensemble heuristic needs a score that was not supplied."""


class CheckpointError(EntailreError, ValueError):
    """A checkpoint file is missing fields or has an incompatible layout."""


class ProtocolError(EntailreError, RuntimeError):
    """An external scorer endpoint sent a malformed or error response."""


class IdMismatch(ProtocolError):
    """An external scorer response does not line up with the request ids."""


class ScorerTimeout(EntailreError, RuntimeError):
    """An external scorer endpoint failed to answer in time."""
