"""Exception and warning types shared across the pipeline."""

from __future__ import annotations


class CanMatchError(Exception):
    """Base class for all errors raised by this package."""


# --- CAN log parsing ---

class EmptyLog(CanMatchError):
    """The log contains no usable rows for one or both signals."""


class MalformedRow(CanMatchError):
    """A CSV row has the wrong arity or a non-numeric field."""


class UnknownSignal(CanMatchError):
    """A CSV row names a signal other than speed or pedal."""


class NonMonotonicTime(CanMatchError):
    """A timestamp is negative or the series cannot be ordered."""


# --- road network ---

class XmlMalformed(CanMatchError):
    """The OSM input is not well-formed XML."""


class NoDrivableWays(CanMatchError):
    """No way in the OSM input carries a drivable highway tag."""


class DanglingNodeRef(CanMatchError):
    """A way references a node id that is not defined in the input."""


class SchemaMismatch(CanMatchError):
    """A serialized graph is missing required keys or is truncated."""


class VersionUnsupported(CanMatchError):
    """A serialized graph declares a format version we cannot read."""


class EmptyResult(CanMatchError):
    """An operation produced nothing usable (no surviving graph, no candidates)."""


# --- trajectory reconstruction ---

class InsufficientData(CanMatchError):
    """Too few candidate points to derive a clustering threshold."""


class TooFewNodes(CanMatchError):
    """Fewer than two trajectory nodes survive extraction and merging."""


# --- matching ---

class TrajectoryTooShort(CanMatchError):
    """The trajectory has no edges to match."""


class LengthMismatch(CanMatchError):
    """Two weight or node sequences that must align have different lengths."""


class OracleTooLarge(CanMatchError):
    """The graph exceeds what the exhaustive reference matcher will accept."""


# --- simulation ---

class NoSuchPath(CanMatchError):
    """No simple path of the requested length was found."""


# --- warnings (soft conditions; computation continues) ---

class DegenerateClusters(UserWarning):
    """All gaps equal; the threshold falls back to that common value."""


class NoCandidates(UserWarning):
    """A signal produced no candidate points."""


class EmptySpan(UserWarning):
    """A time span contains no samples; its distance is zero."""


class Truncated(UserWarning):
    """Path enumeration stopped at the candidate cap."""


class DuplicateTimestamp(UserWarning):
    """A signal repeats a timestamp; the first occurrence wins."""


class PairingTruncated(UserWarning):
    """Node sequences of unequal length were paired over the shorter one."""
