"""Exception types shared across the package."""


class EvStereoError(Exception):
    """Base class for all errors raised by evstereo."""


class InvalidStream(EvStereoError):
    """An event stream violates a structural invariant.

    Carries the offending ``StreamViolation`` in ``violation`` when the
    check came from :func:`evstereo.events.validate_stream`.
    """

    def __init__(self, message, violation=None):
        super().__init__(message)
        self.violation = violation


class UnorderedInput(InvalidStream):
    """Event timestamps regress, or equal-time events break canonical order."""


class HeaderMismatch(EvStereoError):
    """Two streams that must share geometry have different headers."""


class CoordinateOverflow(EvStereoError):
    """Event coordinates do not fit the wire word layout."""


class TimestampOverflow(EvStereoError):
    """Timestamp does not fit the 32-bit runtime window."""


class PayloadOverflow(EvStereoError):
    """Wire payload outside signed 32-bit range."""


class OutOfOrderEvent(EvStereoError):
    """An event older than the aggregator's current time was pushed."""


class CoordinateOutOfBounds(EvStereoError):
    """Pixel coordinates outside the configured frame."""


class DimensionMismatch(EvStereoError):
    """Frame shapes disagree with each other or with the stream header."""


class NonPositiveDepth(EvStereoError):
    """Scene object depth must be strictly positive."""


class NonPositiveDimension(EvStereoError):
    """Width, height or timing parameter must be strictly positive."""


class NonPositiveInput(EvStereoError):
    """A physical quantity that must be positive (or nonnegative) is not."""


class ZeroDuration(EvStereoError):
    """A measured wall time of zero cannot produce a rate."""


class MissingGroundTruth(EvStereoError):
    """No ground-truth record joins to a disparity event."""


class EquivalenceViolation(EvStereoError):
    """Two execution variants produced different output bytes."""

    def __init__(self, message, variant=None, record_index=None):
        super().__init__(message)
        self.variant = variant
        self.record_index = record_index


class ChannelClosed(EvStereoError):
    """A pipeline stage terminated without the protocol sentinel."""


class BadMagic(EvStereoError):
    """File does not start with the expected magic bytes."""


class UnsupportedVersion(EvStereoError):
    """File format version not understood by this reader."""


class TruncatedRecord(EvStereoError):
    """File payload length is not a whole number of records."""


class ConfigError(EvStereoError):
    """Malformed configuration text or invalid configuration value."""
