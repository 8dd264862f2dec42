"""Exception types shared across the toolkit."""


class BitextmineError(Exception):
    """Base class for all toolkit errors."""


class MissingMetadata(BitextmineError):
    """Document lacks the date/pair_key required by the bucketing mode."""


class ZeroVector(BitextmineError):
    """An all-zero vector cannot be normalized."""


class DimensionMismatch(BitextmineError):
    """Vector dimensions disagree."""


class FormatError(BitextmineError):
    """A binary file has a bad magic, version or structure."""


class TruncatedFile(BitextmineError):
    """A binary file ends before the data its header promises."""


class ProviderUnavailable(BitextmineError):
    """The remote embedding provider could not be reached."""


class PartialResponse(BitextmineError):
    """The remote provider returned fewer vectors than texts sent."""


class InsufficientData(BitextmineError):
    """Not enough training vectors for the requested number of clusters."""


class DimensionNotDivisible(BitextmineError):
    """Vector dimension is not divisible by the subspace count."""


class DuplicateId(BitextmineError):
    """A sentence id was indexed twice."""


class EmptyIndex(BitextmineError):
    """Search requested against an index or matrix with no vectors."""


class LengthMismatch(BitextmineError):
    """Paired series have different lengths."""


class DegenerateInput(BitextmineError):
    """A statistic is undefined for the given input (e.g. constant series)."""


class DetectorUnavailable(BitextmineError):
    """No language detector is available and the filter is in hard mode."""


class ConfigError(BitextmineError):
    """Run configuration failed validation."""


class StageFailure(BitextmineError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"stage '{stage}' failed: {message}")
        self.stage = stage
