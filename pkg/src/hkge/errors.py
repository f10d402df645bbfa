"""Error taxonomy shared across the toolkit.

Every failure the CLI maps to an exit code derives from HkgeError; library
callers can catch the base class, the CLI switches on the subclass.
"""


class HkgeError(Exception):
    pass


class DimensionMismatchError(HkgeError):
    """Operands disagree in block length or algebra kind."""


class IndefiniteNormError(HkgeError):
    """Dihedron norm radicand went negative at some coordinate index."""

    def __init__(self, index: int, radicand: float):
        self.index = index
        self.radicand = radicand
        super().__init__(
            f"indefinite norm: radicand {radicand:.6g} < 0 at coordinate index {index}"
        )


class DegenerateVectorError(HkgeError):
    """Euclidean 4-norm below the normalization threshold at some index."""


class ParseError(HkgeError):
    """Malformed input file; message carries path and line number."""


class UnknownEntityError(HkgeError):
    """Symbol outside the training vocabulary."""


class DuplicateKeyError(HkgeError):
    pass


class WrongSourceError(HkgeError):
    """Embedding file header declares a different source than expected."""


class ConfigError(HkgeError):
    pass


class CannotSampleError(HkgeError):
    pass


class DivergedError(HkgeError):
    pass


class CheckpointMismatchError(HkgeError):
    """Checkpoint vocabulary does not match the loaded dataset."""


class TooManyPlayersError(ConfigError):
    """Exact Shapley enumeration is capped at 20 players; a config error."""
