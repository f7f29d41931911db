"""Exception hierarchy.

Every error carries a short machine-readable ``category`` that the CLI
reports on failure.
"""


class StellarError(Exception):
    category = "stellar"


class MalformedCellError(StellarError, ValueError):
    category = "malformed-cell"


class CellIndexError(StellarError, IndexError):
    category = "index"


class DimensionError(StellarError, ValueError):
    category = "dimension"


class ParameterError(StellarError, ValueError):
    category = "parameter"


class OutOfDomainError(StellarError, ValueError):
    category = "out-of-domain"


class CorruptionError(StellarError, ValueError):
    category = "corruption"


class UsageError(StellarError, ValueError):
    category = "usage"


class CapacityError(StellarError, RuntimeError):
    category = "capacity"


class PseudoManifoldError(StellarError, ValueError):
    category = "pseudo-manifold"


class NonManifoldEdgeError(StellarError, ValueError):
    category = "non-manifold-edge"


class OrientationError(StellarError, ValueError):
    category = "orientation"


class EmptyComplexError(StellarError, ValueError):
    category = "empty-complex"


class FormatError(StellarError, ValueError):
    category = "format"


class ParseError(FormatError):
    category = "parse"

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class LeafKernelError(StellarError, RuntimeError):
    """A per-leaf kernel failed; ``leaf_id`` names the block it ran on."""

    category = "kernel"

    def __init__(self, leaf_id, cause):
        super().__init__(f"kernel failed on leaf {leaf_id}: {cause!r}")
        self.leaf_id = leaf_id
        self.cause = cause


class UnsupportedCellError(ParseError):
    category = "unsupported-cell"
