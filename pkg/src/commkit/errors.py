"""Exception hierarchy shared across the toolkit.

Exit-code mapping used by the CLI: UsageError -> 1, DataError -> 2,
ConvergenceError (under --strict) -> 3.
"""


class CommkitError(Exception):
    """Base class for all toolkit errors."""


class DataError(CommkitError):
    """Malformed or inconsistent input data (files, matrices, partitions)."""


class ModelError(CommkitError):
    """Null model incompatible with the graph it is applied to."""


class SignedInputError(ModelError):
    """Operation that requires nonnegative weights received a signed graph."""


class StaleStateError(CommkitError):
    """Optimizer working state does not match the graph it is used with."""


class GenerationError(CommkitError):
    """Benchmark generator could not realize the requested parameters."""


class ConvergenceError(CommkitError):
    """Iterative procedure failed to converge within its iteration budget."""
