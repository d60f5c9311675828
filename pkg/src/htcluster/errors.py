"""Exception types shared across the toolkit.

Every error carries a short machine-parseable ``category`` used by the
command line interface for its single-line error reports.
"""


class HtclusterError(Exception):
    """Base class for all toolkit errors."""

    category = "error"


class InputError(HtclusterError):
    """Malformed or inconsistent input data."""

    category = "input"


class DegenerateInputError(HtclusterError):
    """Input is structurally valid but degenerate for the requested operation."""

    category = "degenerate"


class ConvergenceError(HtclusterError):
    """An iterative solver failed to reach its tolerance within the iteration cap."""

    category = "convergence"


class ConfigError(HtclusterError):
    """Invalid run configuration (bad flag combinations, missing files)."""

    category = "config"
