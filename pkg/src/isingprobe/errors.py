"""Exception types and per-node status flags shared across the package."""

from enum import Enum


class ConfigError(ValueError):
    """Invalid physical or run configuration."""


class DimensionExceeded(ConfigError):
    """Exact-diagonalization request beyond the supported chain length."""


class NumericalFailure(RuntimeError):
    """An internal numerical invariant broke (indicates a bug, not bad input)."""


class InsufficientPeaks(RuntimeError):
    """Fewer local maxima survived filtering than were requested."""


class DegenerateGroundState(RuntimeError):
    """The chain ground level is degenerate; the echo is convention-dependent."""


class Flag(str, Enum):
    """Status attached to a single evaluated (lambda, t) node.

    echo_vanished: a per-mode echo factor hit zero, so L = 0 and the
        logarithmic derivative is undefined; downstream QFI is reported
        as 0 under the L -> 0 limit policy.
    boundary_singularity: L is at a boundary (0 or 1) while dL/dlambda is
        not negligible, so the dephasing QFI formula diverges.
    """

    OK = "ok"
    ECHO_VANISHED = "echo_vanished"
    BOUNDARY_SINGULARITY = "boundary_singularity"
