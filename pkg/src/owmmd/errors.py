"""Exception types raised across the package."""


class OwmmdError(Exception):
    """Base class for all package-specific errors."""


class ArgumentError(OwmmdError, ValueError):
    """Invalid argument: shape mismatch, non-finite input, bad range."""


class DegenerateDataError(OwmmdError):
    """Data carries no usable signal (e.g. all points identical)."""


class UnsupportedEmbeddingError(OwmmdError):
    """No closed-form mean embedding for this kernel/base-measure pair.

    Use the Monte Carlo oracle (``embeddings.embed_mc_oracle``) or a
    quadrature method instead.
    """


class NumericalConditioningError(OwmmdError):
    """Kernel-system solve failed even at the maximum allowed jitter."""

    def __init__(self, message: str, jitter: float):
        super().__init__(message)
        self.jitter = jitter


class SimulationDivergedError(OwmmdError):
    """A simulator produced a non-finite state."""


class OptimizationFailedError(OwmmdError):
    """All optimizer restarts diverged; carries the optimization trace."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class TestInvalidError(OwmmdError):
    """Too many bootstrap iterations failed for the test to be meaningful."""


class ConfigError(OwmmdError):
    """Invalid experiment configuration (unknown key, bad value, parse error)."""
