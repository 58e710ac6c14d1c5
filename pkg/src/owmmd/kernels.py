"""Reproducing kernels: evaluation, Gram matrices, median heuristic.

Two families are supported, both radial with amplitude ``eta`` and
lengthscale ``l``:

* squared-exponential: ``eta * exp(-r^2 / (2 l^2))``
* Matern of half-integer order ``nu`` in {1/2, 3/2, 5/2} in the standard
  polynomial-times-exponential closed form.

The squared-exponential uses the ``exp(-r^2/(2 l^2))`` convention
throughout (kernel on data space and kernel on base space alike), so the
closed-form mean embeddings in :mod:`owmmd.embeddings` apply verbatim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ArgumentError, DegenerateDataError

SQUARED_EXPONENTIAL = "se"
MATERN = "matern"

_MATERN_ORDERS = (0.5, 1.5, 2.5)

# Exact all-pairs median becomes memory-heavy past a few thousand points;
# above this the heuristic deterministically subsamples with a fixed stride.
_MEDIAN_EXACT_LIMIT = 4000


@dataclass(frozen=True)
class KernelSpec:
    """Parameters of a radial reproducing kernel.

    Parameters
    ----------
    family : str
        ``"se"`` (squared-exponential) or ``"matern"``.
    lengthscale : float or None
        Positive lengthscale in data units. ``None`` means "resolve with
        the median heuristic once data is available"; evaluation with an
        unresolved lengthscale raises.
    amplitude : float
        Positive amplitude ``eta``, the kernel value at zero distance.
    order : float or None
        Matern smoothness ``nu``; must be one of 1/2, 3/2, 5/2 (the
        closed-form orders). Ignored for the squared-exponential.
    """

    family: str
    lengthscale: float | None = None
    amplitude: float = 1.0
    order: float | None = None

    def __post_init__(self):
        if self.family not in (SQUARED_EXPONENTIAL, MATERN):
            raise ArgumentError(f"unknown kernel family: {self.family!r}")
        if self.lengthscale is not None and not (
            math.isfinite(self.lengthscale) and self.lengthscale > 0
        ):
            raise ArgumentError(f"lengthscale must be positive, got {self.lengthscale}")
        if not (math.isfinite(self.amplitude) and self.amplitude > 0):
            raise ArgumentError(f"amplitude must be positive, got {self.amplitude}")
        if self.family == MATERN and self.order not in _MATERN_ORDERS:
            raise ArgumentError(
                f"Matern order must be one of {_MATERN_ORDERS}, got {self.order}"
            )

    def with_lengthscale(self, lengthscale: float) -> "KernelSpec":
        return KernelSpec(self.family, lengthscale, self.amplitude, self.order)

    def resolve(self, data: np.ndarray) -> "KernelSpec":
        """Return a concrete spec, filling the lengthscale from ``data``
        by the median heuristic if it is unset."""
        if self.lengthscale is not None:
            return self
        return self.with_lengthscale(median_heuristic(data))


def _required_lengthscale(spec: KernelSpec) -> float:
    if spec.lengthscale is None:
        raise ArgumentError(
            "kernel lengthscale unresolved; call KernelSpec.resolve(data) first"
        )
    return spec.lengthscale


def _rho_from_sqdist(spec: KernelSpec, sq: np.ndarray) -> np.ndarray:
    """Kernel profile applied to squared euclidean distances."""
    l = _required_lengthscale(spec)
    if spec.family == SQUARED_EXPONENTIAL:
        return spec.amplitude * np.exp(-sq / (2.0 * l * l))
    r = np.sqrt(np.maximum(sq, 0.0)) / l
    if spec.order == 0.5:
        return spec.amplitude * np.exp(-r)
    if spec.order == 1.5:
        a = math.sqrt(3.0) * r
        return spec.amplitude * (1.0 + a) * np.exp(-a)
    a = math.sqrt(5.0) * r
    return spec.amplitude * (1.0 + a + a * a / 3.0) * np.exp(-a)


def kernel_eval(spec: KernelSpec, x: np.ndarray, y: np.ndarray) -> float:
    """Evaluate the kernel at a single pair of points.

    Raises :class:`ArgumentError` on dimension mismatch or non-finite input.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise ArgumentError(f"point shapes differ: {x.shape} vs {y.shape}")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ArgumentError("non-finite input point")
    d = x - y
    return float(_rho_from_sqdist(spec, np.dot(d, d)))


def gram(spec: KernelSpec, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Gram matrix with entries ``k(X[i], Y[j])``.

    ``X`` and ``Y`` are (m, dim) and (n, dim); 1-D inputs are treated as
    single-feature columns.
    """
    X = _as_points(X)
    Y = _as_points(Y)
    if X.shape[1] != Y.shape[1]:
        raise ArgumentError(
            f"column counts differ: {X.shape[1]} vs {Y.shape[1]}"
        )
    if not (np.isfinite(X).all() and np.isfinite(Y).all()):
        raise ArgumentError("non-finite input points")
    return _rho_from_sqdist(spec, cdist(X, Y, "sqeuclidean"))


def _as_points(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ArgumentError(f"expected a 2-D point array, got shape {X.shape}")
    return X


def median_heuristic(X: np.ndarray) -> float:
    """Lengthscale from the median pairwise squared distance.

    Returns ``sqrt(median(||x_i - x_j||^2, i < j) / 2)``, which makes the
    squared-exponential kernel equal ``exp(-1/2) * amplitude`` at the
    median distance. Deterministic; datasets larger than a few thousand
    points are thinned with a fixed stride before the exact all-pairs
    median is taken.
    """
    X = _as_points(X)
    n = X.shape[0]
    if n < 2:
        raise ArgumentError("median heuristic needs at least two points")
    if n > _MEDIAN_EXACT_LIMIT:
        stride = -(-n // _MEDIAN_EXACT_LIMIT)
        X = X[::stride]
        n = X.shape[0]
    sq = cdist(X, X, "sqeuclidean")
    iu = np.triu_indices(n, k=1)
    med = float(np.median(sq[iu]))
    if med <= 0.0:
        raise DegenerateDataError("all points identical: median distance is zero")
    return math.sqrt(med / 2.0)
