"""Kernel mean embeddings of simple base measures.

For the squared-exponential kernel ``c(u, v) = eta * exp(-|u-v|^2/(2 l^2))``
(a product over coordinates in s dimensions) the mean embedding
``z(u) = integral of c(u, v) dU(v)`` has closed form against

* the uniform distribution on the unit cube:
  ``z(u) = eta * prod_j sqrt(2 pi) l [Phi((1-u_j)/l) - Phi((0-u_j)/l)]``
* a diagonal Gaussian N(mu, diag(sig2)):
  ``z(u) = eta * prod_j sqrt(l^2/(l^2+sig2_j))
              * exp(-(u_j-mu_j)^2 / (2 (l^2+sig2_j)))``

and the double integral ``integral integral c dU dU`` against the diagonal
Gaussian is ``eta * prod_j sqrt(l^2/(l^2 + 2 sig2_j))``.

Matern base-space kernels have no closed form here; use the Monte Carlo
oracle or quadrature, which this module also provides as independent
checks of the closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .errors import ArgumentError, UnsupportedEmbeddingError
from .kernels import MATERN, SQUARED_EXPONENTIAL, KernelSpec, gram

CLOSED_FORM = "closed_form"
QUADRATURE = "quadrature"

# Tensor quadrature defaults: nodes per dimension, and the largest base
# dimension for which a full tensor grid is still reasonable.
UNIFORM_QUAD_NODES = 2000
GAUSSIAN_QUAD_NODES = 200
MAX_QUAD_DIM = 3


@dataclass(frozen=True)
class UniformUnitCube:
    """Uniform distribution on [0, 1]^dim."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ArgumentError("base dimension must be >= 1")


@dataclass(frozen=True)
class GaussianDiag:
    """Gaussian with diagonal covariance on R^dim."""

    mean: tuple[float, ...]
    var: tuple[float, ...]

    def __post_init__(self):
        mean = tuple(float(v) for v in np.atleast_1d(self.mean))
        var = tuple(float(v) for v in np.atleast_1d(self.var))
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "var", var)
        if len(mean) != len(var) or len(mean) < 1:
            raise ArgumentError("mean and var must have equal positive length")
        if any(v <= 0 or not np.isfinite(v) for v in var):
            raise ArgumentError("all variances must be positive and finite")

    @property
    def dim(self) -> int:
        return len(self.mean)

    @classmethod
    def standard(cls, dim: int) -> "GaussianDiag":
        return cls((0.0,) * dim, (1.0,) * dim)


BaseMeasure = UniformUnitCube | GaussianDiag


def _check_se(c: KernelSpec, what: str):
    if c.family != SQUARED_EXPONENTIAL:
        raise UnsupportedEmbeddingError(
            f"{what} has a closed form only for the squared-exponential kernel; "
            "use embed_mc_oracle or quadrature for Matern base kernels"
        )


def _points(U: np.ndarray, dim: int) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    squeeze = U.ndim == 1
    U = np.atleast_2d(U)
    if U.shape[1] != dim:
        raise ArgumentError(f"points have dimension {U.shape[1]}, base has {dim}")
    return U, squeeze


def embed_se_uniform(c: KernelSpec, U: np.ndarray, dim: int | None = None):
    """Closed-form embedding of Uniform([0,1]^s) at point(s) ``U``.

    ``U`` may be a single s-vector or an (m, s) array; returns a float or
    an (m,) array accordingly.
    """
    _check_se(c, "the uniform embedding")
    if dim is None:
        U_arr = np.atleast_2d(np.asarray(U, dtype=float))
        dim = U_arr.shape[1]
    U, squeeze = _points(U, dim)
    l = c.lengthscale
    if l is None:
        raise ArgumentError("kernel lengthscale unresolved")
    per_dim = np.sqrt(2.0 * np.pi) * l * (ndtr((1.0 - U) / l) - ndtr((0.0 - U) / l))
    z = c.amplitude * np.prod(per_dim, axis=1)
    return float(z[0]) if squeeze else z


def embed_se_gaussian(c: KernelSpec, U: np.ndarray, base: GaussianDiag):
    """Closed-form embedding of a diagonal Gaussian at point(s) ``U``."""
    _check_se(c, "the Gaussian embedding")
    U, squeeze = _points(U, base.dim)
    l = c.lengthscale
    if l is None:
        raise ArgumentError("kernel lengthscale unresolved")
    mu = np.asarray(base.mean)
    t = l * l + np.asarray(base.var)
    per_dim = np.sqrt(l * l / t) * np.exp(-((U - mu) ** 2) / (2.0 * t))
    z = c.amplitude * np.prod(per_dim, axis=1)
    return float(z[0]) if squeeze else z


def embed(c: KernelSpec, base: BaseMeasure, U: np.ndarray):
    """Dispatch to the closed-form embedding for ``base``.

    Raises :class:`UnsupportedEmbeddingError` for Matern kernels.
    """
    if isinstance(base, UniformUnitCube):
        return embed_se_uniform(c, U, base.dim)
    if isinstance(base, GaussianDiag):
        return embed_se_gaussian(c, U, base)
    raise ArgumentError(f"unknown base measure: {base!r}")


def sample_base(base: BaseMeasure, m: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``m`` iid points from the base measure."""
    if isinstance(base, UniformUnitCube):
        return rng.random((m, base.dim))
    if isinstance(base, GaussianDiag):
        std = np.sqrt(np.asarray(base.var))
        return np.asarray(base.mean) + std * rng.standard_normal((m, base.dim))
    raise ArgumentError(f"unknown base measure: {base!r}")


def embed_mc_oracle(
    c: KernelSpec, base: BaseMeasure, u: np.ndarray, n_samples: int, seed: int
) -> float:
    """Monte Carlo estimate of the embedding at a single point ``u``.

    Works for any kernel family; serves as the independent oracle for the
    closed forms and as the fallback for Matern base kernels. Owns its
    generator: deterministic given ``seed``.
    """
    if n_samples < 1:
        raise ArgumentError("n_samples must be >= 1")
    u = np.atleast_1d(np.asarray(u, dtype=float))
    rng = np.random.default_rng(seed)
    V = sample_base(base, n_samples, rng)
    return float(gram(c, u[None, :], V).mean())


def _gauss_hermite(n: int):
    """Nodes/weights for integration against the standard normal density."""
    t, w = np.polynomial.hermite_e.hermegauss(n)
    return t, w / w.sum()


def double_embed(
    c: KernelSpec,
    base: BaseMeasure,
    method: str = CLOSED_FORM,
    nodes: int | None = None,
) -> float:
    """The double integral ``integral integral c(u, v) dU(u) dU(v)``.

    ``method="closed_form"`` is available for the squared-exponential
    kernel with a diagonal-Gaussian base. ``method="quadrature"`` uses a
    tensor-product trapezoid rule (uniform base) or Gauss-Hermite rule
    (Gaussian base) with ``nodes`` points per dimension; for the
    squared-exponential the product structure over coordinates is exact,
    so any dimension is allowed, while Matern kernels are limited to
    ``dim <= 3``.
    """
    if method == CLOSED_FORM:
        if not (c.family == SQUARED_EXPONENTIAL and isinstance(base, GaussianDiag)):
            raise UnsupportedEmbeddingError(
                "closed-form double integral needs an SE kernel and Gaussian base"
            )
        l = c.lengthscale
        t = l * l + 2.0 * np.asarray(base.var)
        return float(c.amplitude * np.prod(np.sqrt(l * l / t)))
    if method != QUADRATURE:
        raise ArgumentError(f"unknown method: {method!r}")

    if isinstance(base, UniformUnitCube):
        n = nodes or UNIFORM_QUAD_NODES
        pts = np.linspace(0.0, 1.0, n)
        w = np.full(n, 1.0 / (n - 1))
        w[0] *= 0.5
        w[-1] *= 0.5
    elif isinstance(base, GaussianDiag):
        n = nodes or GAUSSIAN_QUAD_NODES
        pts, w = _gauss_hermite(n)
    else:
        raise ArgumentError(f"unknown base measure: {base!r}")

    if c.family == SQUARED_EXPONENTIAL:
        # Product kernel x product measure: the s-dim double integral is a
        # product of per-coordinate 1-D double integrals.
        c1 = KernelSpec(SQUARED_EXPONENTIAL, c.lengthscale, 1.0)
        total = 1.0
        for j in range(base.dim):
            if isinstance(base, GaussianDiag):
                x = base.mean[j] + np.sqrt(base.var[j]) * pts
            else:
                x = pts
            G = gram(c1, x[:, None], x[:, None])
            total *= float(w @ G @ w)
        return c.amplitude * total

    if base.dim > MAX_QUAD_DIM:
        raise UnsupportedEmbeddingError(
            f"tensor quadrature for Matern kernels is limited to dim <= {MAX_QUAD_DIM}; "
            "use embed_mc_oracle"
        )
    axes = []
    for j in range(base.dim):
        if isinstance(base, GaussianDiag):
            axes.append(base.mean[j] + np.sqrt(base.var[j]) * pts)
        else:
            axes.append(pts)
    grids = np.meshgrid(*axes, indexing="ij")
    P = np.stack([g.ravel() for g in grids], axis=1)
    wt = np.ones(1)
    for _ in range(base.dim):
        wt = np.multiply.outer(wt, w).ravel()
    G = gram(c, P, P)
    return float(wt @ G @ wt)


def embed_quadrature(
    c: KernelSpec, base: BaseMeasure, u: np.ndarray, nodes: int | None = None
) -> float:
    """Quadrature oracle for the single-point embedding ``z(u)``.

    Trapezoid rule per dimension (uniform base) or Gauss-Hermite
    (Gaussian base); exact product structure for the squared-exponential,
    tensor grid (``dim <= 3``) for Matern.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if isinstance(base, UniformUnitCube):
        n = nodes or UNIFORM_QUAD_NODES
        pts = np.linspace(0.0, 1.0, n)
        w = np.full(n, 1.0 / (n - 1))
        w[0] *= 0.5
        w[-1] *= 0.5
    else:
        n = nodes or GAUSSIAN_QUAD_NODES
        pts, w = _gauss_hermite(n)

    if c.family == SQUARED_EXPONENTIAL:
        c1 = KernelSpec(SQUARED_EXPONENTIAL, c.lengthscale, 1.0)
        total = 1.0
        for j in range(base.dim):
            if isinstance(base, GaussianDiag):
                x = base.mean[j] + np.sqrt(base.var[j]) * pts
            else:
                x = pts
            col = gram(c1, np.array([[u[j]]]), x[:, None])[0]
            total *= float(col @ w)
        return c.amplitude * total

    if base.dim > MAX_QUAD_DIM:
        raise UnsupportedEmbeddingError(
            f"tensor quadrature for Matern kernels is limited to dim <= {MAX_QUAD_DIM}"
        )
    axes = []
    for j in range(base.dim):
        if isinstance(base, GaussianDiag):
            axes.append(base.mean[j] + np.sqrt(base.var[j]) * pts)
        else:
            axes.append(pts)
    grids = np.meshgrid(*axes, indexing="ij")
    P = np.stack([g.ravel() for g in grids], axis=1)
    wt = np.ones(1)
    for _ in range(base.dim):
        wt = np.multiply.outer(wt, w).ravel()
    return float(gram(c, u[None, :], P)[0] @ wt)
