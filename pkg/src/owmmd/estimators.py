"""Squared-MMD estimators: V-statistic, U-statistic, optimally weighted.

The squared MMD between the empirical simulator measure and the data is

    MMD^2 = sum_ij w_i w_j k(y_i, y_j)
            - (2/n) sum_i sum_j w_j k(x_i, y_j)
            + (1/n^2) sum_ij k(x_i, x_j),

with w = 1/m giving the V-statistic. The optimal weights minimize the
worst-case bound MMD_c(U, sum_i w_i delta_{u_i}) over the base space and
solve the kernel system c(U,U) w = z(U), where z is the closed-form mean
embedding of the base measure (Bayesian-quadrature weights).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .embeddings import (
    BaseMeasure,
    GaussianDiag,
    UniformUnitCube,
    double_embed,
    embed,
    CLOSED_FORM,
    QUADRATURE,
)
from .errors import ArgumentError, NumericalConditioningError
from .kernels import KernelSpec, gram
from .sampling import base_point_set
from .simulators import SimulatorSpec

# Jitter escalation for the weight solve, as fractions of mean(diag C).
JITTER_INITIAL = 1e-8
JITTER_MAX = 1e-2
JITTER_FACTOR = 10.0


@dataclass(frozen=True)
class WeightedSample:
    """Simulator outputs paired with (possibly non-uniform) weights."""

    base_points: np.ndarray  # (m, s)
    outputs: np.ndarray  # (m, d)
    weights: np.ndarray  # (m,)

    def __post_init__(self):
        bp = np.atleast_2d(np.asarray(self.base_points, dtype=float))
        out = np.atleast_2d(np.asarray(self.outputs, dtype=float))
        w = np.asarray(self.weights, dtype=float).ravel()
        if bp.shape[0] != out.shape[0] or bp.shape[0] != w.shape[0]:
            raise ArgumentError("base_points, outputs and weights must share length")
        if not np.isfinite(w).all():
            raise ArgumentError("weights must be finite")
        object.__setattr__(self, "base_points", bp)
        object.__setattr__(self, "outputs", out)
        object.__setattr__(self, "weights", w)

    @classmethod
    def simulate(
        cls, sim: SimulatorSpec, theta, U: np.ndarray, weights: np.ndarray
    ) -> "WeightedSample":
        """Build a sample whose outputs are, by construction, the
        generator applied row-wise to the base points."""
        U = np.atleast_2d(np.asarray(U, dtype=float))
        return cls(U, sim(theta, U), weights)

    @classmethod
    def uniform(cls, sim: SimulatorSpec, theta, U: np.ndarray) -> "WeightedSample":
        U = np.atleast_2d(np.asarray(U, dtype=float))
        m = U.shape[0]
        return cls.simulate(sim, theta, U, np.full(m, 1.0 / m))


def mmd_from_squared(mmd2: float) -> float:
    """MMD from squared MMD, clamping small negative float error to 0."""
    return math.sqrt(max(mmd2, 0.0))


def mmd2_vstat(k: KernelSpec, Y: np.ndarray, X: np.ndarray) -> float:
    """Biased (plug-in) V-statistic of MMD^2(P^m, Q^n); nonnegative up to
    float round-off."""
    Kyy = gram(k, Y, Y)
    Kxy = gram(k, X, Y)
    Kxx = gram(k, X, X)
    return float(Kyy.mean() - 2.0 * Kxy.mean() + Kxx.mean())


def mmd2_ustat(k: KernelSpec, Y: np.ndarray, X: np.ndarray) -> float:
    """Unbiased U-statistic: diagonal terms excluded from both
    within-sample sums. May be negative."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    X = np.atleast_2d(np.asarray(X, dtype=float))
    m, n = Y.shape[0], X.shape[0]
    if m < 2 or n < 2:
        raise ArgumentError("U-statistic needs at least two points per sample")
    Kyy = gram(k, Y, Y)
    Kxy = gram(k, X, Y)
    Kxx = gram(k, X, X)
    yy = (Kyy.sum() - np.trace(Kyy)) / (m * (m - 1))
    xx = (Kxx.sum() - np.trace(Kxx)) / (n * (n - 1))
    return float(yy - 2.0 * Kxy.mean() + xx)


def mmd2_weighted(k: KernelSpec, ws: WeightedSample, X: np.ndarray) -> float:
    """Weighted squared-MMD estimate; reduces to the V-statistic at
    uniform weights."""
    w = ws.weights
    Kyy = gram(k, ws.outputs, ws.outputs)
    Kxy = gram(k, X, ws.outputs)
    Kxx = gram(k, X, X)
    return float(w @ Kyy @ w - 2.0 * (Kxy.mean(axis=0) @ w) + Kxx.mean())


@dataclass(frozen=True)
class WeightSolve:
    """Result of the regularized kernel-system solve for optimal weights."""

    weights: np.ndarray
    jitter: float
    embedding: np.ndarray  # z(U)


def solve_weights(c: KernelSpec, U: np.ndarray, base: BaseMeasure) -> WeightSolve:
    """Solve (C + lambda I) w = z for the optimal weights.

    C = c(U, U), z_i = closed-form embedding of the base measure at u_i.
    The jitter lambda starts at 1e-8 * mean(diag C) and is multiplied by
    10 on each Cholesky failure, up to 1e-2 * mean(diag C); beyond that a
    :class:`NumericalConditioningError` carrying the final lambda is
    raised.
    """
    U = np.atleast_2d(np.asarray(U, dtype=float))
    c = c.resolve(U)
    C = gram(c, U, U)
    z = np.atleast_1d(embed(c, base, U))
    scale = float(np.mean(np.diag(C)))
    lam = JITTER_INITIAL * scale
    lam_max = JITTER_MAX * scale
    eye = np.eye(U.shape[0])
    while True:
        try:
            cf = cho_factor(C + lam * eye, lower=True)
            w = cho_solve(cf, z)
            if np.isfinite(w).all():
                return WeightSolve(w, lam, z)
        except np.linalg.LinAlgError:
            pass
        lam *= JITTER_FACTOR
        if lam > lam_max:
            raise NumericalConditioningError(
                f"weight solve failed up to jitter {lam / JITTER_FACTOR:.3e}",
                jitter=lam / JITTER_FACTOR,
            )


def optimal_weights(c: KernelSpec, U: np.ndarray, base: BaseMeasure) -> np.ndarray:
    """Optimal weights w* ~= c(U,U)^{-1} z(U); see :func:`solve_weights`."""
    return solve_weights(c, U, base).weights


def mmd_c_objective(
    c: KernelSpec, base: BaseMeasure, U: np.ndarray, w: np.ndarray
) -> float:
    """MMD^2_c(U-measure, sum_i w_i delta_{u_i}): the quadratic form the
    optimal weights minimize.

    Equals ``double_embed - 2 w.z + w' C w``; for an empty weight vector
    this is just the double integral.
    """
    U = np.atleast_2d(np.asarray(U, dtype=float))
    w = np.asarray(w, dtype=float).ravel()
    if c.family == "se" and isinstance(base, GaussianDiag):
        d2 = double_embed(c, base, CLOSED_FORM)
    else:
        d2 = double_embed(c, base, QUADRATURE)
    if w.size == 0:
        return float(d2)
    z = np.atleast_1d(embed(c, base, U))
    C = gram(c, U, U)
    return float(d2 - 2.0 * (w @ z) + w @ C @ w)


def ow_estimate(
    k: KernelSpec,
    c: KernelSpec,
    sim: SimulatorSpec,
    theta,
    m: int,
    point_kind: str,
    seed: int,
    X: np.ndarray,
) -> float:
    """Full optimally-weighted pipeline for MMD^2(P_theta^{m,w}, Q^n).

    Generates base points, solves for the optimal weights (the base-space
    lengthscale defaults to the median heuristic on the points
    themselves), runs the generator, and evaluates the weighted estimate.
    Deterministic given ``seed``.
    """
    ps = base_point_set(sim.base, m, point_kind, seed)
    sol = solve_weights(c, ps.points, sim.base)
    ws = WeightedSample.simulate(sim, theta, ps.points, sol.weights)
    k = k.resolve(np.atleast_2d(np.asarray(X, dtype=float)))
    return mmd2_weighted(k, ws, X)


def vstat_estimate(
    k: KernelSpec,
    sim: SimulatorSpec,
    theta,
    m: int,
    point_kind: str,
    seed: int,
    X: np.ndarray,
) -> float:
    """Equally-weighted counterpart of :func:`ow_estimate` on the same
    point pipeline."""
    ps = base_point_set(sim.base, m, point_kind, seed)
    Y = sim(theta, ps.points)
    k = k.resolve(np.atleast_2d(np.asarray(X, dtype=float)))
    return mmd2_vstat(k, Y, X)


def model_embedding_1d(
    k: KernelSpec, sim: SimulatorSpec, theta, nodes: int = 301
):
    """Quadrature representation of the model's kernel mean embedding for
    one-dimensional base spaces.

    Returns ``(points, weights)`` such that
    ``mu(x) ~= sum_q weights_q k(points_q, x)`` and the model double
    integral is ``weights' k(points, points) weights``. Gauss-Hermite for
    a Gaussian base, Gauss-Legendre on [0, 1] for the uniform cube.
    """
    if sim.base_dim != 1:
        raise ArgumentError("quadrature model embedding requires a 1-D base space")
    if isinstance(sim.base, GaussianDiag):
        t, wq = np.polynomial.hermite_e.hermegauss(nodes)
        t = sim.base.mean[0] + math.sqrt(sim.base.var[0]) * t
        wq = wq / wq.sum()
    elif isinstance(sim.base, UniformUnitCube):
        t, wq = np.polynomial.legendre.leggauss(nodes)
        t = 0.5 * (t + 1.0)
        wq = 0.5 * wq
    else:
        raise ArgumentError(f"unknown base measure: {sim.base!r}")
    pts = sim(np.asarray(theta, dtype=float), t[:, None])
    return pts, wq


def mmd2_vs_model(
    k: KernelSpec,
    sim: SimulatorSpec,
    theta,
    Y: np.ndarray,
    weights: np.ndarray | None = None,
    nodes: int = 301,
) -> float:
    """MMD^2 between a weighted sample and the model distribution itself,
    via the quadrature embedding (1-D base spaces only).

    This is the simulation-side approximation error, free of any
    observed-sample noise; uniform weights are used when ``weights`` is
    None.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    m = Y.shape[0]
    w = np.full(m, 1.0 / m) if weights is None else np.asarray(weights, dtype=float)
    pts, wq = model_embedding_1d(k, sim, theta, nodes)
    Kyy = gram(k, Y, Y)
    mu = wq @ gram(k, pts, Y)
    t1 = float(wq @ gram(k, pts, pts) @ wq)
    return float(w @ Kyy @ w - 2.0 * (mu @ w) + t1)


def estimate_with_kind(
    kind: str,
    k: KernelSpec,
    c: KernelSpec | None,
    sim: SimulatorSpec,
    theta,
    m: int,
    point_kind: str,
    seed: int,
    X: np.ndarray,
) -> float:
    """Run one named estimator (vstat, ustat or ow) through the shared
    point pipeline."""
    if kind == "ow":
        if c is None:
            raise ArgumentError("the optimally-weighted estimator needs a base kernel")
        return ow_estimate(k, c, sim, theta, m, point_kind, seed, X)
    ps = base_point_set(sim.base, m, point_kind, seed)
    Y = sim(theta, ps.points)
    k = k.resolve(np.atleast_2d(np.asarray(X, dtype=float)))
    if kind == "vstat":
        return mmd2_vstat(k, Y, X)
    if kind == "ustat":
        return mmd2_ustat(k, Y, X)
    raise ArgumentError(f"unknown estimator kind: {kind!r}")
