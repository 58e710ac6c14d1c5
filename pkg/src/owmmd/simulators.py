"""Benchmark generative models as pure maps (theta, u) -> x.

Every simulator is a :class:`SimulatorSpec`: a deterministic generator
together with its base measure, base dimension s and data dimension d.
Sampling the model means drawing base points (iid or RQMC, see
:mod:`owmmd.sampling`) and pushing them through the generator, so the
same draws can back equally-weighted and optimally-weighted estimates.

Models and their (s, d): g-and-k (1, 1) and its multivariate extension
(d, d); two moons (2, 2); bivariate beta (5, 2); MA(2) (12, 10); M/G/1
queue (10, 5); stochastic Lotka-Volterra (600, 2).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import gammaincinv, ndtri

from .embeddings import BaseMeasure, GaussianDiag, UniformUnitCube
from .errors import ArgumentError, SimulationDivergedError
from .sampling import CDF_CLAMP


@dataclass(frozen=True)
class SimulatorSpec:
    """A generator contract (theta, u) -> x with its base measure."""

    name: str
    base: BaseMeasure
    data_dim: int
    theta_dim: int
    theta_default: tuple[float, ...]
    generate: Callable[[np.ndarray, np.ndarray], np.ndarray]

    @property
    def base_dim(self) -> int:
        return self.base.dim

    def __call__(self, theta, U: np.ndarray) -> np.ndarray:
        """Apply the generator to an (m, s) array of base points."""
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.theta_dim,):
            raise ArgumentError(
                f"{self.name}: expected {self.theta_dim} parameters, got shape {theta.shape}"
            )
        U = np.asarray(U, dtype=float)
        if U.ndim == 1:
            U = U[:, None]
        if U.shape[1] != self.base_dim:
            raise ArgumentError(
                f"{self.name}: base points have dim {U.shape[1]}, expected {self.base_dim}"
            )
        out = self.generate(theta, U)
        return np.asarray(out, dtype=float).reshape(U.shape[0], self.data_dim)


def _gandk_transform(theta, z):
    a, b, g, k = theta[0], theta[1], theta[2], theta[3]
    if b <= 0:
        raise ArgumentError("g-and-k scale parameter must be positive")
    if k <= -0.5:
        raise ArgumentError("g-and-k kurtosis parameter must exceed -0.5")
    skew = 1.0 + 0.8 * (1.0 - np.exp(-g * z)) / (1.0 + np.exp(-g * z))
    return a + b * skew * (1.0 + z * z) ** k * z


@lru_cache(maxsize=32)
def _toeplitz_sqrt(d: int, rho: float) -> np.ndarray:
    """Symmetric PSD square root of the tridiagonal Toeplitz matrix with
    unit diagonal and off-diagonal rho."""
    S = np.eye(d) + rho * (np.eye(d, k=1) + np.eye(d, k=-1))
    vals, vecs = np.linalg.eigh(S)
    if vals.min() <= 0:
        raise ArgumentError(
            f"correlation {rho} makes the g-and-k covariance non-PSD for d={d}"
        )
    return (vecs * np.sqrt(vals)) @ vecs.T


def gandk_univariate() -> SimulatorSpec:
    """Univariate g-and-k quantile distribution, theta = (A, B, g, k)."""

    def gen(theta, U):
        return _gandk_transform(theta, U[:, 0])[:, None]

    return SimulatorSpec(
        name="gandk",
        base=GaussianDiag.standard(1),
        data_dim=1,
        theta_dim=4,
        theta_default=(3.0, 1.0, 0.1, 0.1),
        generate=gen,
    )


def gandk_multivariate(d: int = 5) -> SimulatorSpec:
    """Multivariate g-and-k, theta = (A, B, g, k, rho), s = d.

    z = Sigma^{1/2} u with Sigma the tridiagonal Toeplitz correlation
    (unit diagonal, rho adjacent), then the univariate g-and-k transform
    elementwise.
    """
    if d < 2:
        raise ArgumentError("multivariate g-and-k needs d >= 2")

    def gen(theta, U):
        root = _toeplitz_sqrt(d, float(theta[4]))
        z = U @ root.T
        return _gandk_transform(theta, z)

    return SimulatorSpec(
        name=f"gandk_mv{d}",
        base=GaussianDiag.standard(d),
        data_dim=d,
        theta_dim=5,
        theta_default=(3.0, 1.0, 0.1, 0.1, 0.1),
        generate=gen,
    )


def two_moons() -> SimulatorSpec:
    """Two-moons benchmark: crescent from angle/radius noise, then a
    parameter-dependent translation. theta = (theta1, theta2)."""

    def gen(theta, U):
        a = np.pi * (U[:, 0] - 0.5)
        r = 0.1 + 0.01 * ndtri(np.clip(U[:, 1], CDF_CLAMP, 1.0 - CDF_CLAMP))
        p = np.stack([r * np.cos(a) + 0.25, r * np.sin(a)], axis=1)
        shift = np.array(
            [-abs(theta[0] + theta[1]), -theta[0] + theta[1]]
        ) / np.sqrt(2.0)
        return p + shift

    return SimulatorSpec(
        name="two_moons",
        base=UniformUnitCube(2),
        data_dim=2,
        theta_dim=2,
        theta_default=(0.0, 0.0),
        generate=gen,
    )


def bivariate_beta() -> SimulatorSpec:
    """Five-parameter bivariate beta built from gamma-variate ratios.

    v_i = gamma quantile of u_i with shape theta_i (rate 1),
    x1 = (v1+v3)/(v1+v3+v4+v5), x2 = (v2+v4)/(v2+v4+v3+v5).
    """

    def gen(theta, U):
        if np.any(theta <= 0):
            raise ArgumentError("bivariate beta shape parameters must be positive")
        u = np.clip(U, CDF_CLAMP, 1.0 - CDF_CLAMP)
        v = gammaincinv(theta[None, :], u)
        x1 = (v[:, 0] + v[:, 2]) / (v[:, 0] + v[:, 2] + v[:, 3] + v[:, 4])
        x2 = (v[:, 1] + v[:, 3]) / (v[:, 1] + v[:, 3] + v[:, 2] + v[:, 4])
        return np.stack([x1, x2], axis=1)

    return SimulatorSpec(
        name="bivariate_beta",
        base=UniformUnitCube(5),
        data_dim=2,
        theta_dim=5,
        theta_default=(1.0, 1.0, 1.0, 1.0, 1.0),
        generate=gen,
    )


def ma2() -> SimulatorSpec:
    """MA(2) time series: x_t = u_{t+2} + theta1 u_{t+1} + theta2 u_t,
    t = 1..10, from 12 standard normal innovations."""

    def gen(theta, U):
        return U[:, 2:12] + theta[0] * U[:, 1:11] + theta[1] * U[:, 0:10]

    return SimulatorSpec(
        name="ma2",
        base=GaussianDiag.standard(12),
        data_dim=10,
        theta_dim=2,
        theta_default=(0.6, 0.2),
        generate=gen,
    )


def mg1() -> SimulatorSpec:
    """M/G/1 queue: 5 inter-departure times from 10 uniforms.

    Service times s_i = theta1 + (theta2-theta1) u_i, inter-arrivals
    a_i = -log(1-u_{5+i})/theta3, then the Lindley recursion
    d_i = s_i + max(0, A_i - D_{i-1}) with A the arrival and D the
    departure clocks. The max makes the generator discontinuous.
    """

    def gen(theta, U):
        t1, t2, t3 = theta
        if not (0 < t1 < t2):
            raise ArgumentError("M/G/1 needs 0 < theta1 < theta2")
        if t3 <= 0:
            raise ArgumentError("M/G/1 arrival rate theta3 must be positive")
        service = t1 + (t2 - t1) * U[:, :5]
        inter = -np.log1p(-np.clip(U[:, 5:], 0.0, 1.0 - CDF_CLAMP)) / t3
        arrival = np.cumsum(inter, axis=1)
        out = np.empty_like(service)
        departed = np.zeros(U.shape[0])
        for i in range(5):
            d = service[:, i] + np.maximum(0.0, arrival[:, i] - departed)
            out[:, i] = d
            departed = departed + d
        return out

    return SimulatorSpec(
        name="mg1",
        base=UniformUnitCube(10),
        data_dim=5,
        theta_dim=3,
        theta_default=(1.0, 5.0, 0.2),
        generate=gen,
    )


def lotka_volterra(
    steps: int = 300,
    dt: float = 0.05,
    sigma_x: float = 0.1,
    sigma_y: float = 0.1,
    init: tuple[float, float] = (100.0, 100.0),
) -> SimulatorSpec:
    """Stochastic Lotka-Volterra via Euler-Maruyama, returning the final
    (prey, predator) state.

    dX = (theta1 X - theta2 X Y) dt + sigma_x X dW1,
    dY = (theta2 X Y - theta3 Y) dt + sigma_y Y dW2,
    over ``steps`` steps of size ``dt``; the base point supplies the two
    Brownian increments per step (s = 2 * steps). Populations are clamped
    at zero (absorbing).
    """

    def gen(theta, U):
        if np.any(theta <= 0):
            raise ArgumentError("Lotka-Volterra rates must be positive")
        t1, t2, t3 = theta
        x = np.full(U.shape[0], init[0])
        y = np.full(U.shape[0], init[1])
        sq = np.sqrt(dt)
        for step in range(steps):
            dw1 = sq * U[:, 2 * step]
            dw2 = sq * U[:, 2 * step + 1]
            xn = x + (t1 * x - t2 * x * y) * dt + sigma_x * x * dw1
            yn = y + (t2 * x * y - t3 * y) * dt + sigma_y * y * dw2
            x = np.maximum(xn, 0.0)
            y = np.maximum(yn, 0.0)
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise SimulationDivergedError("Lotka-Volterra state became non-finite")
        return np.stack([x, y], axis=1)

    return SimulatorSpec(
        name="lotka_volterra",
        base=GaussianDiag.standard(2 * steps),
        data_dim=2,
        theta_dim=3,
        theta_default=(5.0, 0.025, 6.0),
        generate=gen,
    )


def uniform_reparam(sim: SimulatorSpec) -> SimulatorSpec:
    """Reparameterize a Gaussian-base simulator onto the unit cube.

    Returns a spec with uniform base and generator G(theta, Phi^{-1}(u))
    coordinate-wise (u clamped away from {0,1}); the natural uniform-base
    simulators are returned unchanged.
    """
    if isinstance(sim.base, UniformUnitCube):
        return sim
    base = sim.base
    mean = np.asarray(base.mean)
    std = np.sqrt(np.asarray(base.var))

    def gen(theta, U):
        z = mean + std * ndtri(np.clip(U, CDF_CLAMP, 1.0 - CDF_CLAMP))
        return sim.generate(theta, z)

    return replace(
        sim,
        name=sim.name + "_uniform",
        base=UniformUnitCube(base.dim),
        generate=gen,
    )


def fix_params(sim: SimulatorSpec, fixed: dict[int, float]) -> SimulatorSpec:
    """Restrict a simulator to a subset of free parameters.

    ``fixed`` maps full-theta indices to pinned values; the returned
    spec's theta vector covers the remaining indices in order.
    """
    fixed = {int(i): float(v) for i, v in fixed.items()}
    free = [i for i in range(sim.theta_dim) if i not in fixed]
    if not free:
        raise ArgumentError("at least one parameter must remain free")

    def expand(theta_free):
        full = np.empty(sim.theta_dim)
        for i, v in fixed.items():
            full[i] = v
        full[free] = theta_free
        return full

    def gen(theta, U):
        return sim.generate(expand(theta), U)

    return replace(
        sim,
        name=sim.name + "_partial",
        theta_dim=len(free),
        theta_default=tuple(sim.theta_default[i] for i in free),
        generate=gen,
    )


def get_simulator(name: str, **kwargs) -> SimulatorSpec:
    """Look up a simulator by registry name.

    Known names: gandk, gandk_mv (kwarg d), two_moons, bivariate_beta,
    ma2, mg1, lotka_volterra.
    """
    registry = {
        "gandk": gandk_univariate,
        "gandk_mv": gandk_multivariate,
        "two_moons": two_moons,
        "bivariate_beta": bivariate_beta,
        "ma2": ma2,
        "mg1": mg1,
        "lotka_volterra": lotka_volterra,
    }
    if name not in registry:
        raise ArgumentError(
            f"unknown simulator {name!r}; available: {sorted(registry)}"
        )
    return registry[name](**kwargs)
