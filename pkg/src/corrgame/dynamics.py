"""Per-stimulus activity solvers.

The inner problem for one stimulus is a maximization over the nonnegative
output vector ``x``; cyclic coordinate ascent with rectification solves it
for the rectified variants, and a squashing fixed-point iteration solves the
sigmoid variant.  Both sweep the neurons in place, so the hot loops are
compiled with numba.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from numba import njit

from .core import (
    DEFAULT_EPS_L,
    ActivityRecord,
    CorrGameError,
    HyperParams,
    NetworkState,
)

ORDERS = ("cyclic", "random")


class NonPositiveDiagonal(CorrGameError):
    """The lateral matrix has a diagonal entry below the configured floor."""


class CopositivityCheck(NamedTuple):
    ok: bool
    witness: tuple[int, int] | None


@dataclass
class DynamicsConfig:
    """Convergence controls for the activity solvers.

    ``order`` selects the neuron visiting schedule: ``cyclic`` sweeps in index
    order, ``random`` draws a fresh permutation per sweep from ``seed``.
    """

    tol: float = 1e-6
    max_sweeps: int = 100
    order: str = "cyclic"
    seed: int | None = None
    eps_diag: float = DEFAULT_EPS_L

    def __post_init__(self):
        if not (self.tol > 0.0):
            raise ValueError(f"tol must be > 0, got {self.tol}")
        if self.max_sweeps < 1:
            raise ValueError(f"max_sweeps must be >= 1, got {self.max_sweeps}")
        if self.order not in ORDERS:
            raise ValueError(f"order must be one of {ORDERS}, got {self.order!r}")

    @classmethod
    def from_hyperparams(cls, params: HyperParams, order: str = "cyclic",
                         seed: int | None = None) -> "DynamicsConfig":
        return cls(tol=params.dynamics_tol, max_sweeps=params.max_sweeps,
                   order=order, seed=seed, eps_diag=params.eps_l)


def _sweep_orders(n: int, cfg: DynamicsConfig) -> np.ndarray:
    """Visiting schedule as an integer array; row ``s % nrows`` is sweep s."""
    if cfg.order == "cyclic":
        return np.arange(n, dtype=np.int64)[None, :]
    rng = np.random.default_rng(cfg.seed)
    return np.stack([rng.permutation(n) for _ in range(cfg.max_sweeps)]).astype(np.int64)


@njit(cache=True)
def _rectified_sweeps(drive, L, orders, tol, max_sweeps):
    n = drive.size
    x = np.zeros(n)
    obj = np.empty(max_sweeps)
    sweeps = 0
    delta = 0.0
    converged = False
    nrows = orders.shape[0]
    for s in range(max_sweeps):
        delta = 0.0
        for oi in range(n):
            i = orders[s % nrows, oi]
            lat = 0.0
            for j in range(n):
                lat += L[i, j] * x[j]
            lat -= L[i, i] * x[i]
            xi = (drive[i] - lat) / L[i, i]
            if xi < 0.0:
                xi = 0.0
            d = abs(xi - x[i])
            if d > delta:
                delta = d
            x[i] = xi
        # frozen-x diagnostics: true fixed-point residual and inner objective
        res = 0.0
        g = 0.0
        for i in range(n):
            lx = 0.0
            for j in range(n):
                lx += L[i, j] * x[j]
            g += x[i] * (drive[i] - 0.5 * lx)
            xi = (drive[i] - (lx - L[i, i] * x[i])) / L[i, i]
            if xi < 0.0:
                xi = 0.0
            r = abs(x[i] - xi)
            if r > res:
                res = r
        obj[s] = g
        sweeps = s + 1
        if delta <= tol and res <= tol:
            converged = True
            break
    return x, sweeps, delta, converged, obj


@njit(cache=True)
def _logistic(z):
    if z >= 0.0:
        return 1.0 / (1.0 + np.exp(-z))
    e = np.exp(z)
    return e / (1.0 + e)


@njit(cache=True)
def _entropy_term(x):
    # x*log(x) + (1-x)*log(1-x), continuous limit 0 at the endpoints
    g = 0.0
    if x > 0.0:
        g += x * np.log(x)
    if x < 1.0:
        g += (1.0 - x) * np.log(1.0 - x)
    return g


@njit(cache=True)
def _sigmoid_sweeps(drive, L, theta, orders, tol, max_sweeps):
    n = drive.size
    x = np.zeros(n)
    obj = np.empty(max_sweeps)
    sweeps = 0
    delta = 0.0
    converged = False
    nrows = orders.shape[0]
    for s in range(max_sweeps):
        delta = 0.0
        for oi in range(n):
            i = orders[s % nrows, oi]
            lat = 0.0
            for j in range(n):
                if j != i:
                    lat += L[i, j] * x[j]
            xi = _logistic(drive[i] - lat - theta[i])
            d = abs(xi - x[i])
            if d > delta:
                delta = d
            x[i] = xi
        res = 0.0
        g = 0.0
        for i in range(n):
            lat = 0.0
            for j in range(n):
                if j != i:
                    lat += L[i, j] * x[j]
            # each unordered pair counted once
            g += (drive[i] - theta[i]) * x[i] - 0.5 * lat * x[i] - _entropy_term(x[i])
            xi = _logistic(drive[i] - lat - theta[i])
            r = abs(x[i] - xi)
            if r > res:
                res = r
        obj[s] = g
        sweeps = s + 1
        if delta <= tol and res <= tol:
            converged = True
            break
    return x, sweeps, delta, converged, obj


def _check_diagonal(L: np.ndarray, eps: float) -> None:
    diag = np.diag(L)
    if diag.min() < eps:
        i = int(np.argmin(diag))
        raise NonPositiveDiagonal(
            f"L[{i},{i}] = {diag[i]} is below the floor {eps}; "
            "the rectified dynamics divides by the diagonal"
        )


def solve_rectified(u, state: NetworkState, cfg: DynamicsConfig,
                    track_objective: bool = False) -> ActivityRecord:
    """Coordinate ascent for the rectified activity dynamics.

    Starting from zero activity, each visit sets
    ``x_i = max(0, (W u)_i - sum_{j != i} L_ij x_j) / L_ii``, which is the
    exact maximizer of the inner objective over that coordinate.  A solve is
    converged when both the largest per-element change in a sweep and the
    frozen fixed-point residual drop to ``cfg.tol``; otherwise the record is
    flagged and carries the last iterate.

    Raises NonPositiveDiagonal if ``L`` has a diagonal entry below
    ``cfg.eps_diag``.
    """
    u = np.asarray(u, dtype=np.float64)
    _check_diagonal(state.L, cfg.eps_diag)
    drive = state.W @ u
    orders = _sweep_orders(state.n_outputs, cfg)
    x, sweeps, delta, converged, obj = _rectified_sweeps(
        drive, state.L, orders, cfg.tol, cfg.max_sweeps
    )
    return ActivityRecord(
        x=x, sweeps_used=int(sweeps), residual=float(delta), converged=bool(converged),
        objective_series=obj[:sweeps].copy() if track_objective else None,
    )


def solve_sigmoid(u, state: NetworkState, cfg: DynamicsConfig,
                  f: Callable[[float], float] | None = None,
                  track_objective: bool = False) -> ActivityRecord:
    """Fixed-point iteration for the sigmoid activity dynamics.

    Each visit sets ``x_i = f((W u)_i - sum_{j != i} L_ij x_j - theta_i)``.
    ``f`` defaults to the logistic function, for which the sweep is exact
    coordinate ascent on the inner objective with a binary-entropy barrier;
    a custom strictly increasing ``f`` with range (0, 1) falls back to a
    plain Python sweep without objective tracking.
    """
    u = np.asarray(u, dtype=np.float64)
    drive = state.W @ u
    orders = _sweep_orders(state.n_outputs, cfg)
    if f is None:
        x, sweeps, delta, converged, obj = _sigmoid_sweeps(
            drive, state.L, state.theta, orders, cfg.tol, cfg.max_sweeps
        )
        return ActivityRecord(
            x=x, sweeps_used=int(sweeps), residual=float(delta),
            converged=bool(converged),
            objective_series=obj[:sweeps].copy() if track_objective else None,
        )

    n = state.n_outputs
    L, theta = state.L, state.theta
    x = np.zeros(n)
    sweeps = 0
    delta = 0.0
    converged = False
    nrows = orders.shape[0]
    for s in range(cfg.max_sweeps):
        delta = 0.0
        for i in orders[s % nrows]:
            lat = L[i] @ x - L[i, i] * x[i]
            xi = float(f(drive[i] - lat - theta[i]))
            delta = max(delta, abs(xi - x[i]))
            x[i] = xi
        res = 0.0
        for i in range(n):
            lat = L[i] @ x - L[i, i] * x[i]
            res = max(res, abs(x[i] - float(f(drive[i] - lat - theta[i]))))
        sweeps = s + 1
        if delta <= cfg.tol and res <= cfg.tol:
            converged = True
            break
    return ActivityRecord(x=x, sweeps_used=sweeps, residual=float(delta),
                          converged=converged)


def check_copositivity(L, eps_diag: float = DEFAULT_EPS_L) -> CopositivityCheck:
    """Sufficient copositivity test for a symmetric lateral matrix.

    Passes when every diagonal entry is at least ``eps_diag`` and every
    off-diagonal entry is nonnegative, which rules out runaway growth of the
    rectified dynamics.  On failure the witness names the first offending
    entry (diagonal scanned first, then off-diagonal in row-major order).
    """
    L = np.asarray(L, dtype=np.float64)
    n = L.shape[0]
    for i in range(n):
        if L[i, i] < eps_diag:
            return CopositivityCheck(False, (i, i))
    for i in range(n):
        for j in range(n):
            if i != j and L[i, j] < 0.0:
                return CopositivityCheck(False, (i, j))
    return CopositivityCheck(True, None)
