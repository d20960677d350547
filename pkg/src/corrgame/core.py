"""Shared domain types for correlation-game networks.

Conventions used throughout the package:

* data matrices are dense float64 arrays with rows = channels and
  columns = timesteps, so a stimulus is a column vector;
* "correlation" always means a second-moment matrix such as ``X @ U.T / T``,
  never a mean-subtracted covariance;
* feedforward weights ``W`` are (n_outputs, n_inputs), lateral weights ``L``
  are (n_outputs, n_outputs) and symmetric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

VARIANTS = ("rectified-bounded", "rectified-analog", "sigmoid")

#: Default floor for diagonal lateral weights.  The activity dynamics divides
#: by L_ii, so the diagonal must stay strictly positive for stability.
DEFAULT_EPS_L = 1e-3


class CorrGameError(Exception):
    """Base class for errors raised by this package."""


class InvariantViolation(CorrGameError):
    """A domain type failed one of its structural invariants."""


def _as_matrix(a, name):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise InvariantViolation(f"{name} must be 2-D, got shape {a.shape}")
    return a


@dataclass
class HyperParams:
    """Learning-rule and objective parameters.

    ``p`` and ``q`` set the target output correlations: the pairwise
    second-moment ceiling is ``p**2`` and the per-neuron power target is
    ``q**2``, so saturated output pairs have cosine similarity ``(p/q)**2``.
    ``kappa`` is the stiffness of the competition for the per-neuron synaptic
    resource ``rho``; ``omega`` bounds individual synapses in the bounded
    variant and ``gamma`` is the weight decay of the analog variant.
    Defaults follow the reference sparse-activity experiments.
    """

    p: float = 0.03
    q: float = 0.09
    kappa: float = 1.0
    rho: float = 1.0
    omega: float = 0.1
    gamma: float = 0.1
    eta_w: float = 0.001
    eta_l: float = 0.1
    eta_theta: float | None = None
    eps_l: float = DEFAULT_EPS_L
    dynamics_tol: float = 1e-6
    max_sweeps: int = 100
    variant: str = "rectified-bounded"

    def __post_init__(self):
        if not (self.p >= 0.0):
            raise InvariantViolation(f"p must be >= 0, got {self.p}")
        if not (self.q > 0.0):
            raise InvariantViolation(f"q must be > 0, got {self.q}")
        if self.p > self.q:
            raise InvariantViolation(
                f"need p <= q for a cosine-similarity target in [0, 1]; "
                f"got p={self.p}, q={self.q}"
            )
        if self.kappa < 0.0:
            raise InvariantViolation(f"kappa must be >= 0, got {self.kappa}")
        if not (self.rho > 0.0):
            raise InvariantViolation(f"rho must be > 0, got {self.rho}")
        if not (self.omega > 0.0):
            raise InvariantViolation(f"omega must be > 0, got {self.omega}")
        if self.gamma < 0.0:
            raise InvariantViolation(f"gamma must be >= 0, got {self.gamma}")
        for name in ("eta_w", "eta_l"):
            if not (getattr(self, name) > 0.0):
                raise InvariantViolation(f"{name} must be > 0")
        if self.eta_theta is not None and not (self.eta_theta > 0.0):
            raise InvariantViolation("eta_theta must be > 0 when given")
        if not (self.eps_l > 0.0):
            raise InvariantViolation(f"eps_l must be > 0, got {self.eps_l}")
        if not (self.dynamics_tol > 0.0):
            raise InvariantViolation("dynamics_tol must be > 0")
        if self.max_sweeps < 1:
            raise InvariantViolation("max_sweeps must be >= 1")
        if self.variant not in VARIANTS:
            raise InvariantViolation(
                f"unknown variant {self.variant!r}; expected one of {VARIANTS}"
            )

    @property
    def eta_theta_effective(self) -> float:
        """Threshold learning rate; defaults to ``eta_l``."""
        return self.eta_l if self.eta_theta is None else self.eta_theta


@dataclass
class Dataset:
    """A nonnegative input stream: rows are channels, columns are timesteps."""

    values: np.ndarray

    def __post_init__(self):
        self.values = _as_matrix(self.values, "Dataset.values")
        if self.values.size and self.values.min() < 0.0:
            a, t = np.unravel_index(int(np.argmin(self.values)), self.values.shape)
            raise InvariantViolation(
                f"dataset must be nonnegative; values[{a},{t}] = {self.values[a, t]}"
            )
        if self.values.shape[0] < 1 or self.values.shape[1] < 1:
            raise InvariantViolation(f"dataset must be nonempty, got {self.values.shape}")

    @property
    def n_inputs(self) -> int:
        return self.values.shape[0]

    @property
    def n_steps(self) -> int:
        return self.values.shape[1]

    def column(self, t: int) -> np.ndarray:
        """Stimulus vector at timestep ``t`` (a view, do not mutate)."""
        return self.values[:, t]


@dataclass
class NetworkState:
    """Mutable network parameters: feedforward ``W``, lateral ``L``,
    sigmoid thresholds ``theta``, and the training step counter."""

    W: np.ndarray
    L: np.ndarray
    theta: np.ndarray
    step: int = 0

    def __post_init__(self):
        self.W = _as_matrix(self.W, "W")
        self.L = _as_matrix(self.L, "L")
        self.theta = np.asarray(self.theta, dtype=np.float64)

    @property
    def n_outputs(self) -> int:
        return self.W.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.W.shape[1]

    def validate(self, params: HyperParams) -> None:
        """Check every structural invariant; raise InvariantViolation on failure.

        ``L`` must be bitwise symmetric and nonnegative with diagonal at or
        above ``params.eps_l``; ``W`` must respect the bounds of the active
        variant ([0, omega] bounded, [0, inf) otherwise).
        """
        n = self.W.shape[0]
        if self.L.shape != (n, n):
            raise InvariantViolation(
                f"L shape {self.L.shape} does not match n_outputs={n}"
            )
        if self.theta.shape != (n,):
            raise InvariantViolation(
                f"theta shape {self.theta.shape} does not match n_outputs={n}"
            )
        if self.step < 0:
            raise InvariantViolation(f"step must be >= 0, got {self.step}")
        if self.W.min(initial=0.0) < 0.0:
            raise InvariantViolation("W has negative entries")
        if params.variant == "rectified-bounded" and self.W.size:
            if self.W.max() > params.omega:
                raise InvariantViolation(
                    f"W exceeds omega={params.omega}: max entry {self.W.max()}"
                )
        if not np.array_equal(self.L, self.L.T):
            raise InvariantViolation("L is not exactly symmetric")
        if self.L.min() < 0.0:
            raise InvariantViolation("L has negative entries")
        diag = np.diag(self.L)
        if diag.min() < params.eps_l:
            i = int(np.argmin(diag))
            raise InvariantViolation(
                f"L[{i},{i}] = {diag[i]} is below the floor eps_l={params.eps_l}"
            )

    def copy(self) -> "NetworkState":
        return NetworkState(self.W.copy(), self.L.copy(), self.theta.copy(), self.step)


@dataclass
class ActivityRecord:
    """Converged (or capped) output activity for one stimulus.

    ``residual`` is the largest per-element change during the final sweep.
    ``objective_series`` holds the inner-objective value after each sweep
    when the solver was asked to track it.
    """

    x: np.ndarray
    sweeps_used: int
    residual: float
    converged: bool
    objective_series: np.ndarray | None = None


@dataclass
class CorrelationPair:
    """Second-moment matrices ``X U^T / T`` and ``X X^T / T``."""

    output_input: np.ndarray
    output_output: np.ndarray


@dataclass
class UpdateReport:
    """Bookkeeping from one plasticity update: how many entries hit a bound
    and how large the applied changes were."""

    n_clamped_low: int = 0
    n_clamped_high: int = 0
    n_L_rectified: int = 0
    max_delta_W: float = 0.0
    max_delta_L: float = 0.0


def build_constraint_matrix(params: HyperParams, n_outputs: int) -> np.ndarray:
    """Target ceiling on output second moments: ``q**2`` on the diagonal,
    ``p**2`` off it."""
    if n_outputs < 1:
        raise InvariantViolation(f"n_outputs must be >= 1, got {n_outputs}")
    D = np.full((n_outputs, n_outputs), params.p ** 2, dtype=np.float64)
    np.fill_diagonal(D, params.q ** 2)
    return D


def correlations(X, U) -> CorrelationPair:
    """Second-moment correlation matrices of activities ``X`` against inputs.

    ``X`` is (n_outputs, T); ``U`` may be a Dataset or a raw (n_inputs, T)
    array.  No mean subtraction is performed.
    """
    X = _as_matrix(X, "X")
    Uv = U.values if isinstance(U, Dataset) else _as_matrix(U, "U")
    if X.shape[1] != Uv.shape[1]:
        raise InvariantViolation(
            f"X has {X.shape[1]} timesteps but U has {Uv.shape[1]}"
        )
    T = X.shape[1]
    return CorrelationPair(
        output_input=X @ Uv.T / T,
        output_output=X @ X.T / T,
    )
