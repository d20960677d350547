"""Game objective structures: the competition penalty, its convex conjugates,
the payoff function, and the primal objective.

The conjugate of the row penalty is what makes synapse elimination analyzable:
in the stiff-competition limit with per-synapse bound ``omega`` it reduces to
picking the ``rho/omega`` largest correlations at full strength, and with a
quadratic decay ``gamma`` it becomes a soft-thresholding rule whose threshold
is pinned down by a one-dimensional root condition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import (
    CorrGameError,
    CorrelationPair,
    Dataset,
    HyperParams,
    NetworkState,
    build_constraint_matrix,
    correlations,
)
from .dynamics import DynamicsConfig, check_copositivity, solve_rectified


class NonIntegralRatio(CorrGameError):
    """rho/omega must be a positive integer for the saturated conjugate."""


@dataclass
class ConjugateSolution:
    """Maximizer of one row conjugate.

    ``k`` counts the strictly positive (surviving) synapses; ``theta`` is the
    soft threshold of the analog form, None for the saturated top-k form.
    """

    w: np.ndarray
    value: float
    k: int
    theta: float | None = None


class PayoffResult(NamedTuple):
    value: float
    nonconverged: int


class PrimalObjective(NamedTuple):
    value: float
    violations: np.ndarray


def penalty_phi(W, params: HyperParams) -> float:
    """Competition penalty on the feedforward weights.

    ``(kappa/2) * sum_i (row_sum_i - rho)**2``, plus ``(gamma/2) * sum W**2``
    under the analog variant.
    """
    W = np.atleast_2d(np.asarray(W, dtype=np.float64))
    row_gap = W.sum(axis=1) - params.rho
    value = 0.5 * params.kappa * float(row_gap @ row_gap)
    if params.variant == "rectified-analog":
        value += 0.5 * params.gamma * float((W * W).sum())
    return value


def grad_penalty_phi(W, params: HyperParams) -> np.ndarray:
    """Analytic gradient of ``penalty_phi`` with respect to each entry."""
    W = np.atleast_2d(np.asarray(W, dtype=np.float64))
    row_gap = W.sum(axis=1) - params.rho
    g = np.broadcast_to(params.kappa * row_gap[:, None], W.shape).copy()
    if params.variant == "rectified-analog":
        g += params.gamma * W
    return g


def _descending_order(c: np.ndarray) -> np.ndarray:
    # stable: ties keep ascending original index
    return np.argsort(-c, kind="stable")


def conjugate_topk(c, rho: float, omega: float) -> ConjugateSolution:
    """Saturated-competition conjugate of one correlation row.

    In the stiff limit the weight vector lives on the simplex of total
    strength ``rho`` intersected with the box [0, omega]; with
    ``k = rho/omega`` integral the maximum puts strength ``omega`` on the k
    largest entries of ``c`` (ties broken toward lower index) and the value
    is ``omega`` times their sum.
    """
    c = np.asarray(c, dtype=np.float64)
    if c.ndim != 1 or c.size == 0:
        raise ValueError(f"c must be a nonempty vector, got shape {c.shape}")
    ratio = rho / omega
    k = round(ratio)
    if k < 1 or abs(ratio - k) > 1e-9:
        raise NonIntegralRatio(
            f"rho/omega = {ratio} is not a positive integer (within 1e-9)"
        )
    if k > c.size:
        raise NonIntegralRatio(
            f"rho/omega = {k} exceeds the number of inputs {c.size}"
        )
    order = _descending_order(c)
    w = np.zeros_like(c)
    top = np.sort(order[:k])  # ascending-index sum, reproducible under ties
    w[top] = omega
    return ConjugateSolution(w=w, value=float(omega * c[top].sum()), k=int(k))


def _analog_objective(w: np.ndarray, c: np.ndarray, gamma: float, kappa: float,
                      rho: float) -> float:
    return float(c @ w - 0.5 * gamma * (w @ w) - 0.5 * kappa * (w.sum() - rho) ** 2)


def conjugate_analog_kkt(c, gamma: float, kappa: float, rho: float) -> ConjugateSolution:
    """Analog-competition conjugate of one correlation row, solved in closed form.

    Maximizes ``c @ w - (gamma/2)||w||^2 - (kappa/2)(sum w - rho)^2`` over
    ``w >= 0``.  The stationarity conditions collapse to soft thresholding,
    ``gamma * w_a = max(c_a - theta, 0)`` with
    ``theta = kappa * (sum w - rho)``; sorting ``c`` in descending order, the
    survivor count k is the unique one whose threshold
    ``theta_k = (sum of top k entries - rho*gamma) / (k + gamma/kappa)``
    falls strictly below the k-th entry and at or above the (k+1)-th.

    ``kappa == 0`` decouples the coordinates: theta is zero and
    ``w = max(c, 0)/gamma``.
    """
    c = np.asarray(c, dtype=np.float64)
    if c.ndim != 1 or c.size == 0:
        raise ValueError(f"c must be a nonempty vector, got shape {c.shape}")
    if not (gamma > 0.0):
        raise ValueError(f"gamma must be > 0, got {gamma}")
    if kappa < 0.0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    if not (rho > 0.0):
        raise ValueError(f"rho must be > 0, got {rho}")

    if kappa == 0.0:
        w = np.maximum(c, 0.0) / gamma
        return ConjugateSolution(
            w=w, value=_analog_objective(w, c, gamma, kappa, rho),
            k=int((w > 0.0).sum()), theta=0.0,
        )

    n = c.size
    order = _descending_order(c)
    cs = c[order]
    prefix = np.concatenate(([0.0], np.cumsum(cs)))
    valid = []
    for k in range(n + 1):
        theta_k = (prefix[k] - rho * gamma) / (k + gamma / kappa)
        upper_ok = k == 0 or cs[k - 1] > theta_k
        lower_ok = k == n or theta_k >= cs[k]
        if upper_ok and lower_ok:
            valid.append((k, theta_k))
    if len(valid) != 1:
        raise RuntimeError(
            f"KKT survivor count is not unique: candidates {valid} for c={c!r}"
        )
    k, theta = valid[0]
    w = np.maximum(c - theta, 0.0) / gamma
    return ConjugateSolution(
        w=w, value=_analog_objective(w, c, gamma, kappa, rho),
        k=int((w > 0.0).sum()), theta=float(theta),
    )


def elimination_trigger(c, gamma: float, rho: float) -> bool:
    """Whether stiff analog competition eliminates at least one synapse.

    In the stiff limit this happens exactly when ``rho*gamma`` is smaller
    than ``sum(c) - N*min(c)``, i.e. when the per-synapse resource share is
    below the spread between the mean and the weakest correlation.
    """
    c = np.asarray(c, dtype=np.float64)
    if c.size == 0:
        raise ValueError("c must be nonempty")
    return bool(rho * gamma < c.sum() - c.size * c.min())


def payoff(W, L, U, params: HyperParams, cfg: DynamicsConfig | None = None) -> PayoffResult:
    """Game payoff for fixed weights: the inner maximum over activities,
    averaged over the stimulus stream.

    For each dataset column the rectified dynamics solves the inner problem;
    the payoff is the mean of
    ``sum_ia W_ia x_i u_a - Phi(W) - (1/2) sum_ij L_ij (x_i x_j - D_ij)``
    across columns.  Non-convergent solves are counted, not raised.
    """
    W = np.atleast_2d(np.asarray(W, dtype=np.float64))
    L = np.atleast_2d(np.asarray(L, dtype=np.float64))
    Uv = U.values if isinstance(U, Dataset) else np.atleast_2d(np.asarray(U, dtype=np.float64))
    if cfg is None:
        cfg = DynamicsConfig.from_hyperparams(params)
    ok, witness = check_copositivity(L, cfg.eps_diag)
    if not ok:
        raise ValueError(f"L fails the copositivity check at entry {witness}")

    n_out = W.shape[0]
    D = build_constraint_matrix(params, n_out)
    state = NetworkState(W=W, L=L, theta=np.zeros(n_out))
    phi = penalty_phi(W, params)
    T = Uv.shape[1]
    total = 0.0
    nonconverged = 0
    for t in range(T):
        rec = solve_rectified(Uv[:, t], state, cfg)
        if not rec.converged:
            nonconverged += 1
        x = rec.x
        total += float(
            x @ (W @ Uv[:, t]) - phi - 0.5 * (L * (np.outer(x, x) - D)).sum()
        )
    return PayoffResult(value=total / T, nonconverged=nonconverged)


def primal_objective(X, U, params: HyperParams, variant: str | None = None) -> PrimalObjective:
    """Constrained-optimization objective for a candidate activity matrix.

    The value is the conjugate of the output-input correlation matrix, summed
    row-wise with the solver matching ``variant`` (default: the variant in
    ``params``); violations report how far the output second moments exceed
    their ceiling, elementwise, zero when feasible.
    """
    variant = params.variant if variant is None else variant
    pair: CorrelationPair = correlations(X, U)
    C = pair.output_input
    if variant == "rectified-analog":
        value = sum(
            conjugate_analog_kkt(C[i], params.gamma, params.kappa, params.rho).value
            for i in range(C.shape[0])
        )
    else:
        value = sum(
            conjugate_topk(C[i], params.rho, params.omega).value
            for i in range(C.shape[0])
        )
    D = build_constraint_matrix(params, C.shape[0])
    violations = np.maximum(pair.output_output - D, 0.0)
    return PrimalObjective(value=float(value), violations=violations)


def single_neuron_projection_check(U, w, q: float) -> float:
    """Inner maximum for a single output with fixed weights.

    With nonnegative data the optimal activity is proportional to the
    projection ``w . u(t)``, scaled to saturate the power constraint
    ``mean(x**2) <= q**2``; the optimal value is then
    ``q * sqrt(mean((w . u)**2))``.  Computes that closed form, and asserts
    it against the explicitly scaled maximizer.
    """
    Uv = U.values if isinstance(U, Dataset) else np.atleast_2d(np.asarray(U, dtype=np.float64))
    w = np.asarray(w, dtype=np.float64)
    proj = w @ Uv
    ms = float(proj @ proj) / proj.size
    value = q * np.sqrt(ms)
    # independent route: evaluate the objective at the lambda-scaled maximizer
    if ms > 0.0:
        x_opt = (q / np.sqrt(ms)) * proj
        direct = float(x_opt @ proj) / proj.size
        assert abs(direct - value) <= 1e-12 * max(1.0, abs(value)), (direct, value)
    return float(value)
