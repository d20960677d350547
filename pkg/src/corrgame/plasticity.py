"""Synaptic update rules.

All updates mutate the NetworkState in place, exactly one stimulus at a time,
and return an UpdateReport with clamp/rectification counts.  The intended
per-stimulus order is: solve the activity dynamics, then ``update_W_*``, then
``update_L_offdiag``, then ``update_L_diag`` (or ``update_theta`` for the
sigmoid variant).
"""

from __future__ import annotations

import numpy as np

from .core import CorrGameError, HyperParams, NetworkState, UpdateReport


class VariantMismatch(CorrGameError):
    """An update rule was called under a variant that does not use it."""


def update_W_bounded(state: NetworkState, x, u, params: HyperParams) -> UpdateReport:
    """Hebbian step with competition for the row resource, clamped to [0, omega].

    Each entry moves by ``eta_w * (x_i u_a - kappa * (row_sum_i - rho))``:
    coactivity strengthens a synapse while growth elsewhere in the same row
    weakens it, so convergent synapses compete for a total strength ``rho``.
    """
    x = np.asarray(x, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    W = state.W
    row_gap = W.sum(axis=1) - params.rho
    proposed = W + params.eta_w * (np.outer(x, u) - params.kappa * row_gap[:, None])
    low = proposed < 0.0
    high = proposed > params.omega
    clipped = np.clip(proposed, 0.0, params.omega)
    report = UpdateReport(
        n_clamped_low=int(low.sum()),
        n_clamped_high=int(high.sum()),
        max_delta_W=float(np.abs(clipped - W).max(initial=0.0)),
    )
    W[...] = clipped
    return report


def update_W_analog(state: NetworkState, x, u, params: HyperParams) -> UpdateReport:
    """Hebbian step with weight decay and row competition, rectified at zero.

    Like the bounded rule but with ``gamma * W_ia`` decay in place of the hard
    per-synapse cap; surviving strengths stay graded.
    """
    x = np.asarray(x, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    W = state.W
    row_gap = W.sum(axis=1) - params.rho
    proposed = W + params.eta_w * (
        np.outer(x, u) - params.gamma * W - params.kappa * row_gap[:, None]
    )
    low = proposed < 0.0
    clipped = np.maximum(proposed, 0.0)
    report = UpdateReport(
        n_clamped_low=int(low.sum()),
        max_delta_W=float(np.abs(clipped - W).max(initial=0.0)),
    )
    W[...] = clipped
    return report


def update_L_offdiag(state: NetworkState, x, params: HyperParams) -> UpdateReport:
    """Anti-Hebbian update of the lateral connections.

    ``L_ij`` moves by ``eta_l * (x_i x_j - p**2)`` for i != j, then rectifies
    at zero.  The update is symmetric by construction (IEEE multiplication is
    commutative), so a bitwise-symmetric ``L`` stays bitwise symmetric.
    """
    x = np.asarray(x, dtype=np.float64)
    L = state.L
    delta = params.eta_l * (np.outer(x, x) - params.p ** 2)
    np.fill_diagonal(delta, 0.0)
    proposed = L + delta
    off_mask = ~np.eye(L.shape[0], dtype=bool)
    rectified = off_mask & (proposed < 0.0)
    clipped = np.maximum(proposed, 0.0)
    report = UpdateReport(
        n_L_rectified=int(rectified.sum()),
        max_delta_L=float(np.abs(clipped - L).max(initial=0.0)),
    )
    L[...] = clipped
    return report


def update_L_diag(state: NetworkState, x, params: HyperParams) -> UpdateReport:
    """Homeostatic update of the lateral diagonal.

    ``L_ii`` moves by ``eta_l * (x_i**2 - q**2)``, holding each neuron's
    mean-square activity near ``q**2``, then floors at ``eps_l`` so the
    dynamics never divides by a vanishing gain.
    """
    x = np.asarray(x, dtype=np.float64)
    L = state.L
    diag = np.diag(L).copy()
    new_diag = np.maximum(diag + params.eta_l * (x ** 2 - params.q ** 2), params.eps_l)
    np.fill_diagonal(L, new_diag)
    return UpdateReport(max_delta_L=float(np.abs(new_diag - diag).max(initial=0.0)))


def update_theta(state: NetworkState, x, params: HyperParams) -> UpdateReport:
    """Threshold homeostasis for the sigmoid variant: ``theta_i`` moves by
    ``eta_theta * (x_i - p)``, holding each neuron's mean activity near ``p``.
    Unbounded in sign."""
    if params.variant != "sigmoid":
        raise VariantMismatch(
            f"update_theta applies to the sigmoid variant, not {params.variant!r}"
        )
    x = np.asarray(x, dtype=np.float64)
    state.theta += params.eta_theta_effective * (x - params.p)
    return UpdateReport()


def apply_plasticity(state: NetworkState, x, u, params: HyperParams) -> list[UpdateReport]:
    """One full post-convergence plasticity pass in the canonical order."""
    reports = []
    if params.variant == "rectified-analog":
        reports.append(update_W_analog(state, x, u, params))
    else:
        reports.append(update_W_bounded(state, x, u, params))
    reports.append(update_L_offdiag(state, x, params))
    if params.variant == "sigmoid":
        reports.append(update_theta(state, x, params))
    else:
        reports.append(update_L_diag(state, x, params))
    state.step += 1
    return reports
