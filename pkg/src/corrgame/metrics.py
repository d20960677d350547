"""Quantities tracked during and after learning: activity density, pairwise
cosine similarity of output histories, synapse survival counts, and the
relation between lateral inhibition and feedforward similarity."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core import NetworkState


class SurvivalCounts(NamedTuple):
    surviving: np.ndarray
    saturated: np.ndarray | None


@dataclass
class MetricsLog:
    """Time series and end-of-run summaries collected by the harness.

    ``density_series`` holds (step, mean density) pairs, one per full
    averaging window.  ``similarity_pairs`` holds (i, j, cosine) rows over
    the trailing similarity window, NaN-free (undefined pairs are omitted).
    ``inhibition_vs_similarity`` holds (i, j, weight cosine, L_ij) rows.
    """

    density_series: list[tuple[int, float]] = field(default_factory=list)
    similarity_pairs: np.ndarray | None = None
    weight_survival: SurvivalCounts | None = None
    inhibition_vs_similarity: np.ndarray | None = None
    nonconvergence_count: int = 0

    def similarity_histogram(self, bins: int = 40) -> tuple[np.ndarray, np.ndarray]:
        """Histogram of pairwise cosine similarities over [0, 1]."""
        values = (self.similarity_pairs[:, 2]
                  if self.similarity_pairs is not None and len(self.similarity_pairs)
                  else np.empty(0))
        return np.histogram(values, bins=bins, range=(0.0, 1.0))


def activity_density(x, zero_tol: float = 0.0) -> float:
    """Fraction of outputs active beyond ``zero_tol``.

    Rectified solves produce exact zeros, so the default threshold is exact;
    sigmoid activities never vanish and are conventionally thresholded at 0.5.
    """
    x = np.asarray(x)
    return float((x > zero_tol).sum() / x.size)


def pairwise_cosine(X) -> np.ndarray:
    """Cosine similarity of output rows over a window, as a symmetric matrix.

    Entry (i, j) is ``<x_i x_j> / sqrt(<x_i^2> <x_j^2>)`` with time averages
    over the window.  Pairs where either row has zero norm are NaN (absent),
    not zero.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    T = X.shape[1]
    second = X @ X.T / T
    power = np.sqrt(np.diag(second))
    with np.errstate(divide="ignore", invalid="ignore"):
        cos = second / np.outer(power, power)
    cos[~np.isfinite(cos)] = np.nan
    return cos


def cosine_pairs(X) -> np.ndarray:
    """Defined unordered pairs of ``pairwise_cosine`` as (i, j, cosine) rows."""
    cos = pairwise_cosine(X)
    n = cos.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    keep = np.isfinite(cos[iu, ju])
    return np.column_stack([iu[keep], ju[keep], cos[iu, ju][keep]])


def weight_survival(W, omega: float | None, survival_tol: float | None = None) -> SurvivalCounts:
    """Per-neuron counts of surviving synapses, and of saturated ones.

    A synapse survives when its strength exceeds ``survival_tol`` (default
    ``1e-6 * omega``); it is saturated when within ``survival_tol`` of the
    bound ``omega``.  Pass ``omega=None`` for the analog variant, where there
    is no bound: saturated counts are then omitted and ``survival_tol`` is
    required.
    """
    W = np.atleast_2d(np.asarray(W, dtype=np.float64))
    if omega is None:
        if survival_tol is None:
            raise ValueError("survival_tol is required when omega is not given")
        return SurvivalCounts((W > survival_tol).sum(axis=1), None)
    if survival_tol is None:
        survival_tol = 1e-6 * omega
    surviving = (W > survival_tol).sum(axis=1)
    saturated = (W >= omega - survival_tol).sum(axis=1)
    return SurvivalCounts(surviving, saturated)


def inhibition_vs_weight_similarity(state: NetworkState) -> np.ndarray:
    """(i, j, cosine of W rows, L_ij) for every unordered output pair.

    Pairs involving a zero-norm weight row are omitted rather than reported
    as zero similarity.
    """
    W, L = state.W, state.L
    norms = np.linalg.norm(W, axis=1)
    n = W.shape[0]
    rows = []
    for i in range(n):
        if norms[i] == 0.0:
            continue
        for j in range(i + 1, n):
            if norms[j] == 0.0:
                continue
            cos = float(W[i] @ W[j] / (norms[i] * norms[j]))
            rows.append((i, j, cos, float(L[i, j])))
    return np.asarray(rows, dtype=np.float64).reshape(-1, 4)
