"""Independent oracles and the self-check suites behind ``corrgame verify``.

Every closed-form solver in :mod:`corrgame.objective` is checked here against
a route that shares none of its code: exhaustive support enumeration for the
saturated conjugate, accelerated projected gradient ascent for the analog
conjugate, central finite differences for the penalty gradient, and a
primal/dual search for weak duality on small instances.  Suites accept the
solver under test as a parameter so a broken solver can be injected by tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable

import numpy as np
from numba import njit

from .core import Dataset, HyperParams, NetworkState, build_constraint_matrix
from .dynamics import DynamicsConfig, solve_rectified
from .objective import (
    ConjugateSolution,
    conjugate_analog_kkt,
    conjugate_topk,
    elimination_trigger,
    grad_penalty_phi,
    payoff,
    penalty_phi,
    primal_objective,
)


@dataclass
class SuiteResult:
    name: str
    passed: bool
    n_cases: int
    worst: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return (f"{status} {self.name}: {self.n_cases} cases, "
                f"worst residual {self.worst:.3e}{extra}")


# ---------------------------------------------------------------------------
# oracles


def enumerate_topk(c, rho: float, omega: float) -> ConjugateSolution:
    """Brute-force saturated conjugate: try every support of size rho/omega.

    Supports are ranked in exact rational arithmetic (float summation would
    erase element differences below the sum's ulp and misreport ties) and
    visited in lexicographic order with only strict improvements kept, which
    reproduces the lowest-index tie-breaking of the closed form.
    """
    c = np.asarray(c, dtype=np.float64)
    k = round(rho / omega)
    exact = [Fraction(v) for v in c]
    best_support = None
    best_value = None
    for support in combinations(range(c.size), k):
        value = sum(exact[a] for a in support)
        if best_value is None or value > best_value:
            best_value = value
            best_support = support
    w = np.zeros_like(c)
    w[list(best_support)] = omega
    # report the value with the same float summation as the closed form
    value = float(omega * c[list(best_support)].sum())
    return ConjugateSolution(w=w, value=value, k=k)


@njit(cache=True)
def _analog_grad_residual(w, c, gamma, kappa, rho):
    # worst first-order violation: |grad| on the support, [grad]+ off it
    s = 0.0
    for a in range(w.size):
        s += w[a]
    lam = kappa * (s - rho)
    res = 0.0
    for a in range(w.size):
        g = c[a] - gamma * w[a] - lam
        if w[a] > 0.0:
            r = abs(g)
        else:
            r = g if g > 0.0 else 0.0
        if r > res:
            res = r
    return res


@njit(cache=True)
def _pg_ascent(c, gamma, kappa, rho, max_iters, grad_tol):
    """Accelerated projected gradient ascent with gradient-based restart.

    Stops when the first-order residual certifies, via gamma-strong
    concavity, that the iterate is within grad_tol/gamma of the maximizer.
    """
    n = c.size
    lip = gamma + kappa * n
    step = 1.0 / lip
    # restarting more often than the condition number allows kills the
    # accelerated rate, so restarts are rate-limited to sqrt(cond) apart
    cooldown = int(np.sqrt(lip / gamma)) + 1
    w = np.full(n, rho / n)
    y = w.copy()
    t = 1.0
    since_restart = 0
    resid = _analog_grad_residual(w, c, gamma, kappa, rho)
    it = 0
    while it < max_iters and resid > grad_tol:
        s = y.sum()
        w_new = np.empty(n)
        moved_dot_grad = 0.0
        for a in range(n):
            g = c[a] - gamma * y[a] - kappa * (s - rho)
            v = y[a] + step * g
            if v < 0.0:
                v = 0.0
            moved_dot_grad += g * (v - y[a])
            w_new[a] = v
        # adaptive restart: momentum has turned against the ascent direction
        if moved_dot_grad < 0.0 and since_restart >= cooldown:
            t = 1.0
            since_restart = 0
            for a in range(n):
                y[a] = w[a]
            it += 1
            continue
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        beta = (t - 1.0) / t_next
        for a in range(n):
            y[a] = w_new[a] + beta * (w_new[a] - w[a])
            w[a] = w_new[a]
        t = t_next
        it += 1
        since_restart += 1
        resid = _analog_grad_residual(w, c, gamma, kappa, rho)
    return w, it, resid


def pg_conjugate_analog(c, gamma: float, kappa: float, rho: float,
                        dist_tol: float = 1e-7,
                        max_iters: int = 500_000) -> ConjugateSolution:
    """Projected-gradient oracle for the analog conjugate (no KKT shortcuts).

    ``dist_tol`` bounds the sup-norm distance to the true maximizer through
    the strong concavity of the objective.  First-order methods lose their
    accelerated rate when momentum extrapolates across the nonnegativity
    boundary, which at condition numbers ~kappa*n/gamma makes certification
    impractical; keep ``kappa`` moderate (<= ~1e3) and use
    :func:`nnls_conjugate_analog` for stiff instances.
    """
    c = np.asarray(c, dtype=np.float64)
    grad_tol = max(
        gamma * dist_tol,
        # float floor of evaluating kappa * (sum w - rho)
        8.0 * kappa * np.finfo(float).eps * max(1.0, rho),
    )
    w, it, resid = _pg_ascent(c, gamma, kappa, rho, max_iters, grad_tol)
    if resid > grad_tol:
        raise RuntimeError(
            f"projected gradient stalled after {it} iterations at first-order "
            f"residual {resid} (target {grad_tol})"
        )
    s = float(w.sum())
    value = float(c @ w - 0.5 * gamma * (w @ w) - 0.5 * kappa * (s - rho) ** 2)
    return ConjugateSolution(w=w, value=value, k=int((w > 0.0).sum()))


def nnls_conjugate_analog(c, gamma: float, kappa: float,
                          rho: float) -> ConjugateSolution:
    """Active-set oracle for the analog conjugate via a least-squares recast.

    Maximizing ``c @ w - (gamma/2)||w||^2 - (kappa/2)(sum w - rho)^2`` over
    ``w >= 0`` is the nonnegative least-squares problem with design matrix
    ``[sqrt(gamma) I; sqrt(kappa) 1^T]`` and target
    ``[c / sqrt(gamma); sqrt(kappa) rho]``, which the Lawson-Hanson solver
    handles at machine precision regardless of the penalty stiffness.
    """
    from scipy.optimize import nnls

    c = np.asarray(c, dtype=np.float64)
    n = c.size
    A = np.vstack([np.sqrt(gamma) * np.eye(n), np.sqrt(kappa) * np.ones((1, n))])
    b = np.concatenate([c / np.sqrt(gamma), [np.sqrt(kappa) * rho]])
    w, _ = nnls(A, b)
    s = float(w.sum())
    value = float(c @ w - 0.5 * gamma * (w @ w) - 0.5 * kappa * (s - rho) ** 2)
    return ConjugateSolution(w=w, value=value, k=int((w > 0.0).sum()))


def central_diff_grad(fn: Callable[[np.ndarray], float], W: np.ndarray,
                      h: float = 1e-6) -> np.ndarray:
    """Central finite differences of a scalar function of a matrix."""
    g = np.zeros_like(W)
    it = np.nditer(W, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        step = h * max(1.0, abs(W[idx]))
        Wp = W.copy()
        Wm = W.copy()
        Wp[idx] += step
        Wm[idx] -= step
        g[idx] = (fn(Wp) - fn(Wm)) / (2.0 * step)
        it.iternext()
    return g


# ---------------------------------------------------------------------------
# suites


def suite_topk_enumeration(n_cases: int = 500, seed: int = 0,
                           solver=conjugate_topk) -> SuiteResult:
    """Closed-form saturated conjugate vs exhaustive enumeration, including
    tie-break parity: identical supports and bitwise-equal values."""
    rng = np.random.default_rng(seed)
    combos = [(n, k) for n in range(2, 13) for k in range(1, n + 1)]
    worst = 0.0
    cases = 0
    while cases < n_cases:
        n, k = combos[cases % len(combos)]
        if cases % 3 == 2:
            # tie-rich vectors exercise the lowest-index parity
            c = rng.integers(-2, 3, size=n).astype(np.float64) * 0.5
        else:
            c = rng.uniform(-1.0, 1.0, size=n)
        rho, omega = float(k), 1.0
        got = solver(c, rho=rho, omega=omega)
        want = enumerate_topk(c, rho=rho, omega=omega)
        if not np.array_equal(got.w, want.w) or got.value != want.value:
            return SuiteResult(
                "topk-vs-enumeration", False, cases + 1, np.inf,
                detail=f"mismatch at n={n} k={k} c={c!r}: {got.w} vs {want.w}",
            )
        worst = max(worst, abs(got.value - want.value))
        cases += 1
    return SuiteResult("topk-vs-enumeration", True, cases, worst)


_KKT_KAPPAS = (0.5, 1.0, 10.0, 1e6)


def random_kkt_instance(rng: np.random.Generator):
    n = int(rng.integers(1, 9))
    c = rng.uniform(-1.0, 1.0, size=n)
    gamma = float(rng.uniform(0.1, 2.0))
    kappa = float(_KKT_KAPPAS[rng.integers(0, len(_KKT_KAPPAS))])
    rho = float(rng.uniform(0.5, 2.0))
    return c, gamma, kappa, rho


def kkt_residual(w: np.ndarray, c: np.ndarray, gamma: float, kappa: float,
                 rho: float) -> float:
    """Worst violation of the stationarity/elimination conditions at ``w``.

    Re-deriving the threshold as ``kappa * (sum(w) - rho)`` cancels almost
    exactly at large kappa, so the measurement itself has a float floor of
    roughly ``kappa * n * eps * rho``; residuals below that are noise.
    """
    theta = kappa * (w.sum() - rho)
    grad = c - gamma * w - theta
    active = w > 0.0
    res = 0.0
    if active.any():
        res = max(res, float(np.abs(grad[active]).max()))
    if (~active).any():
        res = max(res, float(np.maximum(grad[~active], 0.0).max()))
    return res


def suite_kkt_oracle(n_instances: int = 1000, seed: int = 0,
                     solver=conjugate_analog_kkt,
                     w_tol: float = 1e-6, resid_tol: float = 1e-8) -> SuiteResult:
    """Closed-form analog conjugate vs independent iterative oracles.

    Every instance is checked against the active-set least-squares oracle and
    for first-order optimality residuals; instances with moderate stiffness
    (kappa <= 10) are additionally checked against projected gradient ascent,
    which cannot certify 1e-6 at kappa ~ 1e6 (momentum dies crossing the
    nonnegativity boundary at condition number kappa*n/gamma).
    """
    rng = np.random.default_rng(seed)
    worst_w = 0.0
    worst_res = 0.0
    for i in range(n_instances):
        c, gamma, kappa, rho = random_kkt_instance(rng)
        got = solver(c, gamma=gamma, kappa=kappa, rho=rho)
        oracle = nnls_conjugate_analog(c, gamma=gamma, kappa=kappa, rho=rho)
        dw = float(np.abs(got.w - oracle.w).max())
        if kappa <= 10.0:
            pg = pg_conjugate_analog(c, gamma=gamma, kappa=kappa, rho=rho)
            dw = max(dw, float(np.abs(got.w - pg.w).max()))
        res = kkt_residual(got.w, c, gamma, kappa, rho)
        worst_w = max(worst_w, dw)
        worst_res = max(worst_res, res)
        if dw > w_tol or res > resid_tol:
            return SuiteResult(
                "kkt-vs-oracles", False, i + 1, max(dw, res),
                detail=f"instance c={c!r} gamma={gamma} kappa={kappa} rho={rho}",
            )
    return SuiteResult(
        "kkt-vs-oracles", True, n_instances, worst_res,
        detail=f"worst |w - w_oracle| = {worst_w:.3e}",
    )


def suite_frobenius_limit(n_instances: int = 1000, seed: int = 0,
                          solver=conjugate_analog_kkt,
                          tol: float = 1e-9) -> SuiteResult:
    """At kappa=0 with nonnegative correlations the conjugate value reduces
    to the squared norm: |2*gamma*value - sum(c**2)| stays below tol."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n_instances):
        n = int(rng.integers(1, 9))
        c = rng.uniform(0.0, 2.0, size=n)
        gamma = float(rng.uniform(0.1, 2.0))
        sol = solver(c, gamma=gamma, kappa=0.0, rho=1.0)
        err = abs(2.0 * gamma * sol.value - float(c @ c))
        worst = max(worst, err)
        if err > tol:
            return SuiteResult("frobenius-limit", False, i + 1, err,
                               detail=f"c={c!r} gamma={gamma}")
    return SuiteResult("frobenius-limit", True, n_instances, worst)


def suite_elimination_trigger(n_instances: int = 1000, seed: int = 0,
                              solver=conjugate_analog_kkt,
                              trigger=elimination_trigger) -> SuiteResult:
    """At stiff competition the spread condition predicts elimination exactly:
    trigger(c) holds iff the solver keeps fewer than all synapses."""
    rng = np.random.default_rng(seed)
    kappa = 1e6
    for i in range(n_instances):
        n = int(rng.integers(2, 9))
        c = rng.uniform(-1.0, 1.0, size=n)
        gamma = float(rng.uniform(0.1, 2.0))
        rho = float(rng.uniform(0.5, 2.0))
        predicted = trigger(c, gamma=gamma, rho=rho)
        actual = solver(c, gamma=gamma, kappa=kappa, rho=rho).k < n
        if predicted != actual:
            return SuiteResult(
                "elimination-trigger", False, i + 1, np.inf,
                detail=f"c={c!r} gamma={gamma} rho={rho}: "
                       f"trigger={predicted} solver_k<n={actual}",
            )
    return SuiteResult("elimination-trigger", True, n_instances, 0.0)


def suite_gradient_check(n_draws: int = 100, seed: int = 0,
                         grad=grad_penalty_phi, rel_tol: float = 1e-5) -> SuiteResult:
    """Analytic penalty gradient vs central finite differences, both penalty
    forms, randomized shapes and parameters."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n_draws):
        n_out = int(rng.integers(1, 4))
        n_in = int(rng.integers(1, 6))
        W = rng.uniform(0.0, 1.5, size=(n_out, n_in))
        variant = "rectified-analog" if i % 2 else "rectified-bounded"
        params = HyperParams(
            kappa=float(rng.uniform(0.2, 3.0)),
            rho=float(rng.uniform(0.3, 2.0)),
            gamma=float(rng.uniform(0.1, 1.0)),
            variant=variant,
            omega=10.0,  # keep the box irrelevant to the smooth penalty
        )
        analytic = grad(W, params)
        fd = central_diff_grad(lambda M: penalty_phi(M, params), W)
        rel = np.abs(analytic - fd) / np.maximum(1.0, np.abs(analytic))
        err = float(rel.max())
        worst = max(worst, err)
        if err > rel_tol:
            return SuiteResult("penalty-gradient-fd", False, i + 1, err,
                               detail=f"variant={variant}")
    return SuiteResult("penalty-gradient-fd", True, n_draws, worst)


# ---------------------------------------------------------------------------
# weak duality on small instances


def _feasible_scale(X: np.ndarray, D: np.ndarray) -> float:
    S = X @ X.T / X.shape[1]
    mask = S > 0.0
    if not mask.any():
        return 1.0
    return float(np.sqrt((D[mask] / S[mask]).min()))


def best_primal_value(U: Dataset, params: HyperParams, n_outputs: int,
                      rng: np.random.Generator, n_trials: int = 60) -> float:
    """Random feasible-activity search for the constrained objective."""
    D = build_constraint_matrix(params, n_outputs)
    T = U.n_steps
    best = primal_objective(np.zeros((n_outputs, T)), U, params).value
    incumbent = None
    for _ in range(n_trials):
        X = rng.uniform(0.0, 1.0, size=(n_outputs, T))
        if rng.uniform() < 0.5:
            X *= rng.uniform(0.0, 1.0, size=(n_outputs, T)) < 0.5
        X *= _feasible_scale(X, D) * (1.0 - 1e-12)
        value = primal_objective(X, U, params).value
        if value > best:
            best = value
            incumbent = X
    if incumbent is not None:
        for _ in range(40):
            X = incumbent * rng.uniform(0.8, 1.2, size=incumbent.shape)
            X *= _feasible_scale(X, D) * (1.0 - 1e-12)
            value = primal_objective(X, U, params).value
            if value > best:
                best = value
                incumbent = X
    return best


def _solve_columns(W, L, U: Dataset, cfg: DynamicsConfig) -> np.ndarray:
    state = NetworkState(W=W, L=L, theta=np.zeros(W.shape[0]))
    X = np.zeros((W.shape[0], U.n_steps))
    for t in range(U.n_steps):
        X[:, t] = solve_rectified(U.column(t), state, cfg).x
    return X


def dual_value(L: np.ndarray, U: Dataset, params: HyperParams,
               cfg: DynamicsConfig, rng: np.random.Generator,
               n_starts: int = 3):
    """Evaluate the dual function at L: jointly maximize over W and X by
    alternating the exact row conjugate with the activity dynamics.  Returns
    the best value found and the output second moments at its maximizer."""
    n_in, T = U.n_inputs, U.n_steps
    n_out = L.shape[0]
    best_value = -np.inf
    best_S = None
    for start in range(n_starts):
        if start == 0:
            W = np.full((n_out, n_in), params.rho / n_in)
        else:
            W = rng.uniform(0.0, 1.0, size=(n_out, n_in))
        prev = -np.inf
        for _ in range(40):
            X = _solve_columns(W, L, U, cfg)
            C = X @ U.values.T / T
            W = np.stack([
                conjugate_analog_kkt(C[i], params.gamma, params.kappa,
                                     params.rho).w
                for i in range(n_out)
            ])
            value = payoff(W, L, U, params, cfg).value
            if value <= prev + 1e-12:
                break
            prev = value
        if prev > best_value:
            best_value = prev
            X = _solve_columns(W, L, U, cfg)
            best_S = X @ X.T / T
    return best_value, best_S


def suite_duality_gap(n_instances: int = 12, seed: int = 0,
                      slack: float = 1e-9) -> SuiteResult:
    """Weak duality on tiny analog instances: the smallest dual payoff found
    by subgradient descent over L must not fall below the best feasible
    primal value, up to rounding slack."""
    rng = np.random.default_rng(seed)
    worst_gap = np.inf
    gaps = []
    for i in range(n_instances):
        n_out = int(rng.integers(1, 4))
        n_in = int(rng.integers(1, 5))
        T = int(rng.integers(1, 7))
        U = Dataset(rng.uniform(0.0, 1.0, size=(n_in, T)))
        params = HyperParams(
            p=0.3, q=0.6,
            kappa=float(rng.uniform(0.5, 2.0)),
            rho=float(rng.uniform(0.5, 1.5)),
            gamma=float(rng.uniform(0.5, 1.5)),
            variant="rectified-analog",
            dynamics_tol=1e-10, max_sweeps=500,
        )
        cfg = DynamicsConfig.from_hyperparams(params)
        D = build_constraint_matrix(params, n_out)
        L = np.eye(n_out)
        dual_best = np.inf
        for _ in range(20):
            value, S = dual_value(L, U, params, cfg, rng)
            dual_best = min(dual_best, value)
            L = L + 0.25 * (S - D)
            L = 0.5 * (L + L.T)
            off = ~np.eye(n_out, dtype=bool)
            L[off] = np.maximum(L[off], 0.0)
            np.fill_diagonal(L, np.maximum(np.diag(L), params.eps_l))
        primal_best = best_primal_value(U, params, n_out, rng)
        gap = dual_best - primal_best
        gaps.append(gap)
        worst_gap = min(worst_gap, gap)
        if gap < -slack:
            return SuiteResult(
                "weak-duality", False, i + 1, gap,
                detail=f"dual {dual_best} < primal {primal_best}",
            )
    return SuiteResult(
        "weak-duality", True, n_instances, worst_gap,
        detail=f"gap range [{min(gaps):.3e}, {max(gaps):.3e}]",
    )


def run_all(seed: int = 0, n_instances: int = 1000, n_topk_cases: int = 500,
            n_grad_draws: int = 100, n_duality: int = 12) -> list[SuiteResult]:
    """Run every suite at the configured sizes."""
    return [
        suite_topk_enumeration(n_topk_cases, seed),
        suite_kkt_oracle(n_instances, seed),
        suite_frobenius_limit(n_instances, seed),
        suite_elimination_trigger(n_instances, seed),
        suite_gradient_check(n_grad_draws, seed),
        suite_duality_gap(n_duality, seed),
    ]
