"""Online training and frozen-weight evaluation.

The loop is strictly serial and deterministic: one stimulus per step, pulled
from the dataset in file order (or a seed-derived shuffle), dynamics solved
to convergence, then the plasticity pass.  A (config, seed) pair reproduces
its checkpoints bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import RunConfig, config_to_text
from .core import Dataset, HyperParams, NetworkState
from .data_io import (
    Checkpoint,
    checkpoint_save,
    write_metrics_csv,
    write_weight_grid,
)
from .dynamics import DynamicsConfig, solve_rectified, solve_sigmoid
from .metrics import (
    MetricsLog,
    activity_density,
    cosine_pairs,
    inhibition_vs_weight_similarity,
    weight_survival,
)
from .plasticity import apply_plasticity


@dataclass
class TrainResult:
    state: NetworkState
    log: MetricsLog
    config: RunConfig
    checkpoint_paths: list[Path]


def init_network(params: HyperParams, n_outputs: int, n_inputs: int,
                 rng: np.random.Generator) -> NetworkState:
    """Fresh network: W uniform on [0, 1] with rows normalized to sum rho
    (clamped into the variant's box afterwards), L the identity, thresholds
    zero."""
    W = rng.uniform(0.0, 1.0, size=(n_outputs, n_inputs))
    W *= params.rho / W.sum(axis=1, keepdims=True)
    if params.variant == "rectified-bounded":
        np.clip(W, 0.0, params.omega, out=W)
    L = np.eye(n_outputs)
    theta = np.zeros(n_outputs)
    state = NetworkState(W=W, L=L, theta=theta, step=0)
    state.validate(params)
    return state


def _solve(u, state, params: HyperParams, cfg: DynamicsConfig):
    if params.variant == "sigmoid":
        return solve_sigmoid(u, state, cfg)
    return solve_rectified(u, state, cfg)


def _density_tol(params: HyperParams) -> float:
    # rectified solves produce exact zeros; sigmoid activities never vanish
    return 0.5 if params.variant == "sigmoid" else 0.0


def stimulus_order(n_steps: int, dataset_len: int, seed: int,
                   shuffle: bool) -> np.ndarray:
    """Column indices visited by a run: a wrapping sequential pass, or a
    seed-derived wrapping permutation when shuffling."""
    base = np.arange(n_steps, dtype=np.int64) % dataset_len
    if not shuffle:
        return base
    rng = np.random.default_rng(seed + 1)  # distinct stream from weight init
    perm = rng.permutation(dataset_len)
    return perm[base]


def finalize_metrics(log: MetricsLog, state: NetworkState, params: HyperParams,
                     trailing: np.ndarray | None) -> MetricsLog:
    """Fill the end-of-run metric fields from the final state and the
    trailing activity window (rows = neurons, columns = steps)."""
    if trailing is not None and trailing.size:
        log.similarity_pairs = cosine_pairs(trailing)
    if params.variant == "rectified-analog":
        log.weight_survival = weight_survival(state.W, omega=None, survival_tol=1e-3)
    else:
        log.weight_survival = weight_survival(state.W, omega=params.omega)
    log.inhibition_vs_similarity = inhibition_vs_weight_similarity(state)
    return log


def run_training(config: RunConfig, dataset: Dataset | None = None,
                 write_artifacts: bool = True) -> TrainResult:
    """Execute one training run and (optionally) emit its artifacts.

    Artifacts: metric CSVs, the resolved config, periodic checkpoints at
    ``checkpoint_interval``, a final checkpoint, and the weight-grid image
    when the input dimension is square.
    """
    params = config.params
    dataset = config.dataset.load(seed=config.seed) if dataset is None else dataset
    cfg = config.dynamics_config()
    rng = np.random.default_rng(config.seed)
    state = init_network(params, config.n_outputs, dataset.n_inputs, rng)

    order = stimulus_order(config.n_steps, dataset.n_steps, config.seed,
                           config.shuffle)
    zero_tol = _density_tol(params)
    window = config.density_window
    win_acc: list[float] = []
    trailing = np.zeros((config.n_outputs, min(config.similarity_window,
                                               config.n_steps)))
    log = MetricsLog()
    out_dir = Path(config.out_dir)
    checkpoint_paths: list[Path] = []
    if write_artifacts:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "config.cfg").write_text(config_to_text(config))
        if config.shuffle:
            np.savetxt(out_dir / "order.csv", order, fmt="%d", header="column",
                       comments="")

    for step_idx, col in enumerate(order, start=1):
        u = dataset.column(int(col))
        record = _solve(u, state, params, cfg)
        if not record.converged:
            log.nonconvergence_count += 1
        apply_plasticity(state, record.x, u, params)

        win_acc.append(activity_density(record.x, zero_tol))
        if len(win_acc) == window:
            log.density_series.append((step_idx, float(np.mean(win_acc))))
            win_acc.clear()
        if trailing.shape[1]:
            trailing[:, (step_idx - 1) % trailing.shape[1]] = record.x

        if (write_artifacts and config.checkpoint_interval
                and step_idx % config.checkpoint_interval == 0
                and step_idx < config.n_steps):
            cp_path = out_dir / f"checkpoint_{step_idx:08d}.ckpt"
            checkpoint_save(cp_path, Checkpoint(params=params, state=state,
                                                seed=config.seed, step=step_idx))
            checkpoint_paths.append(cp_path)

    # trailing buffer is a ring; restore chronological order for the window
    if config.n_steps >= trailing.shape[1] and trailing.shape[1]:
        split = config.n_steps % trailing.shape[1]
        trailing = np.concatenate([trailing[:, split:], trailing[:, :split]], axis=1)
    else:
        trailing = trailing[:, :config.n_steps]
    finalize_metrics(log, state, params, trailing)

    if write_artifacts:
        state.validate(params)
        final_path = out_dir / "final.ckpt"
        checkpoint_save(final_path, Checkpoint(params=params, state=state,
                                               seed=config.seed,
                                               step=config.n_steps))
        checkpoint_paths.append(final_path)
        write_metrics_csv(log, out_dir, extra_summary=_summary(config, log))
        side = int(round(np.sqrt(dataset.n_inputs)))
        if side * side == dataset.n_inputs:
            grid = int(np.ceil(np.sqrt(config.n_outputs)))
            write_weight_grid(state.W, grid, grid, out_dir / "weights.pgm")
    return TrainResult(state=state, log=log, config=config,
                       checkpoint_paths=checkpoint_paths)


def _summary(config: RunConfig, log: MetricsLog) -> dict:
    summary = {
        "steps": config.n_steps,
        "n_outputs": config.n_outputs,
        "seed": config.seed,
        "variant": config.params.variant,
        "shuffle": config.shuffle,
    }
    if log.density_series:
        summary["final_density"] = repr(log.density_series[-1][1])
    if log.similarity_pairs is not None and len(log.similarity_pairs):
        summary["median_cosine"] = repr(float(np.median(log.similarity_pairs[:, 2])))
    return summary


def run_eval(cp: Checkpoint, dataset: Dataset, density_window: int = 100,
             out_dir: str | Path | None = None,
             dynamics_order: str = "cyclic",
             dynamics_seed: int | None = None) -> MetricsLog:
    """Frozen-weights pass over a dataset, emitting the same metric files as
    training (no checkpoints, no weight updates)."""
    params = cp.params
    state = cp.state
    state.validate(params)
    cfg = DynamicsConfig.from_hyperparams(params, order=dynamics_order,
                                          seed=dynamics_seed)
    zero_tol = _density_tol(params)
    log = MetricsLog()
    X = np.zeros((state.n_outputs, dataset.n_steps))
    win_acc: list[float] = []
    for t in range(dataset.n_steps):
        record = _solve(dataset.column(t), state, params, cfg)
        if not record.converged:
            log.nonconvergence_count += 1
        X[:, t] = record.x
        win_acc.append(activity_density(record.x, zero_tol))
        if len(win_acc) == density_window:
            log.density_series.append((t + 1, float(np.mean(win_acc))))
            win_acc.clear()
    finalize_metrics(log, state, params, X)
    if out_dir is not None:
        write_metrics_csv(log, out_dir, extra_summary={
            "eval_steps": dataset.n_steps,
            "checkpoint_step": cp.step,
            "variant": params.variant,
        })
    return log
