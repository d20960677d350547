"""Experiment configuration files.

Grammar (one assignment per line)::

    # comment                     blank lines and '#' comments are skipped
    section.key = value           keys are dotted, case-sensitive
    dataset.kind = mnist          values parse as bool ("true"/"false"),
    params.p = 0.03               then int, then float, then bare string

Recognized keys:

    dataset.kind        "mnist" or "synthetic"
    dataset.path        IDX image file (mnist)
    dataset.n_inputs    channels (synthetic)
    dataset.n_steps     dataset length (synthetic)
    dataset.n_clusters  correlated channel groups (synthetic)
    dataset.noise       per-channel jitter amplitude (synthetic)
    params.*            HyperParams fields: p q kappa rho omega gamma
                        eta_w eta_l eta_theta eps_l dynamics_tol max_sweeps
                        variant
    dynamics.order      "cyclic" or "random"
    dynamics.seed       permutation seed for random order
    run.n_outputs       output neurons
    run.steps           training steps
    run.seed            master seed (weight init, shuffling)
    run.shuffle         shuffle stimulus order (default false)
    run.density_window  steps per density point (default 100)
    run.similarity_window
                        trailing steps for cosine statistics (default 10000)
    run.checkpoint_interval
                        steps between periodic checkpoints (0 = final only)
    run.out             output directory

Unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .core import CorrGameError, Dataset, HyperParams
from .data_io import load_idx_images, synthetic_correlated
from .dynamics import DynamicsConfig


class ConfigError(CorrGameError):
    pass


@dataclass
class DatasetSpec:
    kind: str = "synthetic"
    path: str | None = None
    n_inputs: int = 64
    n_steps: int = 10000
    n_clusters: int = 8
    noise: float = 0.1

    def load(self, seed: int) -> Dataset:
        if self.kind == "mnist":
            if not self.path:
                raise ConfigError("dataset.kind = mnist requires dataset.path")
            return load_idx_images(self.path)
        if self.kind == "synthetic":
            return synthetic_correlated(
                self.n_inputs, self.n_steps, self.n_clusters, seed=seed,
                noise=self.noise,
            )
        raise ConfigError(f"unknown dataset.kind {self.kind!r}")


@dataclass
class RunConfig:
    """Fully resolved experiment description; see module docstring for the
    file format that produces one."""

    dataset: DatasetSpec = field(default_factory=DatasetSpec)
    params: HyperParams = field(default_factory=HyperParams)
    dynamics_order: str = "cyclic"
    dynamics_seed: int | None = None
    n_outputs: int = 64
    n_steps: int = 10000
    seed: int = 0
    shuffle: bool = False
    density_window: int = 100
    similarity_window: int = 10000
    checkpoint_interval: int = 0
    out_dir: str = "run_out"

    def __post_init__(self):
        if self.n_steps < 1:
            raise ConfigError(f"run.steps must be >= 1, got {self.n_steps}")
        if self.n_outputs < 1:
            raise ConfigError(f"run.n_outputs must be >= 1, got {self.n_outputs}")
        if self.density_window < 1 or self.similarity_window < 1:
            raise ConfigError("metric windows must be >= 1")
        if self.checkpoint_interval < 0:
            raise ConfigError("run.checkpoint_interval must be >= 0")

    def dynamics_config(self) -> DynamicsConfig:
        return DynamicsConfig.from_hyperparams(
            self.params, order=self.dynamics_order, seed=self.dynamics_seed
        )


def _parse_scalar(text: str):
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_config_text(text: str, source: str = "<string>") -> RunConfig:
    entries: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ConfigError(f"{source}:{lineno}: empty key or value in {raw!r}")
        if key in entries:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        entries[key] = _parse_scalar(value)
    return _build_config(entries, source)


def parse_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, source=str(path))


_RUN_KEYS = {
    "run.n_outputs": ("n_outputs", int),
    "run.steps": ("n_steps", int),
    "run.seed": ("seed", int),
    "run.shuffle": ("shuffle", bool),
    "run.density_window": ("density_window", int),
    "run.similarity_window": ("similarity_window", int),
    "run.checkpoint_interval": ("checkpoint_interval", int),
    "run.out": ("out_dir", str),
    "dynamics.order": ("dynamics_order", str),
    "dynamics.seed": ("dynamics_seed", int),
}

_DATASET_FIELDS = {f.name for f in fields(DatasetSpec)}
_PARAM_FIELDS = {f.name for f in fields(HyperParams)}


def _build_config(entries: dict, source: str) -> RunConfig:
    dataset_kwargs = {}
    param_kwargs = {}
    run_kwargs = {}
    for key, value in entries.items():
        section, _, name = key.partition(".")
        if section == "dataset" and name in _DATASET_FIELDS:
            dataset_kwargs[name] = value
        elif section == "params" and name in _PARAM_FIELDS:
            param_kwargs[name] = value
        elif key in _RUN_KEYS:
            attr, typ = _RUN_KEYS[key]
            if typ in (int, float) and not isinstance(value, (int, float)):
                raise ConfigError(f"{source}: {key} must be numeric, got {value!r}")
            if typ is bool and not isinstance(value, bool):
                raise ConfigError(f"{source}: {key} must be true/false, got {value!r}")
            run_kwargs[attr] = typ(value) if typ in (int, float, str) else value
        else:
            raise ConfigError(f"{source}: unknown key {key!r}")
    # floats arriving as ints (e.g. "params.rho = 1") are fine
    for name, value in list(param_kwargs.items()):
        if isinstance(value, bool):
            raise ConfigError(f"{source}: params.{name} must be numeric or string")
    try:
        return RunConfig(
            dataset=DatasetSpec(**dataset_kwargs),
            params=HyperParams(**param_kwargs),
            **run_kwargs,
        )
    except CorrGameError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def config_to_text(cfg: RunConfig) -> str:
    """Render a RunConfig back to the file grammar (used to log the resolved
    configuration into the output directory)."""
    lines = []
    ds = cfg.dataset
    lines.append(f"dataset.kind = {ds.kind}")
    if ds.kind == "mnist":
        lines.append(f"dataset.path = {ds.path}")
    else:
        lines.append(f"dataset.n_inputs = {ds.n_inputs}")
        lines.append(f"dataset.n_steps = {ds.n_steps}")
        lines.append(f"dataset.n_clusters = {ds.n_clusters}")
        lines.append(f"dataset.noise = {ds.noise!r}")
    p = cfg.params
    lines.append(f"params.p = {p.p!r}")
    lines.append(f"params.q = {p.q!r}")
    lines.append(f"params.kappa = {p.kappa!r}")
    lines.append(f"params.rho = {p.rho!r}")
    lines.append(f"params.omega = {p.omega!r}")
    lines.append(f"params.gamma = {p.gamma!r}")
    lines.append(f"params.eta_w = {p.eta_w!r}")
    lines.append(f"params.eta_l = {p.eta_l!r}")
    if p.eta_theta is not None:
        lines.append(f"params.eta_theta = {p.eta_theta!r}")
    lines.append(f"params.eps_l = {p.eps_l!r}")
    lines.append(f"params.dynamics_tol = {p.dynamics_tol!r}")
    lines.append(f"params.max_sweeps = {p.max_sweeps}")
    lines.append(f"params.variant = {p.variant}")
    lines.append(f"dynamics.order = {cfg.dynamics_order}")
    if cfg.dynamics_seed is not None:
        lines.append(f"dynamics.seed = {cfg.dynamics_seed}")
    lines.append(f"run.n_outputs = {cfg.n_outputs}")
    lines.append(f"run.steps = {cfg.n_steps}")
    lines.append(f"run.seed = {cfg.seed}")
    lines.append(f"run.shuffle = {'true' if cfg.shuffle else 'false'}")
    lines.append(f"run.density_window = {cfg.density_window}")
    lines.append(f"run.similarity_window = {cfg.similarity_window}")
    lines.append(f"run.checkpoint_interval = {cfg.checkpoint_interval}")
    lines.append(f"run.out = {cfg.out_dir}")
    return "\n".join(lines) + "\n"


def with_overrides(cfg: RunConfig, seed: int | None = None, out: str | None = None,
                   steps: int | None = None) -> RunConfig:
    """Apply command-line overrides onto a parsed config."""
    updates = {}
    if seed is not None:
        updates["seed"] = seed
    if out is not None:
        updates["out_dir"] = out
    if steps is not None:
        updates["n_steps"] = steps
    return replace(cfg, **updates) if updates else cfg
