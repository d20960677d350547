"""File ingestion and artifact emission.

Handles the big-endian IDX container used by the MNIST distribution, a
seeded synthetic generator with known correlation structure, binary-PGM
weight-grid images, binary checkpoints with bit-exact round trips, and the
CSV metric files written by the experiment harness.
"""

from __future__ import annotations

import csv
import gzip
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import CorrGameError, Dataset, HyperParams, NetworkState, VARIANTS
from .metrics import MetricsLog

MAGIC_LABELS = 2049
MAGIC_IMAGES = 2051

CHECKPOINT_MAGIC = b"CGCP"
CHECKPOINT_VERSION = 1


class IdxFormatError(CorrGameError):
    """Base class for IDX container problems."""


class BadMagic(IdxFormatError):
    pass


class TruncatedFile(IdxFormatError):
    pass


class DimMismatch(IdxFormatError):
    pass


class ShapeMismatch(CorrGameError):
    pass


class CheckpointError(CorrGameError):
    pass


class VersionMismatch(CheckpointError):
    pass


class CorruptPayload(CheckpointError):
    pass


@dataclass
class IdxHeader:
    magic: int
    dims: list[int]

    @property
    def n_items(self) -> int:
        return int(np.prod(self.dims)) if self.dims else 0


def _read_bytes(path) -> bytes:
    data = Path(path).read_bytes()
    if data[:2] == b"\x1f\x8b":
        data = gzip.decompress(data)
    return data


def parse_idx(data: bytes) -> tuple[IdxHeader, bytes]:
    """Split an IDX byte string into a validated header and raw payload."""
    if len(data) < 4:
        raise TruncatedFile(
            f"file ends at byte {len(data)}, before the 4-byte magic at offset 0"
        )
    (magic,) = struct.unpack(">I", data[:4])
    if magic not in (MAGIC_LABELS, MAGIC_IMAGES):
        raise BadMagic(f"magic {magic} at byte offset 0 is neither 2049 nor 2051")
    n_dims = magic & 0xFF
    end_dims = 4 + 4 * n_dims
    if len(data) < end_dims:
        raise TruncatedFile(
            f"file ends at byte {len(data)} inside the dimension block "
            f"(offsets 4..{end_dims - 1})"
        )
    dims = list(struct.unpack(f">{n_dims}I", data[4:end_dims]))
    header = IdxHeader(magic=magic, dims=dims)
    payload = data[end_dims:]
    if len(payload) != header.n_items:
        raise DimMismatch(
            f"dimensions {dims} promise {header.n_items} bytes from offset "
            f"{end_dims}, found {len(payload)}"
        )
    return header, payload


def load_idx_images(path) -> Dataset:
    """Load an IDX image file as a dataset of flattened [0, 1] columns.

    Pixels are scaled by 1/255; image t becomes column t in file order.
    """
    header, payload = parse_idx(_read_bytes(path))
    if header.magic != MAGIC_IMAGES:
        raise BadMagic(
            f"magic {header.magic} at byte offset 0: expected an image file (2051)"
        )
    n, *shape = header.dims
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(n, -1)
    return Dataset(values=(pixels.T / 255.0))


def load_idx_labels(path) -> np.ndarray:
    """Load an IDX label file as a uint8 vector (unused by learning)."""
    header, payload = parse_idx(_read_bytes(path))
    if header.magic != MAGIC_LABELS:
        raise BadMagic(
            f"magic {header.magic} at byte offset 0: expected a label file (2049)"
        )
    return np.frombuffer(payload, dtype=np.uint8).copy()


def synthetic_correlated(n_inputs: int, n_steps: int, n_clusters: int,
                         seed: int, noise: float = 0.1) -> Dataset:
    """Nonnegative inputs with known correlated channel groups.

    Channel ``a`` belongs to cluster ``a % n_clusters``.  At each timestep
    every cluster draws a latent half-normal source (|N(0,1)|) and each
    channel reads its cluster's source plus ``noise`` times an independent
    half-normal perturbation.  Everything derives from ``seed``.
    """
    if n_clusters > n_inputs:
        raise ValueError(
            f"n_clusters={n_clusters} exceeds n_inputs={n_inputs}"
        )
    rng = np.random.default_rng(seed)
    latent = np.abs(rng.standard_normal((n_clusters, n_steps)))
    jitter = np.abs(rng.standard_normal((n_inputs, n_steps)))
    assign = np.arange(n_inputs) % n_clusters
    return Dataset(values=latent[assign] + noise * jitter)


def write_weight_grid(W, rows: int, cols: int, path,
                      tile_shape: tuple[int, int] | None = None) -> Path:
    """Tile per-neuron weight vectors into one binary PGM image.

    Each W row reshapes to ``tile_shape`` (default: square, inferred) and is
    normalized to [0, 255] on its own so graded and saturated weights are
    both visible; tiles are separated by 1-pixel white lines.
    """
    W = np.atleast_2d(np.asarray(W, dtype=np.float64))
    n_out, n_in = W.shape
    if tile_shape is None:
        side = int(round(np.sqrt(n_in)))
        if side * side != n_in:
            raise ShapeMismatch(
                f"n_inputs={n_in} is not square; pass tile_shape explicitly"
            )
        tile_shape = (side, side)
    th, tw = tile_shape
    if th * tw != n_in:
        raise ShapeMismatch(f"tile shape {tile_shape} does not hold {n_in} weights")
    if rows * cols < n_out:
        raise ShapeMismatch(
            f"grid {rows}x{cols} cannot hold {n_out} neurons"
        )
    height = rows * th + (rows - 1)
    width = cols * tw + (cols - 1)
    canvas = np.full((height, width), 255, dtype=np.uint8)
    for idx in range(rows * cols):
        r, c = divmod(idx, cols)
        tile = np.zeros((th, tw))
        if idx < n_out:
            w = W[idx]
            span = w.max() - w.min()
            if span > 0.0:
                tile = ((w - w.min()) / span * 255.0).reshape(th, tw)
        top, left = r * (th + 1), c * (tw + 1)
        canvas[top:top + th, left:left + tw] = np.round(tile).astype(np.uint8)
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (width, height))
        fh.write(canvas.tobytes())
    return path


@dataclass
class Checkpoint:
    """Everything needed to resume or evaluate a run, bit-exactly."""

    params: HyperParams
    state: NetworkState
    seed: int
    step: int
    version: int = CHECKPOINT_VERSION


_HEAD_FMT = "<4sIqqIIII"  # magic, version, seed, step, n_out, n_in, variant, max_sweeps
_PARAMS_FMT = "<11d"  # p q kappa rho omega gamma eta_w eta_l eta_theta eps_l tol


def checkpoint_save(path, cp: Checkpoint) -> Path:
    """Serialize a checkpoint; little-endian float64 payloads plus a CRC."""
    p = cp.params
    st = cp.state
    head = struct.pack(
        _HEAD_FMT, CHECKPOINT_MAGIC, cp.version, cp.seed, cp.step,
        st.n_outputs, st.n_inputs, VARIANTS.index(p.variant), p.max_sweeps,
    )
    eta_theta = np.nan if p.eta_theta is None else p.eta_theta
    pay = struct.pack(
        _PARAMS_FMT, p.p, p.q, p.kappa, p.rho, p.omega, p.gamma,
        p.eta_w, p.eta_l, eta_theta, p.eps_l, p.dynamics_tol,
    )
    body = head + pay
    body += np.ascontiguousarray(st.W, dtype="<f8").tobytes()
    body += np.ascontiguousarray(st.L, dtype="<f8").tobytes()
    body += np.ascontiguousarray(st.theta, dtype="<f8").tobytes()
    body += struct.pack("<I", zlib.crc32(body))
    path = Path(path)
    path.write_bytes(body)
    return path


def checkpoint_load(path) -> Checkpoint:
    """Read a checkpoint and validate every embedded invariant."""
    data = Path(path).read_bytes()
    head_size = struct.calcsize(_HEAD_FMT)
    if len(data) < head_size + 4:
        raise CorruptPayload(
            f"file is {len(data)} bytes, too short for the {head_size}-byte header"
        )
    magic, version, seed, step, n_out, n_in, variant_code, max_sweeps = struct.unpack(
        _HEAD_FMT, data[:head_size]
    )
    if magic != CHECKPOINT_MAGIC:
        raise CorruptPayload(f"bad checkpoint magic {magic!r}")
    if version != CHECKPOINT_VERSION:
        raise VersionMismatch(
            f"checkpoint version {version}, this build reads {CHECKPOINT_VERSION}"
        )
    params_size = struct.calcsize(_PARAMS_FMT)
    arrays_size = 8 * (n_out * n_in + n_out * n_out + n_out)
    expected = head_size + params_size + arrays_size + 4
    if len(data) != expected:
        raise CorruptPayload(
            f"expected {expected} bytes for a {n_out}x{n_in} network, got {len(data)}"
        )
    (stored_crc,) = struct.unpack("<I", data[-4:])
    if zlib.crc32(data[:-4]) != stored_crc:
        raise CorruptPayload("CRC mismatch: payload bytes were altered")
    vals = struct.unpack(_PARAMS_FMT, data[head_size:head_size + params_size])
    (p, q, kappa, rho, omega, gamma, eta_w, eta_l, eta_theta, eps_l, tol) = vals
    if not (0 <= variant_code < len(VARIANTS)):
        raise CorruptPayload(f"unknown variant code {variant_code}")
    params = HyperParams(
        p=p, q=q, kappa=kappa, rho=rho, omega=omega, gamma=gamma,
        eta_w=eta_w, eta_l=eta_l,
        eta_theta=None if np.isnan(eta_theta) else eta_theta,
        eps_l=eps_l, dynamics_tol=tol, max_sweeps=max_sweeps,
        variant=VARIANTS[variant_code],
    )
    offset = head_size + params_size
    def take(count):
        nonlocal offset
        arr = np.frombuffer(data, dtype="<f8", count=count, offset=offset).copy()
        offset += 8 * count
        return arr
    W = take(n_out * n_in).reshape(n_out, n_in)
    L = take(n_out * n_out).reshape(n_out, n_out)
    theta = take(n_out)
    state = NetworkState(W=W, L=L, theta=theta, step=step)
    state.validate(params)
    return Checkpoint(params=params, state=state, seed=seed, step=step)


def write_metrics_csv(log: MetricsLog, out_dir, extra_summary: dict | None = None) -> list[Path]:
    """Emit the metric CSV files (one file per metric, header row first)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    def emit(name, header, rows):
        path = out_dir / name
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        written.append(path)

    emit("density.csv", ["step", "density"],
         [(step, repr(d)) for step, d in log.density_series])
    sim = log.similarity_pairs if log.similarity_pairs is not None else np.empty((0, 3))
    emit("similarity.csv", ["i", "j", "cosine"],
         [(int(i), int(j), repr(c)) for i, j, c in sim])
    if log.weight_survival is not None:
        surv, sat = log.weight_survival
        emit("survival.csv", ["neuron", "surviving", "saturated"],
             [(n, int(surv[n]), "" if sat is None else int(sat[n]))
              for n in range(len(surv))])
    pairs = (log.inhibition_vs_similarity
             if log.inhibition_vs_similarity is not None else np.empty((0, 4)))
    emit("inhibition_similarity.csv", ["i", "j", "weight_cosine", "lateral_weight"],
         [(int(i), int(j), repr(c), repr(l)) for i, j, c, l in pairs])
    summary = {"nonconvergence_count": log.nonconvergence_count}
    summary.update(extra_summary or {})
    emit("summary.csv", ["key", "value"], sorted(summary.items()))
    return written
