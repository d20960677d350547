"""Shared fixtures: surrogate image datasets written as real IDX files, and
the session-scoped training runs used by the acceptance tests.

Set CORRGAME_MNIST to the path of an MNIST ``train-images-idx3-ubyte`` file
to run the experiment-level tests on the real dataset instead of the
stroke-blob surrogate.
"""

import os
import struct
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from corrgame.config import DatasetSpec, parse_config
from corrgame.core import HyperParams
from corrgame.data_io import load_idx_images
from corrgame.training import run_training

PRESET_DIR = Path(__file__).resolve().parent.parent / "presets"


def make_blob_images(side, n_images, seed, min_bumps=3, max_bumps=6,
                     sig_lo=0.9, sig_hi=None):
    """Nonnegative stroke-blob images as uint8: each image superposes a few
    Gaussian bumps at random positions, clipped to [0, 1] and quantized."""
    rng = np.random.default_rng(seed)
    if sig_hi is None:
        sig_hi = side / 6
    yy, xx = np.mgrid[0:side, 0:side]
    out = np.zeros((n_images, side, side), dtype=np.uint8)
    for t in range(n_images):
        img = np.zeros((side, side))
        for _ in range(rng.integers(min_bumps, max_bumps + 1)):
            cy, cx = rng.uniform(0, side - 1, 2)
            sig = rng.uniform(sig_lo, sig_hi)
            amp = rng.uniform(0.5, 1.0)
            img += amp * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * sig ** 2))
        out[t] = np.round(np.clip(img, 0.0, 1.0) * 255).astype(np.uint8)
    return out


def write_idx_images(path, imgs: np.ndarray) -> Path:
    n, r, c = imgs.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", 2051, n, r, c))
        fh.write(imgs.tobytes())
    return Path(path)


def write_idx_labels(path, labels: np.ndarray) -> Path:
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", 2049, labels.size))
        fh.write(labels.astype(np.uint8).tobytes())
    return Path(path)


@pytest.fixture(scope="session")
def blob_tools():
    return make_blob_images, write_idx_images, write_idx_labels


@pytest.fixture(scope="session")
def mnist_scale_idx(tmp_path_factory):
    """28x28 IDX image file: real MNIST when CORRGAME_MNIST is set, else the
    blob surrogate (10000 images, seed 11)."""
    env = os.environ.get("CORRGAME_MNIST")
    if env:
        return Path(env)
    path = tmp_path_factory.mktemp("data") / "train-images-idx3-ubyte"
    return write_idx_images(path, make_blob_images(28, 10000, seed=11))


@pytest.fixture(scope="session")
def mnist_scale_dataset(mnist_scale_idx):
    return load_idx_images(mnist_scale_idx)


@pytest.fixture(scope="session")
def fig2_results(mnist_scale_idx, tmp_path_factory):
    """The fig2 preset family run for a 20000-step prefix, keyed by p."""
    results = {}
    for name, p in (("fig2_p001", 0.01), ("fig2_p003", 0.03), ("fig2_p005", 0.05)):
        config = parse_config(PRESET_DIR / f"{name}.cfg")
        config = replace(
            config,
            dataset=DatasetSpec(kind="mnist", path=str(mnist_scale_idx)),
            n_steps=20000,
            checkpoint_interval=0,
            out_dir=str(tmp_path_factory.mktemp(name)),
        )
        results[p] = run_training(config)
    return results


@pytest.fixture(scope="session")
def kappa100_result(tmp_path_factory):
    """Stiff-competition run (kappa=100, k = rho/omega = 10) at a desk scale
    where the saturated vertex is reachable: 5x5 single-blob images, a
    stability-respecting eta_w (eta_w * kappa * n_inputs < 1), 50000 steps."""
    path = tmp_path_factory.mktemp("data5") / "blobs5-idx3-ubyte"
    write_idx_images(path, make_blob_images(5, 6000, seed=11, min_bumps=1,
                                            max_bumps=1, sig_lo=0.9, sig_hi=1.4))
    from corrgame.config import RunConfig
    config = RunConfig(
        dataset=DatasetSpec(kind="mnist", path=str(path)),
        params=HyperParams(p=0.05, q=0.2, kappa=100.0, rho=1.0, omega=0.1,
                           eta_w=3e-4, eta_l=0.1, max_sweeps=200),
        n_outputs=32, n_steps=50000, seed=3,
        out_dir=str(tmp_path_factory.mktemp("k100")), checkpoint_interval=0,
    )
    return run_training(config)


@pytest.fixture(scope="session")
def analog_results(mnist_scale_dataset, tmp_path_factory):
    """Analog-competition runs at gamma = 0.1 and 0.5, identical length."""
    from corrgame.config import RunConfig
    results = {}
    for gamma in (0.1, 0.5):
        config = RunConfig(
            dataset=DatasetSpec(),
            params=HyperParams(p=0.03, q=0.09, kappa=1.0, rho=1.0, gamma=gamma,
                               variant="rectified-analog", eta_w=0.001,
                               eta_l=0.1, max_sweeps=1000),
            n_outputs=64, n_steps=8000, seed=5,
            out_dir=str(tmp_path_factory.mktemp(f"analog{gamma}")),
            checkpoint_interval=0,
        )
        results[gamma] = run_training(config, dataset=mnist_scale_dataset)
    return results
