"""The learning rules, one stimulus at a time.

Feedforward weights strengthen under coactivity but compete for a fixed
per-neuron resource; lateral weights strengthen when two outputs fire
together beyond the target p^2 (anti-Hebbian: more coactivity, more
inhibition); each diagonal gain tracks its neuron's power toward q^2.
"""

import numpy as np

from corrgame import (
    DynamicsConfig,
    HyperParams,
    NetworkState,
    apply_plasticity,
    solve_rectified,
)
from corrgame.data_io import synthetic_correlated

params = HyperParams(p=0.05, q=0.15, kappa=1.0, rho=1.0, omega=0.1,
                     eta_w=0.005, eta_l=0.1, max_sweeps=500)
dataset = synthetic_correlated(n_inputs=30, n_steps=2000, n_clusters=5, seed=2)

rng = np.random.default_rng(0)
W = rng.uniform(0.0, 1.0, size=(10, 30))
W *= params.rho / W.sum(axis=1, keepdims=True)
state = NetworkState(W=W, L=np.eye(10), theta=np.zeros(10))
cfg = DynamicsConfig.from_hyperparams(params)

def snapshot(tag):
    sums = state.W.sum(axis=1)
    print(f"{tag}: row sums {sums.min():.3f}..{sums.max():.3f}, "
          f"max lateral {state.L[~np.eye(10, dtype=bool)].max():.3f}, "
          f"gain range {np.diag(state.L).min():.2f}..{np.diag(state.L).max():.2f}")

snapshot("before")
for t in range(2000):
    u = dataset.column(t)
    record = solve_rectified(u, state, cfg)
    apply_plasticity(state, record.x, u, params)  # W, then lateral, then gains
    if t in (99, 499, 1999):
        snapshot(f"step {t + 1:4d}")

# the competition term pins each row's total strength near rho, so learning
# reallocates strength across a neuron's synapses instead of growing them all
print("\nper-neuron surviving synapses (of 30):",
      (state.W > 1e-6 * params.omega).sum(axis=1))
print("L stayed exactly symmetric:", bool(np.array_equal(state.L, state.L.T)))
