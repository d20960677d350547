"""The objects of the correlation game.

A network is scored by how strongly its outputs correlate with its inputs,
subject to a ceiling on how strongly the outputs correlate with each other.
This script builds those pieces: second-moment correlation matrices and the
constraint matrix whose diagonal (q^2) caps output power and whose
off-diagonal (p^2) caps output similarity.
"""

import numpy as np

from corrgame import HyperParams, build_constraint_matrix, correlations
from corrgame.metrics import pairwise_cosine

params = HyperParams(p=0.03, q=0.09)
D = build_constraint_matrix(params, n_outputs=4)
print("constraint matrix D (diag q^2, off-diag p^2):")
print(D)

# correlation matrices are plain second moments: no mean subtraction,
# natural for sparse nonnegative signals
rng = np.random.default_rng(0)
U = rng.uniform(0.0, 1.0, size=(6, 500))      # inputs x timesteps
X = np.maximum(rng.normal(size=(4, 500)), 0)  # some rectified activity
pair = correlations(X, U)
print("\noutput-input correlations XU^T/T:", pair.output_input.shape)
print("output-output correlations XX^T/T:\n", np.round(pair.output_output, 3))

# if a pair of outputs saturates its constraints exactly, its cosine
# similarity is pinned at (p/q)^2 -- the game's "decorrelation set point"
X_sat = np.linalg.cholesky(build_constraint_matrix(params, 2)) * np.sqrt(2)
print("\ncosine at constraint saturation:", pairwise_cosine(X_sat)[0, 1])
print("(p/q)^2 =", (params.p / params.q) ** 2)
print("p/q = 0 would be winner-take-all; p/q = 1 would make outputs identical.")
