"""Why synapses are eliminated: the conjugate of the competition penalty.

Holding a neuron's input correlations c fixed, the best weight vector under
stiff competition (row sum pinned at rho, entries capped at omega) simply
saturates the rho/omega most correlated inputs and zeroes the rest.  The
analog model (weight decay gamma instead of a cap) soft-thresholds instead:
gamma * w_a = max(c_a - theta, 0), with survivors still the top-correlated
inputs, now with graded strengths.
"""

import numpy as np

from corrgame import conjugate_analog_kkt, conjugate_topk, elimination_trigger
from corrgame.verify import enumerate_topk, nnls_conjugate_analog

c = np.array([0.9, 0.2, 0.5, 0.05, 0.7, 0.3])

# saturated competition: rho/omega = 3 survivors at full strength
sol = conjugate_topk(c, rho=0.3, omega=0.1)
print("saturated form: w =", sol.w, "value =", round(sol.value, 4))
print("matches exhaustive enumeration:",
      bool(np.array_equal(sol.w, enumerate_topk(c, 0.3, 0.1).w)))

# analog competition: graded survivors above a threshold
for gamma in (0.05, 0.2, 0.6):
    sol = conjugate_analog_kkt(c, gamma=gamma, kappa=5.0, rho=1.0)
    print(f"\ngamma={gamma}: {sol.k} survivors, theta={sol.theta:.4f}")
    print("  w =", np.round(sol.w, 4))
    oracle = nnls_conjugate_analog(c, gamma=gamma, kappa=5.0, rho=1.0)
    print("  active-set oracle agrees to", float(np.abs(sol.w - oracle.w).max()))

# the trigger: elimination happens exactly when the per-synapse resource
# share rho*gamma/N is smaller than the spread mean(c) - min(c)
print("\nelimination trigger at stiff competition:")
for gamma in (0.1, 2.0, 6.0):
    fired = elimination_trigger(c, gamma=gamma, rho=1.0)
    k = conjugate_analog_kkt(c, gamma=gamma, kappa=1e6, rho=1.0).k
    print(f"  gamma={gamma}: trigger={fired}, solver keeps {k}/{c.size}")

# kappa=0 removes the coupling entirely: the objective value reduces to the
# squared norm of the (rectified) correlations
sol = conjugate_analog_kkt(c, gamma=1.0, kappa=0.0, rho=1.0)
print("\nkappa=0 limit: 2*gamma*value =", 2 * sol.value, " ||c||^2 =", c @ c)
