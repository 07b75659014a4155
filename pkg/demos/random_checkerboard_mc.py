"""Monte Carlo over checkerboard realisations: the ergodic limit forming.

For a stationary ergodic coefficient field the scaled cell minima
converge almost surely to a deterministic constant, so the across-seed
spread of the per-realisation estimates must shrink as the cell grows.
This script runs a small ensemble at increasing cell sizes and prints
the mean, the sample standard deviation and the normal-approximation
95 percent half-width.
"""

import numpy as np

from cellhom import make_checkerboard, mc_expectation

SEEDS = list(range(1, 9))
XI = np.array([[1.0, 0.0]])

model = make_checkerboard(0, 1.0, 2.0)
print(f"checkerboard a ~ U[1,2], {len(SEEDS)} seeds, effective bulk density at xi = {XI.tolist()}")
print(f"{'r':>4} {'mean':>8} {'std':>8} {'ci95':>8}  per-seed values")
for r in (4.0, 8.0, 16.0):
    est = mc_expectation(model, "f_hom", XI, SEEDS, r, h=0.25)
    ens = est.ensemble
    vals = " ".join(f"{v:.3f}" for v in ens["values"])
    print(f"{r:4.0f} {ens['mean']:8.4f} {ens['std']:8.4f} {ens['halfwidth95']:8.4f}  {vals}")

print()
print("The spread is the ergodicity diagnostic: it shrinks with r while the")
print("mean settles toward the deterministic effective coefficient.")
