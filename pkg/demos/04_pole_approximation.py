"""How good is the pole approximation at large Zeeman splitting?

PA0 keeps the bare diagonal levels. PA1 lets each electron-down configuration
interact only with its own flipped partners, which is a scalar secular
equation per configuration. Both become exact as eps / A grows.

Run: python demos/04_pole_approximation.py
"""

import numpy as np

from qdspin import CouplingSet, evolve_sector, sector_blocks
from qdspin.laplace_m0 import exact_y_branch_poles, pole_approx_amplitudes, y_branch_poles

n, a = 6, 1.0
print(f"N={n}, uniform A={a}: max Y-branch pole error")
print(f"{'eps/A':>7} {'m':>3} {'PA0':>11} {'PA1':>11}")
for ratio in (10, 100, 1000):
    cs = CouplingSet.uniform(n, a, epsilon_e=ratio * a)
    for m in (1, 2, 3):
        exact = exact_y_branch_poles(cs, m)
        e0 = np.max(np.abs(np.sort(y_branch_poles(cs, m, "PA0")) - exact))
        e1 = np.max(np.abs(np.sort(y_branch_poles(cs, m, "PA1")) - exact))
        print(f"{ratio:7d} {m:3d} {e0:11.3e} {e1:11.3e}")
print()

# Time domain: one flipped nucleus, electron down, inhomogeneous couplings.
cs = CouplingSet(np.linspace(1.0, 0.4, n), epsilon_e=20.0)
blocks = sector_blocks(cs, 1)
psi0 = np.zeros(blocks.dim, complex)
psi0[2] = 1.0
t = np.linspace(0, 100, 500)
exact = evolve_sector(blocks, psi0, t)
for variant in ("PA0", "PA1"):
    approx = pole_approx_amplitudes(blocks, psi0, t, variant)
    err = np.max(np.abs(approx.y_amps - exact.y_amps))
    drift = np.max(np.abs(approx.norms() - 1.0))
    print(f"{variant}: max |Y error| = {err:.3e}, norm drift = {drift:.3e}")
