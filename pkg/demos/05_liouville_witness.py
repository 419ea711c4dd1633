"""The density-matrix route as an independent witness.

Splitting rho by electron spin into blocks A (up-up), B (up-down) and
C (down-down) gives coupled matrix equations for the nuclear operators. For a
pure start they must reproduce the Schrodinger evolution; the electron spin is
s_z = tr A - tr C and tr B = (s_x - i s_y) / 2.

Run: python demos/05_liouville_witness.py
"""

import numpy as np

from qdspin import CouplingSet
from qdspin import oracle

cs = CouplingSet([0.9, 0.6, 0.35], epsilon_e=0.4)
psi = oracle.product_state(3, theta=2.0, phi=0.3, nuclear_mask=0b010)
t = np.linspace(0, 30, 7)
blocks = oracle.liouville_evolve(oracle.BlockDensity.from_state(psi), cs, t)
ref = oracle.full_spin_trajectory(cs, psi, t)

print(f"{'t':>6} {'s_z Liouville':>15} {'s_z Schrodinger':>16} {'tr A + tr C':>13}")
for k, b in enumerate(blocks):
    print(f"{t[k]:6.1f} {b.spin()[2]:15.10f} {ref['s_z'][k]:16.10f} {b.trace():13.10f}")

# A mixed nuclear bath, which the sector route cannot start from directly.
d = 1 << cs.n_nuclei
mixed = oracle.BlockDensity(np.eye(d) / (2 * d), np.eye(d) / (2 * d), np.eye(d) / (2 * d))
out = oracle.liouville_evolve(mixed, cs, np.linspace(0, 60, 4))
print("\nelectron +x with an unpolarized bath:")
for tt, b in zip(np.linspace(0, 60, 4), out):
    sx, sy, sz = b.spin()
    print(f"t={tt:5.1f}  s=({sx:+.4f}, {sy:+.4f}, {sz:+.4f})")
