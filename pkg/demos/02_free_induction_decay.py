"""Transverse decay of an electron spin prepared along +x.

The electron starts in +x and the nuclei are polarized (all up). The state then
lives in just two sectors: the fully polarized top state and the m = 0 sector.
Their interference gives s_x(t), which slowly dephases because the hyperfine
constants differ from nucleus to nucleus.

Run: python demos/02_free_induction_decay.py
"""

import numpy as np

from qdspin import CouplingSet, evolve_state, exponential_profile, from_product_state, write_csv
from qdspin import oracle

n = 10
cs = CouplingSet(exponential_profile(n, a_max=1.0, gamma=0.25), epsilon_e=0.5)
spec = from_product_state(cs, theta=np.pi / 2, phi=0.0, nuclear_mask=0)
print("populated sectors:", spec.sectors)

t = np.linspace(0, 200, 2001)
traj = evolve_state(cs, spec, t)
print(f"{'t':>8} {'s_x':>10} {'s_y':>10} {'s_z':>10} {'|s|':>8}")
for i in range(0, len(t), 200):
    print(f"{t[i]:8.1f} {traj.s_x[i]:10.6f} {traj.s_y[i]:10.6f} {traj.s_z[i]:10.6f} "
          f"{traj.bloch_length()[i]:8.5f}")
print("invariant problems:", traj.check() or "none")

# A partially polarized bath populates more sectors but is just as cheap.
mixed = from_product_state(cs, np.pi / 2, 0.0, nuclear_mask=0b0000100101)
traj2 = evolve_state(cs, mixed, t)
print("\nthree nuclei flipped, sectors:", mixed.sectors,
      f"-> |s_perp| at t=200: {np.hypot(traj2.s_x[-1], traj2.s_y[-1]):.4f}")

# The full 2**(N+1) brute force agrees; it is only here as a check.
ref = oracle.full_spin_trajectory(cs, oracle.state_from_spec(spec), t[::50])
print("max |s_x - brute force| =", float(np.max(np.abs(traj.s_x[::50] - ref["s_x"]))))

write_csv(traj, "fid.csv")
print("wrote fid.csv")
