"""The m = 0 sector in closed form.

With the electron down and every nucleus up, the dynamics is a single level
coupled to N others. The transformed amplitudes are rational; their poles are
the roots of a degree N+1 polynomial D(z), and summing residues gives Y_0(t)
and X_j(t) without any matrix exponential.

Run: python demos/03_closed_form_m0.py
"""

import numpy as np

from qdspin import CouplingSet, assemble_hamiltonian, evolve_sector, sector_blocks
from qdspin.laplace_m0 import char_poly_coeffs, find_poles, invert_xj, invert_y0, rational_solution

# One nucleus: a two-level problem with splitting A/2.
a = 1.0
sol = rational_solution(CouplingSet([a]), 1.0, [0.0])
t = np.linspace(0, 4 * np.pi, 5)
print("N=1 poles:", sol.poles, " (expected -3a/4, -a/4)")
print("|Y_0(t)|^2:", np.round(np.abs(invert_y0(sol, t)) ** 2, 12))
print("cos^2(at/4):", np.round(np.cos(a * t / 4) ** 2, 12))
print()

# Four nuclei: the poles are exactly the sector eigenvalues.
cs = CouplingSet([1.0, 0.7, 0.45, 0.3], epsilon_e=0.5)
poly = char_poly_coeffs(cs)
poles = find_poles(poly)
eig = np.linalg.eigvalsh(assemble_hamiltonian(sector_blocks(cs, 0)))
print("D(z) coefficients:", np.round(poly.coeffs, 6))
print("poles      :", poles)
print("eigenvalues:", eig)
print()

# Residue route against spectral propagation from a mixed start.
y0, x0 = 0.8, np.array([0.0, 0.6j, 0.0, 0.0])
sol = rational_solution(cs, y0, x0)
t = np.linspace(0, 50, 400)
spectral = evolve_sector(sector_blocks(cs, 0), np.concatenate([[y0], x0]), t)
dy = np.max(np.abs(invert_y0(sol, t) - spectral.y_amps[:, 0]))
dx = max(np.max(np.abs(invert_xj(sol, j, t) - spectral.x_amps[:, j])) for j in range(4))
print(f"residue vs spectral: max |dY| = {dy:.2e}, max |dX| = {dx:.2e}")
print("residue weights sum to Y_0(0):", np.sum(sol.y_residues))
