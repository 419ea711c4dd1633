"""How the 2**(N+1) states split into conserved-M_z sectors.

Run: python demos/01_sector_structure.py
"""

import numpy as np

from qdspin import CouplingSet, enumerate_sector, format_blocks, sector_blocks
from qdspin.cli import sector_table

# Every sector m pairs C(N, m) electron-down states with C(N, m+1) electron-up
# states that share one more flipped nucleus. The two ends (m = -1, m = N)
# hold a single fully polarized state each.
for n in (3, 4):
    print(f"N = {n}")
    print(sector_table(n))
    print()

# Configurations are bitmasks (bit k = nucleus k+1 down), listed in colex
# order, i.e. by increasing integer value.
basis = enumerate_sector(4, 1)
print("N=4, m=1 Y configs:", [f"{int(s):04b}" for s in basis.y_configs])
print("N=4, m=1 X configs:", [f"{int(s):04b}" for s in basis.x_configs])
print("rank of 1100b in X:", basis.rank("X", 0b1100))
print()

# The sector Hamiltonian is [[-diag(B_down), K], [K^T, diag(B_up)]] with
# K = A_l / 4 wherever one extra nucleus is flipped.
cs = CouplingSet([0.83, 0.41, 0.27], epsilon_e=0.6)
print(format_blocks(sector_blocks(cs, 1)))
print()

# Large sectors stay sparse until they are diagonalized.
big = sector_blocks(CouplingSet(np.linspace(1.0, 0.1, 16)), 3)
print(f"N=16, m=3: dim {big.dim}, K has {big.K.nnz} nonzeros out of "
      f"{big.K.shape[0] * big.K.shape[1]}")
