"""Exact dynamics of an electron spin hyperfine-coupled to N nuclear spins-1/2.

The Hamiltonian conserves total ``M_z``, so the ``2**(N+1)`` dimensional
problem splits into small sectors that are built and propagated independently.
"""

from .basis import (SectorBasis, enumerate_sector, locate, mz_value, rank_mask, sector_dims,
                    sector_range, total_state_count, unrank_mask)
from .blocks import (LaplaceBlocks, SectorBlocks, assemble_hamiltonian, build_blocks,
                     format_blocks, laplace_lhs, sector_blocks)
from .errors import CapacityError, DegeneratePolesError, NumericError
from .evolver import AmplitudeTrajectory, SectorPropagator, diagonalize, evolve_sector, propagate
from .model import CouplingSet, exponential_profile
from .observables import (SpinTrajectory, StateSpec, evolve_state, from_amplitudes,
                          from_product_state, normalize, read_csv, reduced_density_matrix,
                          write_csv)

__version__ = "0.1.0"

__all__ = [
    "AmplitudeTrajectory",
    "CapacityError",
    "CouplingSet",
    "DegeneratePolesError",
    "LaplaceBlocks",
    "NumericError",
    "SectorBasis",
    "SectorBlocks",
    "SectorPropagator",
    "SpinTrajectory",
    "StateSpec",
    "assemble_hamiltonian",
    "build_blocks",
    "diagonalize",
    "enumerate_sector",
    "evolve_sector",
    "evolve_state",
    "exponential_profile",
    "format_blocks",
    "from_amplitudes",
    "from_product_state",
    "laplace_lhs",
    "locate",
    "mz_value",
    "normalize",
    "propagate",
    "rank_mask",
    "read_csv",
    "reduced_density_matrix",
    "sector_blocks",
    "sector_dims",
    "sector_range",
    "total_state_count",
    "unrank_mask",
    "write_csv",
]
