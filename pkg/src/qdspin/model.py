"""Physical parameters and the Hamiltonian matrix-element rule.

Every engine in the package (sector blocks, the full-space brute force, the
Liouville integrator) takes its matrix elements from this module, so the
conventions cannot drift apart.

Conventions
-----------
- hbar = 1; energies share one arbitrary unit and times are in its inverse.
- A nuclear configuration is an integer bitmask: bit ``k`` set means nucleus
  ``k + 1`` points down.
- Electron-down state with down-set ``S``: energy ``-(Omega - sum_{l in S} A_l)``.
- Electron-up state with down-set ``S'``: energy ``+(Omega - sum_{l in S'} A_l)``.
- Optional nuclear Zeeman term ``eps_N * (N - 2|S|)`` added to both.
- Flip element between ``|down; S>`` and ``|up; S + {l}>`` is ``A_l / 4``.

Here ``A = sum_k A_k / 2`` and ``Omega = eps + A``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "CouplingSet",
    "total_coupling",
    "omega",
    "shifted_energy",
    "nuclear_zeeman",
    "diag_energy",
    "diag_energies",
    "flip_element",
    "exponential_profile",
]

MAX_NUCLEI = 62


@dataclass(frozen=True)
class CouplingSet:
    """Hyperfine constants and Zeeman energies of one quantum dot.

    Parameters
    ----------
    couplings : sequence of float
        Per-nucleus hyperfine constants ``A_k``. Negative values are accepted;
        positive is the physical default.
    epsilon_e : float
        Electron Zeeman energy.
    epsilon_n : float, optional
        Nuclear Zeeman energy, 0 by default.
    """

    couplings: tuple[float, ...]
    epsilon_e: float = 0.0
    epsilon_n: float = 0.0
    _arr: np.ndarray = field(init=False, repr=False, compare=False)

    def __init__(self, couplings: Sequence[float], epsilon_e: float = 0.0,
                 epsilon_n: float = 0.0):
        values = tuple(float(a) for a in couplings)
        if not values:
            raise ValueError("at least one nucleus is required")
        if len(values) > MAX_NUCLEI:
            raise ValueError(f"at most {MAX_NUCLEI} nuclei fit in a bitmask, got {len(values)}")
        if not all(math.isfinite(a) for a in values):
            raise ValueError("hyperfine constants must be finite")
        if not (math.isfinite(epsilon_e) and math.isfinite(epsilon_n)):
            raise ValueError("Zeeman energies must be finite")
        object.__setattr__(self, "couplings", values)
        object.__setattr__(self, "epsilon_e", float(epsilon_e))
        object.__setattr__(self, "epsilon_n", float(epsilon_n))
        arr = np.array(values, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "_arr", arr)

    @classmethod
    def uniform(cls, n_nuclei: int, a: float, epsilon_e: float = 0.0,
                epsilon_n: float = 0.0) -> CouplingSet:
        return cls([a] * n_nuclei, epsilon_e, epsilon_n)

    @property
    def n_nuclei(self) -> int:
        return len(self.couplings)

    @property
    def a(self) -> np.ndarray:
        """Read-only array view of the hyperfine constants."""
        return self._arr

    @property
    def total(self) -> float:
        return total_coupling(self)

    @property
    def omega(self) -> float:
        return omega(self)


def total_coupling(cs: CouplingSet) -> float:
    """Return ``A = sum_k A_k / 2``."""
    return float(np.sum(cs.a)) / 2.0


def omega(cs: CouplingSet) -> float:
    """Return ``Omega = eps + A``, the energy scale of the fully polarized bath."""
    return cs.epsilon_e + total_coupling(cs)


def _check_masks(cs: CouplingSet, masks: np.ndarray) -> None:
    if masks.size and (masks.min() < 0 or masks.max() >= (1 << cs.n_nuclei)):
        raise ValueError(f"nuclear bitmask outside {cs.n_nuclei} bits")


def _down_sums(cs: CouplingSet, masks: np.ndarray) -> np.ndarray:
    # sum of A_l over set bits; accumulated in nucleus order for reproducible rounding
    out = np.zeros(masks.shape, dtype=float)
    for k, a_k in enumerate(cs.a):
        out += np.where((masks >> k) & 1, a_k, 0.0)
    return out


def shifted_energy(cs: CouplingSet, masks) -> np.ndarray:
    """``B_S = eps + A - sum_{l in S} A_l`` for each down-set bitmask ``S``."""
    masks = np.asarray(masks, dtype=np.int64)
    _check_masks(cs, masks)
    return omega(cs) - _down_sums(cs, masks)


def nuclear_zeeman(cs: CouplingSet, masks) -> np.ndarray:
    """``eps_N * (N - 2|S|)``; identically zero when ``eps_N == 0``."""
    masks = np.asarray(masks, dtype=np.int64)
    _check_masks(cs, masks)
    if cs.epsilon_n == 0.0:
        return np.zeros(masks.shape, dtype=float)
    popcount = np.zeros(masks.shape, dtype=np.int64)
    for k in range(cs.n_nuclei):
        popcount += (masks >> k) & 1
    return cs.epsilon_n * (cs.n_nuclei - 2 * popcount).astype(float)


def diag_energies(cs: CouplingSet, electron_up: bool, masks) -> np.ndarray:
    """Vectorized :func:`diag_energy` over an array of down-set bitmasks."""
    sign = 1.0 if electron_up else -1.0
    return sign * shifted_energy(cs, masks) + nuclear_zeeman(cs, masks)


def diag_energy(cs: CouplingSet, electron_up: bool, down_set: int) -> float:
    """Diagonal Hamiltonian element of ``|electron; down_set>``.

    >>> cs = CouplingSet([2.0])
    >>> diag_energy(cs, False, 0)
    -1.0
    """
    return float(diag_energies(cs, electron_up, np.array([down_set]))[0])


def flip_element(cs: CouplingSet, nucleus: int) -> float:
    """Coupling between ``|down; S>`` and ``|up; S + {nucleus}>`` (0-based index)."""
    return float(cs.a[nucleus]) / 4.0


def exponential_profile(n_nuclei: int, a_max: float, gamma: float) -> list[float]:
    """Hyperfine profile ``A_k = a_max * exp(-k * gamma)`` for ``k = 0 .. N-1``."""
    return [a_max * math.exp(-k * gamma) for k in range(n_nuclei)]
