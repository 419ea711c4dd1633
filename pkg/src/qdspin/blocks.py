"""Per-sector Hamiltonian blocks.

Within sector ``m`` the Schrodinger equation reads::

    i dY/dt = -diag(b_down) Y + K X
    i dX/dt =  K^T Y + diag(b_up) X

with ``K[i, j] = A_l / 4`` when X-config ``j`` is Y-config ``i`` plus nucleus
``l`` flipped down. The Laplace-domain form uses the same content with the
opposite sign on the coupling blocks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps

from .basis import SectorBasis, enumerate_sector, rank_masks
from .errors import CapacityError
from .model import CouplingSet, nuclear_zeeman, shifted_energy

__all__ = [
    "DENSE_CAP",
    "SectorBlocks",
    "LaplaceBlocks",
    "build_blocks",
    "sector_blocks",
    "assemble_hamiltonian",
    "laplace_lhs",
    "format_blocks",
    "set_label",
]

DENSE_CAP = 4096


@dataclass(frozen=True)
class SectorBlocks:
    """Diagonal energies and hyperfine coupling of one sector.

    Attributes
    ----------
    basis : SectorBasis
    b_down : ndarray
        ``B_S = eps + A - sum_{l in S} A_l`` for each Y-config.
    b_up : ndarray
        Same quantity for each X-config.
    zn_down, zn_up : ndarray
        Nuclear Zeeman shifts (all zero unless ``eps_N != 0``).
    K : scipy.sparse.csr_array
        ``C(N,m) x C(N,m+1)`` coupling with entries ``A_l / 4``.
    """

    basis: SectorBasis
    b_down: np.ndarray
    b_up: np.ndarray
    zn_down: np.ndarray
    zn_up: np.ndarray
    K: sps.csr_array

    @property
    def m(self) -> int:
        return self.basis.m

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def e_down(self) -> np.ndarray:
        """Signed diagonal energies of the Y branch."""
        return -self.b_down + self.zn_down

    @property
    def e_up(self) -> np.ndarray:
        """Signed diagonal energies of the X branch."""
        return self.b_up + self.zn_up

    @property
    def diagonal(self) -> np.ndarray:
        return np.concatenate([self.e_down, self.e_up])


def build_blocks(cs: CouplingSet, basis: SectorBasis) -> SectorBlocks:
    if basis.n_nuclei != cs.n_nuclei:
        raise ValueError(
            f"basis built for N={basis.n_nuclei} but couplings have N={cs.n_nuclei}")
    y, x = basis.y_configs, basis.x_configs
    rows, cols, vals = [], [], []
    for l, a_l in enumerate(cs.a):
        free = np.flatnonzero(((y >> l) & 1) == 0)
        if not free.size:
            continue
        rows.append(free)
        cols.append(rank_masks(y[free] | (1 << l), cs.n_nuclei))
        vals.append(np.full(free.size, a_l / 4.0))
    ny, nx = basis.dims
    if rows:
        K = sps.csr_array(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(ny, nx))
    else:
        K = sps.csr_array((ny, nx), dtype=float)
    K.sort_indices()
    return SectorBlocks(
        basis=basis,
        b_down=shifted_energy(cs, y),
        b_up=shifted_energy(cs, x),
        zn_down=nuclear_zeeman(cs, y),
        zn_up=nuclear_zeeman(cs, x),
        K=K,
    )


def sector_blocks(cs: CouplingSet, m: int) -> SectorBlocks:
    """Shortcut for ``build_blocks(cs, enumerate_sector(N, m))``."""
    return build_blocks(cs, enumerate_sector(cs.n_nuclei, m))


def assemble_hamiltonian(blocks: SectorBlocks, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense real-symmetric sector Hamiltonian ordered ``[Y | X]``."""
    d = blocks.dim
    if d > cap:
        raise CapacityError(
            f"sector N={blocks.basis.n_nuclei}, m={blocks.m} has dimension {d} > cap {cap}")
    ny = len(blocks.b_down)
    H = np.zeros((d, d))
    H[np.arange(d), np.arange(d)] = blocks.diagonal
    K = blocks.K.toarray()
    H[:ny, ny:] = K
    H[ny:, :ny] = K.T
    return H


@dataclass(frozen=True)
class LaplaceBlocks:
    """Partitioned matrix ``[[A, C], [D, B]]`` acting on the transformed amplitudes.

    ``[[A, C], [D, B]] @ (Ybar, Xbar) = i * (Y(0), X(0))`` with
    ``fbar(w) = integral_0^inf exp(-w t) f(t) dt``.
    """

    omega: complex
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def full(self) -> np.ndarray:
        return np.block([[self.A, self.C], [self.D, self.B]])

    def schur_y(self) -> np.ndarray:
        """``A - C B^-1 D``; its diagonal is the self-energy-shifted Y level."""
        b_inv = 1.0 / np.diag(self.B)
        return self.A - (self.C * b_inv) @ self.D

    def solve(self, y0, x0) -> tuple[np.ndarray, np.ndarray]:
        """Transformed amplitudes from the explicit partitioned solution."""
        y0 = np.asarray(y0, dtype=complex)
        x0 = np.asarray(x0, dtype=complex)
        b_inv = 1.0 / np.diag(self.B)
        rhs = y0 - (self.C * b_inv) @ x0
        ybar = 1j * np.linalg.solve(self.schur_y(), rhs) if len(y0) else y0
        xbar = b_inv * (1j * x0 - self.D @ ybar)
        return ybar, xbar


def laplace_lhs(blocks: SectorBlocks, omega: complex) -> LaplaceBlocks:
    iw = 1j * omega
    K = blocks.K.toarray()
    return LaplaceBlocks(
        omega=omega,
        A=np.diag(iw - blocks.e_down),
        B=np.diag(iw - blocks.e_up),
        C=-K.astype(complex),
        D=-K.T.astype(complex),
    )


def set_label(mask: int) -> str:
    """``{1,3}``-style label of a down-set bitmask (nuclei numbered from 1)."""
    members = [str(k + 1) for k in range(mask.bit_length()) if (mask >> k) & 1]
    return "{" + ",".join(members) + "}"


def format_blocks(blocks: SectorBlocks) -> str:
    """Plain-text listing of a sector's blocks for eyeballing or golden files."""
    basis = blocks.basis
    lines = [f"sector N={basis.n_nuclei} m={basis.m} Mz={basis.mz} dims={basis.dims}"]
    lines.append("Y configs: " + " ".join(set_label(int(s)) for s in basis.y_configs))
    lines.append("X configs: " + " ".join(set_label(int(s)) for s in basis.x_configs))
    lines.append("b_down: " + " ".join(f"{v:.12g}" for v in blocks.b_down))
    lines.append("b_up:   " + " ".join(f"{v:.12g}" for v in blocks.b_up))
    lines.append("K:")
    for row in blocks.K.toarray():
        lines.append("  " + " ".join(f"{v:10.6g}" for v in row))
    return "\n".join(lines)
