"""Spectral propagation of sector amplitudes.

The sector Hamiltonian is real symmetric, so ``H = V diag(lam) V^T`` and the
amplitudes at any time follow from ``V exp(-i lam t) V^T psi0`` without step
size error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blocks import DENSE_CAP, SectorBlocks, assemble_hamiltonian
from .errors import NumericError

__all__ = ["SectorPropagator", "AmplitudeTrajectory", "diagonalize", "propagate", "evolve_sector"]


@dataclass(frozen=True)
class SectorPropagator:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    m: int | None = None
    n_y: int = 0

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def amplitudes(self, initial, times) -> np.ndarray:
        """Array of shape ``(len(times), dim)`` with the evolved state at each time."""
        initial = np.asarray(initial, dtype=complex)
        if initial.shape != (self.dim,):
            raise ValueError(f"initial state has shape {initial.shape}, expected ({self.dim},)")
        times = np.atleast_1d(np.asarray(times, dtype=float))
        V = self.eigenvectors
        coeff = V.T @ initial
        phases = np.exp(-1j * np.outer(times, self.eigenvalues))
        return (phases * coeff) @ V.T


@dataclass(frozen=True)
class AmplitudeTrajectory:
    times: np.ndarray
    y_amps: np.ndarray
    x_amps: np.ndarray

    @property
    def amplitudes(self) -> np.ndarray:
        return np.hstack([self.y_amps, self.x_amps])

    def norms(self) -> np.ndarray:
        return (np.sum(np.abs(self.y_amps) ** 2, axis=1)
                + np.sum(np.abs(self.x_amps) ** 2, axis=1))


def diagonalize(H: np.ndarray, *, m: int | None = None, n_y: int = 0) -> SectorPropagator:
    """Eigendecomposition of a sector Hamiltonian (eigenvalues ascending)."""
    H = np.asarray(H, dtype=float)
    if not np.all(np.isfinite(H)):
        raise ValueError("Hamiltonian has non-finite entries")
    try:
        lam, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver failed for sector m={m}: {exc}") from exc
    lam.setflags(write=False)
    V.setflags(write=False)
    return SectorPropagator(lam, V, m, n_y)


def propagate(prop: SectorPropagator, initial, times) -> AmplitudeTrajectory:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    amps = prop.amplitudes(initial, times)
    return AmplitudeTrajectory(times, amps[:, :prop.n_y], amps[:, prop.n_y:])


def evolve_sector(blocks: SectorBlocks, initial, times, cap: int = DENSE_CAP) -> AmplitudeTrajectory:
    """Build, diagonalize and propagate one sector in a single call."""
    prop = diagonalize(assemble_hamiltonian(blocks, cap), m=blocks.m, n_y=len(blocks.b_down))
    return propagate(prop, initial, times)
