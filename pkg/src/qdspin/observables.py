"""Global state assembly and electron-spin observables.

A state is stored sector by sector as a weight ``C`` and an amplitude column
``[Y | X]``. Only the products ``C * amplitude`` are physical. Sectors never mix
under the Hamiltonian, so ``s_z`` is a sum over sectors, while the transverse
components pair the X branch of sector ``m - 1`` with the Y branch of sector
``m``. Both branches list the same down-sets (popcount ``m``) in the same
order, so the pairing is an aligned dot product.

``s_plus`` below is the raw pairing sum ``<down|rho_e|up>``, which equals
``(s_x + i s_y) / 2``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .basis import enumerate_sector, locate, mz_value, sector_dims
from .blocks import SectorBlocks, build_blocks
from .errors import NumericError
from .evolver import AmplitudeTrajectory, evolve_sector
from .model import CouplingSet

__all__ = [
    "StateSpec",
    "SectorSeries",
    "SpinTrajectory",
    "from_product_state",
    "from_amplitudes",
    "normalize",
    "global_norm",
    "s_z_of",
    "s_plus_of",
    "spin_vector",
    "reduced_density_matrix",
    "evolve_state",
    "assemble_trajectory",
    "write_csv",
    "read_csv",
]

BLOCH_TOL = 1e-8
ROUNDING_WEIGHT = 1e-15


@dataclass(frozen=True)
class StateSpec:
    """Sector weights and per-sector ``[Y | X]`` amplitude columns at ``t = 0``."""

    n_nuclei: int
    weights: Mapping[int, complex]
    amplitudes: Mapping[int, np.ndarray]

    def __post_init__(self):
        if set(self.weights) != set(self.amplitudes):
            raise ValueError("weights and amplitudes must cover the same sectors")
        for m, amp in self.amplitudes.items():
            d = sum(sector_dims(self.n_nuclei, m))
            if np.shape(amp) != (d,):
                raise ValueError(f"sector m={m} needs {d} amplitudes, got {np.shape(amp)}")

    @property
    def sectors(self) -> list[int]:
        """Populated sectors in ascending order."""
        return sorted(m for m in self.weights
                      if self.weights[m] != 0 and np.any(self.amplitudes[m] != 0))

    def column(self, m: int) -> np.ndarray:
        """``C(m) * amplitude`` of sector ``m`` (zeros if absent)."""
        if m in self.weights:
            return self.weights[m] * np.asarray(self.amplitudes[m], dtype=complex)
        return np.zeros(sum(sector_dims(self.n_nuclei, m)), dtype=complex)


def from_amplitudes(n_nuclei: int, columns: Mapping[int, np.ndarray],
                    weights: Mapping[int, complex] | None = None) -> StateSpec:
    cols = {m: np.asarray(v, dtype=complex) for m, v in columns.items()}
    w = {m: complex(weights[m]) if weights else 1.0 + 0j for m in cols}
    return StateSpec(n_nuclei, w, cols)


def from_product_state(cs: CouplingSet | int, theta: float, phi: float, nuclear_mask: int
                       ) -> StateSpec:
    """Split ``(cos(theta/2)|up> + exp(i phi) sin(theta/2)|down>) x |mask>`` into sectors.

    The down part sits in the Y branch of sector ``popcount(mask)``, the up
    part in the X branch of sector ``popcount(mask) - 1``. A component whose
    weight is pure rounding (below ``1e-15``, as ``cos(pi/2)``) is dropped so
    that cardinal directions populate a single sector.
    """
    n = cs if isinstance(cs, int) else cs.n_nuclei
    up_w = np.cos(theta / 2.0)
    down_w = np.exp(1j * phi) * np.sin(theta / 2.0)
    weights, amps = {}, {}
    for electron_up, w in ((True, up_w), (False, down_w)):
        if abs(w) < ROUNDING_WEIGHT:
            continue
        m, branch, idx = locate(n, electron_up, nuclear_mask)
        ny, nx = sector_dims(n, m)
        col = np.zeros(ny + nx, dtype=complex)
        col[idx if branch == "Y" else ny + idx] = 1.0
        weights[m] = complex(w)
        amps[m] = col
    return StateSpec(n, weights, amps)


def global_norm(spec: StateSpec) -> float:
    return float(sum(abs(spec.weights[m]) ** 2 * np.sum(np.abs(spec.amplitudes[m]) ** 2)
                     for m in spec.weights))


def normalize(spec: StateSpec) -> StateSpec:
    """Rescale the weights so the total norm is one; amplitude columns are untouched."""
    total = global_norm(spec)
    if not total > 0:
        raise ValueError("cannot normalize the zero state")
    scale = 1.0 / np.sqrt(total)
    return StateSpec(spec.n_nuclei, {m: w * scale for m, w in spec.weights.items()},
                     dict(spec.amplitudes))


@dataclass
class SectorSeries:
    """Weighted amplitudes ``C * [Y | X]`` of one sector sampled on a time grid."""

    m: int
    n_y: int
    values: np.ndarray  # (T, d)

    @property
    def y(self) -> np.ndarray:
        return self.values[:, :self.n_y]

    @property
    def x(self) -> np.ndarray:
        return self.values[:, self.n_y:]


def s_z_of(series: Mapping[int, SectorSeries]) -> np.ndarray:
    """``sum_m (|X|^2 - |Y|^2)`` over weighted sector amplitudes, per time."""
    total = None
    for s in series.values():
        part = np.sum(np.abs(s.x) ** 2, axis=1) - np.sum(np.abs(s.y) ** 2, axis=1)
        total = part if total is None else total + part
    return total


def s_plus_of(series: Mapping[int, SectorSeries]) -> np.ndarray:
    """Transverse pairing sum ``sum_S conj(X_S) Y_S`` across adjacent sectors."""
    total = None
    for m, lower in series.items():
        upper = series.get(m - 1)
        if upper is None or lower.n_y == 0:
            continue
        part = np.sum(np.conj(upper.x) * lower.y, axis=1)
        total = part if total is None else total + part
    if total is None:
        any_series = next(iter(series.values()))
        return np.zeros(any_series.values.shape[0], dtype=complex)
    return total


def spin_vector(series: Mapping[int, SectorSeries]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    sp = s_plus_of(series)
    return 2.0 * sp.real, 2.0 * sp.imag, s_z_of(series)


def reduced_density_matrix(s) -> np.ndarray:
    """``(I + s . sigma) / 2`` for a Bloch vector ``s``; basis order ``(up, down)``."""
    sx, sy, sz = (float(v) for v in s)
    length = np.sqrt(sx * sx + sy * sy + sz * sz)
    if length > 1.0 + BLOCH_TOL:
        raise NumericError(f"Bloch vector length {length:.12g} exceeds 1")
    return 0.5 * np.array([[1.0 + sz, sx - 1j * sy], [sx + 1j * sy, 1.0 - sz]])


@dataclass
class SpinTrajectory:
    times: np.ndarray
    s_x: np.ndarray
    s_y: np.ndarray
    s_z: np.ndarray
    norm: np.ndarray
    n_nuclei: int = 0
    sectors: dict[int, SectorSeries] = field(default_factory=dict, repr=False)

    def bloch_length(self) -> np.ndarray:
        return np.sqrt(self.s_x ** 2 + self.s_y ** 2 + self.s_z ** 2)

    def mz_expectation(self) -> np.ndarray:
        """``<M_z>(t)`` from the sector populations."""
        total = np.zeros(len(self.times))
        for m, s in self.sectors.items():
            total += mz_value(self.n_nuclei, m) * np.sum(np.abs(s.values) ** 2, axis=1)
        return total

    def density_matrices(self) -> np.ndarray:
        return np.array([reduced_density_matrix(v) for v in zip(self.s_x, self.s_y, self.s_z)])

    def check(self, norm_tol: float = 1e-10, bloch_tol: float = 1e-10) -> list[str]:
        """Invariant violations as readable messages (empty if all hold)."""
        problems = []
        drift = float(np.max(np.abs(self.norm - 1.0))) if len(self.norm) else 0.0
        if drift > norm_tol:
            problems.append(f"norm drift {drift:.3g} exceeds {norm_tol:g}")
        excess = float(np.max(self.bloch_length() - 1.0)) if len(self.times) else 0.0
        if excess > bloch_tol:
            problems.append(f"Bloch vector exceeds unit length by {excess:.3g}")
        return problems


def assemble_trajectory(n_nuclei: int, times, series: dict[int, SectorSeries]
                        ) -> SpinTrajectory:
    times = np.asarray(times, dtype=float)
    sx, sy, sz = spin_vector(series)
    norm = sum(np.sum(np.abs(s.values) ** 2, axis=1) for s in series.values())
    return SpinTrajectory(times, sx, sy, sz, np.asarray(norm, dtype=float), n_nuclei, series)


SectorSolver = Callable[[SectorBlocks, np.ndarray, np.ndarray], AmplitudeTrajectory]


def _spectral(blocks: SectorBlocks, initial: np.ndarray, times: np.ndarray) -> AmplitudeTrajectory:
    return evolve_sector(blocks, initial, times)


def evolve_state(cs: CouplingSet, spec: StateSpec, times, solver: SectorSolver | None = None,
                 map_fn=map) -> SpinTrajectory:
    """Evolve every populated sector and assemble the spin trajectory.

    ``solver`` maps ``(blocks, C * column, times)`` to amplitudes; it defaults
    to exact spectral propagation. ``map_fn`` lets callers fan sectors out to a
    worker pool; results are reduced in ascending sector order.
    """
    if spec.n_nuclei != cs.n_nuclei:
        raise ValueError("state and couplings disagree on N")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    solver = solver or _spectral
    sectors = spec.sectors

    def job(m):
        blocks = build_blocks(cs, enumerate_sector(cs.n_nuclei, m))
        traj = solver(blocks, spec.column(m), times)
        return SectorSeries(m, len(blocks.b_down), traj.amplitudes)

    series = {s.m: s for s in map_fn(job, sectors)}
    return assemble_trajectory(cs.n_nuclei, times, dict(sorted(series.items())))


def write_csv(traj: SpinTrajectory, path) -> None:
    """``t,s_x,s_y,s_z,norm`` with 17 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "s_x", "s_y", "s_z", "norm"])
        for row in zip(traj.times, traj.s_x, traj.s_y, traj.s_z, traj.norm):
            writer.writerow([f"{v:.17g}" for v in row])


def read_csv(path) -> dict[str, np.ndarray]:
    data = np.genfromtxt(path, delimiter=",", names=True)
    return {name: np.atleast_1d(data[name]) for name in data.dtype.names}
