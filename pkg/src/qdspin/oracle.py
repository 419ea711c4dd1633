"""Brute-force reference engines in the full ``2**(N+1)`` space.

Two independent checks on the sector machinery:

1. Schrodinger evolution with the full Hamiltonian, built element by element
   from :mod:`qdspin.model`, followed by a partial trace over the nuclei.
2. The Liouville equation written for the electron blocks of the density
   matrix,

       rho = |up><up| x A + |up><down| x B + |down><up| x B^dag + |down><down| x C,

   integrated with adaptive fourth-order Runge-Kutta.

Full-space index is ``electron_bit * 2**N + nuclear_mask`` with electron bit
0 for up, so the first half of every vector is the electron-up part.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.sparse as sps

from .basis import enumerate_sector, sector_range
from .errors import CapacityError, NumericError
from .model import CouplingSet, diag_energies

__all__ = [
    "FULL_CAP_NUCLEI",
    "LIOUVILLE_CAP_NUCLEI",
    "build_full_hamiltonian",
    "mz_operator",
    "sector_permutation",
    "product_state",
    "state_from_spec",
    "evolve_full",
    "partial_trace_electron",
    "spin_from_rho",
    "full_spin_trajectory",
    "BlockDensity",
    "NuclearOperators",
    "nuclear_operators",
    "liouville_rhs",
    "liouville_superoperator",
    "liouville_evolve",
]

FULL_CAP_NUCLEI = 12
LIOUVILLE_CAP_NUCLEI = 6


def _check_cap(n: int, cap: int) -> None:
    if n > cap:
        raise CapacityError(f"N={n} exceeds the brute-force cap N<={cap} (dimension {2 ** (n + 1)})")


def build_full_hamiltonian(cs: CouplingSet) -> np.ndarray:
    n = cs.n_nuclei
    _check_cap(n, FULL_CAP_NUCLEI)
    half = 1 << n
    masks = np.arange(half, dtype=np.int64)
    H = np.zeros((2 * half, 2 * half))
    idx = np.arange(half)
    H[idx, idx] = diag_energies(cs, True, masks)
    H[half + idx, half + idx] = diag_energies(cs, False, masks)
    for l, a_l in enumerate(cs.a):
        src = masks[((masks >> l) & 1) == 0]          # electron down, nucleus l up
        dst = src | (1 << l)                          # electron up, nucleus l down
        H[half + src, dst] = a_l / 4.0
        H[dst, half + src] = a_l / 4.0
    return H


def mz_operator(n_nuclei: int) -> np.ndarray:
    """Diagonal of ``s_z + sum_k I_kz`` (units of 1/2) in the full basis."""
    masks = np.arange(1 << n_nuclei, dtype=np.int64)
    pop = np.array([bin(int(x)).count("1") for x in masks])
    nuclear = n_nuclei - 2 * pop
    return np.concatenate([1 + nuclear, -1 + nuclear]).astype(float)


def sector_permutation(n_nuclei: int) -> tuple[np.ndarray, list[int]]:
    """Full-space indices listed sector by sector (``[Y | X]`` within each), and block sizes."""
    half = 1 << n_nuclei
    order, sizes = [], []
    for m in sector_range(n_nuclei):
        basis = enumerate_sector(n_nuclei, m)
        order.extend(half + basis.y_configs)
        order.extend(basis.x_configs)
        sizes.append(basis.dim)
    return np.array(order, dtype=np.int64), sizes


def product_state(n_nuclei: int, theta: float, phi: float, nuclear_mask: int) -> np.ndarray:
    psi = np.zeros(2 << n_nuclei, dtype=complex)
    psi[nuclear_mask] = np.cos(theta / 2.0)
    psi[(1 << n_nuclei) + nuclear_mask] = np.exp(1j * phi) * np.sin(theta / 2.0)
    return psi


def state_from_spec(spec) -> np.ndarray:
    """Embed a sector-resolved :class:`~qdspin.observables.StateSpec` into the full space."""
    n = spec.n_nuclei
    psi = np.zeros(2 << n, dtype=complex)
    for m in spec.sectors:
        basis = enumerate_sector(n, m)
        col = spec.column(m)
        ny = len(basis.y_configs)
        psi[(1 << n) + basis.y_configs] = col[:ny]
        psi[basis.x_configs] = col[ny:]
    return psi


def evolve_full(H: np.ndarray, initial, times) -> np.ndarray:
    """States at each time, shape ``(len(times), dim)``, by spectral propagation."""
    initial = np.asarray(initial, dtype=complex)
    try:
        lam, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"full-space eigensolver failed: {exc}") from exc
    times = np.atleast_1d(np.asarray(times, dtype=float))
    coeff = V.T @ initial
    return (np.exp(-1j * np.outer(times, lam)) * coeff) @ V.T


def partial_trace_electron(state) -> np.ndarray:
    """Electron density matrix (basis ``up, down``) from a full state vector or density."""
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        psi = state.reshape(2, -1)
        return psi @ psi.conj().T
    d = state.shape[0] // 2
    return np.einsum("ajbj->ab", state.reshape(2, d, 2, d))


def spin_from_rho(rho_e) -> tuple[float, float, float]:
    rho_e = np.asarray(rho_e)
    return (2.0 * rho_e[0, 1].real, -2.0 * rho_e[0, 1].imag, (rho_e[0, 0] - rho_e[1, 1]).real)


def full_spin_trajectory(cs: CouplingSet, initial, times) -> dict[str, np.ndarray]:
    """Spin components and norm from brute-force evolution."""
    states = evolve_full(build_full_hamiltonian(cs), initial, times)
    half = 1 << cs.n_nuclei
    up, down = states[:, :half], states[:, half:]
    rho01 = np.sum(up * down.conj(), axis=1)
    return {
        "t": np.atleast_1d(np.asarray(times, dtype=float)),
        "s_x": 2.0 * rho01.real,
        "s_y": -2.0 * rho01.imag,
        "s_z": np.sum(np.abs(up) ** 2, axis=1) - np.sum(np.abs(down) ** 2, axis=1),
        "norm": np.sum(np.abs(states) ** 2, axis=1),
        "states": states,
    }


# --- Liouville route ----------------------------------------------------------

@dataclass(frozen=True)
class NuclearOperators:
    """``g_alpha = (1/2) sum_k A_k I_k,alpha`` and the nuclear Zeeman term, as dense matrices."""

    g_z: np.ndarray
    g_plus: np.ndarray
    g_minus: np.ndarray
    zeeman: np.ndarray
    epsilon_e: float


_I2 = np.eye(2)
_Z = np.diag([1.0, -1.0])
_RAISE = np.array([[0.0, 1.0], [0.0, 0.0]])   # down -> up, unit element
_LOWER = _RAISE.T


def _site_operator(op: np.ndarray, site: int, n: int) -> np.ndarray:
    # nucleus k lives on bit k, so the Kronecker chain runs from bit N-1 down to bit 0
    factors = [op if pos == site else _I2 for pos in range(n - 1, -1, -1)]
    return reduce(np.kron, factors)


def nuclear_operators(cs: CouplingSet) -> NuclearOperators:
    n = cs.n_nuclei
    _check_cap(n, LIOUVILLE_CAP_NUCLEI)
    dim = 1 << n
    g_z = np.zeros((dim, dim))
    g_p = np.zeros((dim, dim))
    total_z = np.zeros((dim, dim))
    for k, a_k in enumerate(cs.a):
        z_k = _site_operator(_Z, k, n)
        g_z += 0.5 * a_k * z_k
        g_p += 0.5 * a_k * _site_operator(_RAISE, k, n)
        total_z += z_k
    return NuclearOperators(g_z, g_p, g_p.T.copy(), cs.epsilon_n * total_z, cs.epsilon_e)


@dataclass(frozen=True)
class BlockDensity:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    @classmethod
    def from_density(cls, rho) -> BlockDensity:
        rho = np.asarray(rho, dtype=complex)
        d = rho.shape[0] // 2
        return cls(rho[:d, :d].copy(), rho[:d, d:].copy(), rho[d:, d:].copy())

    @classmethod
    def from_state(cls, psi) -> BlockDensity:
        psi = np.asarray(psi, dtype=complex)
        return cls.from_density(np.outer(psi, psi.conj()))

    def density(self) -> np.ndarray:
        return np.block([[self.A, self.B], [self.B.conj().T, self.C]])

    def trace(self) -> float:
        return float((np.trace(self.A) + np.trace(self.C)).real)

    def spin(self) -> tuple[float, float, float]:
        """``s_z = tr A - tr C`` and ``tr B = (s_x - i s_y) / 2``."""
        tr_b = np.trace(self.B)
        return 2.0 * tr_b.real, -2.0 * tr_b.imag, float((np.trace(self.A) - np.trace(self.C)).real)

    def nuclear_marginal(self) -> np.ndarray:
        return self.A + self.C


def _rhs_stacked(ops: NuclearOperators, A, B, C):
    eps = ops.epsilon_e
    gz, gp, gm, zn = ops.g_z, ops.g_plus, ops.g_minus, ops.zeeman
    Bd = B.conj().T
    hz = gz + zn
    # i dA = [g_z + Z, A] + (g_- B^dag - B g_+) / 2
    dA = hz @ A - A @ hz + 0.5 * (gm @ Bd - B @ gp)
    # i dB = {eps + g_z, B} + [Z, B] + (g_- C - A g_-) / 2
    dB = 2.0 * eps * B + gz @ B + B @ gz + zn @ B - B @ zn + 0.5 * (gm @ C - A @ gm)
    # i dC = -[g_z, C] + [Z, C] + (g_+ B - B^dag g_-) / 2
    hc = zn - gz
    dC = hc @ C - C @ hc + 0.5 * (gp @ B - Bd @ gm)
    return -1j * dA, -1j * dB, -1j * dC


def liouville_rhs(blocks: BlockDensity, cs: CouplingSet,
                  ops: NuclearOperators | None = None) -> BlockDensity:
    """Time derivative of the density blocks."""
    ops = ops or nuclear_operators(cs)
    return BlockDensity(*_rhs_stacked(ops, blocks.A, blocks.B, blocks.C))


def liouville_superoperator(ops: NuclearOperators) -> sps.csr_array:
    """Sparse generator ``L`` with ``d/dt (A, B, B^dag, C) = L (A, B, B^dag, C)``.

    Blocks are flattened row-major, so ``X @ M`` maps to ``kron(X, I)`` and
    ``M @ X`` to ``kron(I, X.T)``. Carrying ``B^dag`` as its own unknown keeps
    the map complex-linear.
    """
    d = ops.g_z.shape[0]
    eye = sps.identity(d, format="csr")

    def left(X):
        return sps.kron(sps.csr_array(X), eye, format="csr")

    def right(X):
        return sps.kron(eye, sps.csr_array(X.T), format="csr")

    gz, gp, gm, zn = ops.g_z, ops.g_plus, ops.g_minus, ops.zeeman
    hz, hc = gz + zn, zn - gz
    comm_a = left(hz) - right(hz)
    comm_c = left(hc) - right(hc)
    b_gen = 2.0 * ops.epsilon_e * sps.identity(d * d) + left(gz) + right(gz) + left(zn) - right(zn)
    bd_gen = 2.0 * ops.epsilon_e * sps.identity(d * d) + right(gz) + left(gz) + right(zn) - left(zn)
    z = None
    rows = [
        [-1j * comm_a, 0.5j * right(gp), -0.5j * left(gm), z],
        [0.5j * right(gm), -1j * b_gen, z, -0.5j * left(gm)],
        [-0.5j * left(gp), z, 1j * bd_gen, 0.5j * right(gp)],
        [z, -0.5j * left(gp), 0.5j * right(gm), -1j * comm_c],
    ]
    return sps.csr_array(sps.block_array(rows, format="csr"))


def _rk4_step(L, y, h):
    k1 = L @ y
    k2 = L @ (y + 0.5 * h * k1)
    k3 = L @ (y + 0.5 * h * k2)
    k4 = L @ (y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def liouville_evolve(initial: BlockDensity, cs: CouplingSet, times, tol: float = 1e-9,
                     max_steps: int = 2_000_000) -> list[BlockDensity]:
    """Integrate the block Liouville equations, returning the blocks at each time.

    Step size is controlled by step doubling: a step is kept when the
    difference between one step of ``h`` and two of ``h/2`` (divided by 15)
    stays below ``tol * h``, which bounds the accumulated error by roughly
    ``tol`` times the elapsed time.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(np.diff(times) < 0) or times[0] < 0:
        raise ValueError("times must be non-negative and non-decreasing")
    ops = nuclear_operators(cs)
    L = liouville_superoperator(ops)
    d2 = initial.A.size
    scale = abs(cs.epsilon_e) + 0.5 * float(np.sum(np.abs(cs.a))) \
        + abs(cs.epsilon_n) * cs.n_nuclei + 1e-12
    h = 0.05 / scale
    y = np.concatenate([initial.A.ravel(), initial.B.ravel(), initial.B.conj().T.ravel(),
                        initial.C.ravel()]).astype(complex)
    shape = initial.A.shape
    t = 0.0
    out, steps = [], 0
    for target in times:
        while t < target:
            step = min(h, target - t)
            full = _rk4_step(L, y, step)
            half = _rk4_step(L, _rk4_step(L, y, 0.5 * step), 0.5 * step)
            err = float(np.max(np.abs(half - full))) / 15.0
            steps += 1
            if steps > max_steps:
                raise NumericError(f"Liouville integration exceeded {max_steps} steps at t={t:.6g}")
            if err <= tol * step:
                y = half + (half - full) / 15.0
                t += step
                grow = 2.0 if err == 0 else min(2.0, 0.9 * (tol * step / err) ** 0.25)
                # a step clipped to hit an output time says little about h itself
                h = max(step * grow, h) if step < h else step * grow
            else:
                h = step * max(0.2, 0.9 * (tol * step / err) ** 0.25)
                if h < 1e-14:
                    raise NumericError(f"Liouville step size collapsed at t={t:.6g}")
        out.append(BlockDensity(y[:d2].reshape(shape).copy(), y[d2:2 * d2].reshape(shape).copy(),
                                y[3 * d2:].reshape(shape).copy()))
    return out
