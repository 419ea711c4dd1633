"""Closed-form solution of the ``m = 0`` sector and the pole approximation.

In the ``m = 0`` sector (electron down with every nucleus up, coupled to the N
states with one nucleus flipped) the transformed amplitudes are rational in
``z = i w``::

    Ybar_0(z) = i * num(z) / D(z)
    Xbar_j(z) = (i X_j(0) + k_j Ybar_0(z)) / (z - e_j)

with ``k_j = A_j / 4``, ``e_0`` the Y level, ``e_j`` the X levels and::

    D(z)   = (z - e_0) prod_j (z - e_j) - sum_j k_j^2 prod_{i != j} (z - e_i)
    num(z) = Y_0(0) prod_j (z - e_j) + sum_j k_j X_j(0) prod_{i != j} (z - e_i)

With ``eps_N = 0`` these are ``e_0 = -B_0`` and ``e_j = B_0 - A_j``. The roots
of ``D`` are the sector eigenvalues; summing residues gives the time signal.

The pole approximation replaces the Y-branch self-energy matrix
``A - C B^-1 D`` of a general sector by something cheaper:

- ``PA0`` drops the hyperfine blocks entirely, leaving the bare diagonals.
- ``PA1`` keeps only the diagonal of the self-energy, so each Y-config couples
  to its own X neighbours as if they were private to it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.optimize import brentq

from .blocks import SectorBlocks, assemble_hamiltonian, sector_blocks
from .errors import DegeneratePolesError, NumericError
from .evolver import AmplitudeTrajectory, diagonalize
from .model import CouplingSet

__all__ = [
    "CharPoly",
    "RationalSolution",
    "char_poly_coeffs",
    "companion_matrix",
    "find_poles",
    "rational_solution",
    "invert_y0",
    "invert_xj",
    "symmetric_product_weights",
    "approx_poles",
    "y_branch_poles",
    "exact_y_branch_poles",
    "pole_approx_amplitudes",
]

Variant = Literal["PA0", "PA1"]

DEGENERACY_TOL = 1e-8
IMAG_TRUNCATE = 1e-9
IMAG_FATAL = 1e-6


def _prod_except(values: np.ndarray, z) -> np.ndarray:
    """``prod_{i != j} (z - values[i])`` for every ``j``."""
    diffs = z - values
    out = np.empty(len(values), dtype=np.result_type(diffs, float))
    for j in range(len(values)):
        out[j] = np.prod(np.delete(diffs, j))
    return out


@dataclass(frozen=True)
class CharPoly:
    """Characteristic polynomial ``D(z)`` of the ``m = 0`` sector.

    ``coeffs`` are monic, highest power first, in ``z = i w``. Calling the
    object evaluates the unexpanded product form, which is better conditioned
    than Horner on the coefficients near clustered roots.
    """

    y_level: float
    x_levels: np.ndarray
    couplings: np.ndarray
    coeffs: np.ndarray

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        z = complex(z) if np.iscomplexobj(z) else float(z)
        w = self.couplings ** 2
        return (z - self.y_level) * np.prod(z - self.x_levels) \
            - np.sum(w * _prod_except(self.x_levels, z))

    def d_n(self, z):
        """``d_N(z) = prod_j (z - e_j)``, whose zeros are the bare X levels."""
        return np.prod(z - self.x_levels)

    def derivative(self, z):
        """``D'(z)`` from the product form."""
        e, w = self.x_levels, self.couplings ** 2
        p_j = _prod_except(e, z)
        out = np.prod(z - e) + (z - self.y_level) * np.sum(p_j)
        for j in range(len(e)):
            out -= w[j] * np.sum(_prod_except(np.delete(e, j), z))
        return out


def char_poly_coeffs(cs: CouplingSet) -> CharPoly:
    blocks = sector_blocks(cs, 0)
    y_level = float(blocks.e_down[0])
    x_levels = blocks.e_up.copy()
    k = blocks.K.toarray()[0]
    coeffs = np.polymul([1.0, -y_level], np.poly(x_levels))
    for j in range(cs.n_nuclei):
        others = np.poly(np.delete(x_levels, j))
        coeffs = np.polysub(coeffs, k[j] ** 2 * np.atleast_1d(others))
    return CharPoly(y_level, x_levels, k, np.asarray(coeffs, dtype=float))


def companion_matrix(coeffs) -> np.ndarray:
    """Frobenius companion matrix of a polynomial (leading coefficient normalized away)."""
    c = np.asarray(coeffs, dtype=float)
    c = c / c[0]
    n = len(c) - 1
    M = np.zeros((n, n))
    M[0, :] = -c[1:]
    M[np.arange(1, n), np.arange(n - 1)] = 1.0
    return M


def _deflate(poly: CharPoly) -> tuple[np.ndarray, CharPoly]:
    """Split off the roots of ``D`` that sit exactly on bare X levels.

    A level shared by ``r`` X-configs is a root of multiplicity ``r - 1``, and
    one more if none of them couples. The remaining factor has simple roots,
    which keeps the companion eigenvalues well conditioned.
    """
    e, k = poly.x_levels, poly.couplings
    if not len(e):
        return np.zeros(0), poly
    scale = max(1.0, float(np.max(np.abs(e))), abs(poly.y_level))
    order = np.argsort(e, kind="stable")
    pinned, levels, weights = [], [], []
    for x, w in zip(e[order], k[order] ** 2):
        if levels and abs(x - levels[-1]) <= 1e-13 * scale:
            pinned.append(levels[-1])
            weights[-1] += w
        else:
            levels.append(float(x))
            weights.append(float(w))
    keep = [i for i, w in enumerate(weights) if w > 0]
    pinned += [levels[i] for i in range(len(levels)) if weights[i] == 0]
    if not pinned:
        return np.zeros(0), poly
    lv = np.array([levels[i] for i in keep])
    kk = np.sqrt(np.array([weights[i] for i in keep]))
    coeffs = np.polymul([1.0, -poly.y_level], np.poly(lv))
    for j in range(len(lv)):
        coeffs = np.polysub(coeffs, kk[j] ** 2 * np.atleast_1d(np.poly(np.delete(lv, j))))
    return np.array(pinned), CharPoly(poly.y_level, lv, kk, np.asarray(coeffs, dtype=float))


def _local_coeffs(poly: CharPoly, center: float, width: float) -> np.ndarray:
    """Coefficients of ``D(center + width * u) / width**degree`` in ``u``."""
    e = (poly.x_levels - center) / width
    k2 = (poly.couplings / width) ** 2
    coeffs = np.polymul([1.0, -(poly.y_level - center) / width], np.poly(e))
    for j in range(len(e)):
        coeffs = np.polysub(coeffs, k2[j] * np.atleast_1d(np.poly(np.delete(e, j))))
    return np.asarray(coeffs, dtype=float)


def find_poles(poly: CharPoly, newton_steps: int = 4) -> np.ndarray:
    """All real roots of ``D(z)``, ascending, via the companion matrix plus Newton polish.

    Roots pinned exactly on coincident or uncoupled bare levels are split off
    first; see :func:`_deflate`. The companion matrix is built in a variable
    centred and scaled on the bare X levels, where all but one root cluster;
    expanding about ``z = 0`` instead loses the cluster to cancellation once
    the Zeeman energy exceeds the spread of the couplings.
    """
    pinned, poly = _deflate(poly)
    if poly.degree:
        e = poly.x_levels
        center = float(np.mean(e)) if len(e) else poly.y_level
        width = max(float(np.ptp(e)) if len(e) > 1 else 0.0,
                    float(np.max(np.abs(poly.couplings))) if len(e) else 0.0, 1e-300)
        local = np.linalg.eigvals(companion_matrix(_local_coeffs(poly, center, width)))
        roots = center + width * local
        worst = float(np.max(np.abs(local.imag)))
        scale = max(1.0, float(np.max(np.abs(local))))
    else:
        roots, worst, scale = np.zeros(0, dtype=complex), 0.0, 1.0
    if worst > IMAG_FATAL * scale:
        raise NumericError(
            f"characteristic polynomial has a root with imaginary part {worst:.3g}; "
            "the sector operator should be Hermitian")
    # below IMAG_TRUNCATE the imaginary part is rounding; between the two
    # thresholds it is the sqrt(eps) splitting of a near-multiple root
    roots = np.sort(roots.real)
    polished = roots.copy()
    for idx, z in enumerate(roots):
        f = abs(poly(z))
        for _ in range(newton_steps):
            dz = poly.derivative(z)
            if dz == 0 or f == 0:
                break
            z_new = z - poly(z) / dz
            f_new = abs(poly(z_new))
            if not f_new < f:
                break
            z, f = z_new, f_new
        polished[idx] = z
    return np.sort(np.concatenate([polished, pinned]))


def _check_simple(points: np.ndarray, scale: float, what: str) -> None:
    gaps = np.diff(np.sort(points))
    if len(gaps) and gaps.min() < DEGENERACY_TOL * scale:
        raise DegeneratePolesError(
            f"{what}: minimum gap {gaps.min():.3g} below {DEGENERACY_TOL:g} x {scale:.3g}; "
            "use the spectral evolver")


@dataclass(frozen=True)
class RationalSolution:
    """Residue data for the ``m = 0`` sector.

    ``y_residues[l]`` is the weight of ``exp(-i t poles[l])`` in ``Y_0(t)``;
    ``x_residues[j, l]`` the same for ``X_j(t)``; ``x_direct[j]`` multiplies
    ``exp(-i t d_n_roots[j])``.
    """

    poles: np.ndarray
    d_n_roots: np.ndarray
    y0: complex
    x0: np.ndarray
    y_residues: np.ndarray
    x_residues: np.ndarray
    x_direct: np.ndarray


def rational_solution(cs: CouplingSet, y0: complex, x0, poly: CharPoly | None = None
                      ) -> RationalSolution:
    """Locate the poles and precompute all residues; refuses degenerate pole sets."""
    poly = poly or char_poly_coeffs(cs)
    x0 = np.asarray(x0, dtype=complex)
    if x0.shape != (cs.n_nuclei,):
        raise ValueError(f"expected {cs.n_nuclei} X amplitudes, got shape {x0.shape}")
    poles = find_poles(poly)
    e, k = poly.x_levels, poly.couplings
    scale = max(float(np.ptp(np.concatenate([poles, e]))), float(np.max(np.abs(poles))), 1e-300)
    _check_simple(poles, scale, "poles of D(z)")
    _check_simple(e, scale, "bare X levels")
    collision = np.min(np.abs(poles[:, None] - e[None, :]))
    if collision < DEGENERACY_TOL * scale:
        raise DegeneratePolesError(
            f"a pole of D(z) coincides with a bare X level (gap {collision:.3g}); "
            "use the spectral evolver")

    def num(z):
        return y0 * poly.d_n(z) + np.sum(k * x0 * _prod_except(e, z))

    denom = np.array([np.prod(np.delete(poles[l] - poles, l)) for l in range(len(poles))])
    y_res = np.array([num(p) for p in poles]) / denom
    x_res = k[:, None] * y_res[None, :] / (poles[None, :] - e[:, None])
    x_direct = np.array([x0[j] + k[j] * num(e[j]) / poly(e[j]) for j in range(len(e))])
    return RationalSolution(poles, e.copy(), complex(y0), x0, y_res, x_res, x_direct)


def invert_y0(sol: RationalSolution, t) -> np.ndarray | complex:
    """``Y_0(t) = sum_l exp(-i t Omega_l) * res_l``."""
    t_arr = np.asarray(t, dtype=float)
    out = np.exp(-1j * np.multiply.outer(t_arr, sol.poles)) @ sol.y_residues
    return complex(out) if out.ndim == 0 else out


def invert_xj(sol: RationalSolution, j: int, t) -> np.ndarray | complex:
    """``X_j(t)``: bare-level term plus the sum over the poles of ``D``. ``j`` is 0-based."""
    t_arr = np.asarray(t, dtype=float)
    out = sol.x_direct[j] * np.exp(-1j * t_arr * sol.d_n_roots[j]) \
        + np.exp(-1j * np.multiply.outer(t_arr, sol.poles)) @ sol.x_residues[j]
    return complex(out) if out.ndim == 0 else out


def symmetric_product_weights(poles) -> np.ndarray:
    """``1 / prod_{k != l}(Omega_l - Omega_k)`` rebuilt from the Vandermonde product.

    With ``V = prod_{i<j}(Omega_i - Omega_j)`` over ascending poles and
    ``V_l`` the same product with pole ``l`` left out, the weight equals
    ``(-1)**l * V_l / V`` for 0-based ``l``.
    """
    poles = np.asarray(poles, dtype=float)
    n = len(poles)

    def vandermonde(vals):
        i, j = np.triu_indices(len(vals), 1)
        return np.prod(vals[i] - vals[j])

    full = vandermonde(poles)
    return np.array([(-1) ** l * vandermonde(np.delete(poles, l)) / full for l in range(n)])


# --- pole approximation -----------------------------------------------------

def _secular_roots(y_level: float, x_levels: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Roots of ``z - y_level - sum_j k_j^2 / (z - x_levels_j) = 0`` times ``prod(z - x_j)``.

    Returns ``len(x_levels) + 1`` real roots ascending.
    """
    w = k ** 2
    if not len(x_levels):
        return np.array([y_level])
    scale = max(1.0, float(np.max(np.abs(x_levels))), abs(y_level))
    tol = 1e-13 * scale
    order = np.argsort(x_levels)
    xs, ws = x_levels[order], w[order]
    # merge coincident bare levels; each merge leaves a root pinned at the level
    poles, weights, roots = [], [], []
    for x, wt in zip(xs, ws):
        if poles and abs(x - poles[-1]) <= tol:
            roots.append(poles[-1])
            weights[-1] += wt
        else:
            poles.append(x)
            weights.append(wt)
    coupled = [(p, wt) for p, wt in zip(poles, weights) if wt > 0]
    roots.extend(p for p, wt in zip(poles, weights) if wt == 0)
    if not coupled:
        roots.append(y_level)
        return np.sort(np.array(roots))
    cp = np.array([p for p, _ in coupled])
    cw = np.array([wt for _, wt in coupled])

    def f(z):
        return z - y_level - np.sum(cw / (z - cp))

    spread = np.sqrt(cw.sum()) + 1.0
    edges = [min(cp[0], y_level) - spread] + list(cp) + [max(cp[-1], y_level) + spread]
    for lo, hi in zip(edges[:-1], edges[1:]):
        a, b = lo, hi
        # step just inside the pole(s) bounding the interval
        if lo in cp:
            a = lo + max(abs(lo), 1.0) * 1e-14
            step = 1e-14 * max(abs(lo), 1.0)
            while f(a) > 0:
                step *= 2
                a = lo + step
                if a >= hi:
                    break
        else:
            while f(a) > 0:
                a -= spread
        if hi in cp:
            b = hi - max(abs(hi), 1.0) * 1e-14
            step = 1e-14 * max(abs(hi), 1.0)
            while f(b) < 0:
                step *= 2
                b = hi - step
                if b <= lo:
                    break
        else:
            while f(b) < 0:
                b += spread
        try:
            roots.append(brentq(f, a, b, xtol=1e-15 * scale, rtol=1e-15, maxiter=500))
        except (ValueError, RuntimeError) as exc:
            raise NumericError(f"secular root search failed on ({lo}, {hi}): {exc}") from exc
    return np.sort(np.array(roots))


def _row_neighbours(blocks: SectorBlocks, i: int) -> tuple[np.ndarray, np.ndarray]:
    K = blocks.K
    lo, hi = K.indptr[i], K.indptr[i + 1]
    return K.indices[lo:hi], K.data[lo:hi]


def approx_poles(cs: CouplingSet, m: int, variant: Variant = "PA1") -> list[np.ndarray]:
    """Approximate poles attached to each Y-config of sector ``m``.

    Each list entry holds ``N - m + 1`` values: the Y level and the levels of
    the X-configs reachable by one flip, either bare (PA0) or as roots of the
    diagonal self-energy equation (PA1).
    """
    blocks = sector_blocks(cs, m)
    out = []
    for i in range(len(blocks.b_down)):
        cols, k = _row_neighbours(blocks, i)
        x_levels = blocks.e_up[cols]
        if variant == "PA0":
            out.append(np.sort(np.append(x_levels, blocks.e_down[i])))
        elif variant == "PA1":
            out.append(_secular_roots(float(blocks.e_down[i]), x_levels, k))
        else:
            raise ValueError(f"unknown pole-approximation variant {variant!r}")
    return out


def y_branch_poles(cs: CouplingSet, m: int, variant: Variant = "PA1") -> np.ndarray:
    """The pole continuously connected to each bare Y level, one per Y-config."""
    blocks = sector_blocks(cs, m)
    per_config = approx_poles(cs, m, variant)
    if variant == "PA0":
        return blocks.e_down.copy()
    out = np.empty(len(per_config))
    for i, roots in enumerate(per_config):
        cols, _ = _row_neighbours(blocks, i)
        y = blocks.e_down[i]
        bounds = np.sort(blocks.e_up[cols])
        # root in the same inter-pole interval as the bare level
        below = bounds[bounds < y]
        above = bounds[bounds > y]
        lo = below[-1] if len(below) else -np.inf
        hi = above[0] if len(above) else np.inf
        inside = roots[(roots > lo) & (roots < hi)]
        pool = inside if len(inside) else roots
        out[i] = pool[np.argmin(np.abs(pool - y))]
    return out


def exact_y_branch_poles(cs: CouplingSet, m: int) -> np.ndarray:
    """Exact eigenvalues of the ``C(N, m)`` eigenvectors most weighted on the Y branch."""
    blocks = sector_blocks(cs, m)
    ny = len(blocks.b_down)
    prop = diagonalize(assemble_hamiltonian(blocks), m=m, n_y=ny)
    y_weight = np.sum(prop.eigenvectors[:ny, :] ** 2, axis=0)
    pick = np.sort(np.argsort(-y_weight, kind="stable")[:ny])
    return np.sort(prop.eigenvalues[pick])


def _phase_integral(lam: np.ndarray, level: float, times: np.ndarray) -> np.ndarray:
    """``(exp(-i lam t) - exp(-i level t)) / (lam - level)``, shape ``(T, len(lam))``."""
    diff = lam - level
    t = times[:, None]
    small = np.abs(diff) < 1e-12 * max(1.0, abs(level))
    safe = np.where(small, 1.0, diff)
    out = (np.exp(-1j * lam * t) - np.exp(-1j * level * t)) / safe
    if np.any(small):
        out[:, small] = (-1j * t * np.exp(-1j * level * t))[:, np.zeros(small.sum(), dtype=int)]
    return out


def pole_approx_amplitudes(blocks: SectorBlocks, initial, times, variant: Variant = "PA1"
                           ) -> AmplitudeTrajectory:
    """Time-domain amplitudes under the pole approximation.

    PA0 evolves every configuration with its bare level. PA1 evolves each Y
    amplitude inside its private star of X neighbours, then drives the X
    amplitudes with those Y signals. PA1 is exact whenever the Y branch has
    a single configuration; in general it does not conserve the norm.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    initial = np.asarray(initial, dtype=complex)
    ny = len(blocks.b_down)
    if initial.shape != (blocks.dim,):
        raise ValueError(f"initial state has shape {initial.shape}, expected ({blocks.dim},)")
    y0, x0 = initial[:ny], initial[ny:]
    x_amps = np.exp(-1j * np.outer(times, blocks.e_up)) * x0
    if variant == "PA0":
        y_amps = np.exp(-1j * np.outer(times, blocks.e_down)) * y0
        return AmplitudeTrajectory(times, y_amps, x_amps)
    if variant != "PA1":
        raise ValueError(f"unknown pole-approximation variant {variant!r}")
    y_amps = np.empty((len(times), ny), dtype=complex)
    for i in range(ny):
        cols, k = _row_neighbours(blocks, i)
        n = len(cols)
        H = np.zeros((n + 1, n + 1))
        H[0, 0] = blocks.e_down[i]
        H[0, 1:] = H[1:, 0] = k
        H[np.arange(1, n + 1), np.arange(1, n + 1)] = blocks.e_up[cols]
        lam, V = np.linalg.eigh(H)
        local0 = np.concatenate([[y0[i]], x0[cols]])
        c = V[0, :] * (V.T @ local0)
        y_amps[:, i] = np.exp(-1j * np.outer(times, lam)) @ c
        for j, kij in zip(cols, k):
            x_amps[:, j] += kij * (_phase_integral(lam, blocks.e_up[j], times) @ c)
    return AmplitudeTrajectory(times, y_amps, x_amps)
