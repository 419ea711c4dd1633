"""Conserved-M_z sectors and their combinatorial bases.

Sector ``m`` (``-1 <= m <= N``) holds the electron-down configurations with
``m`` nuclei down (Y branch) and the electron-up configurations with ``m + 1``
nuclei down (X branch); its total spin projection is ``M_z = N - 2m - 1``.
The two ends ``m = -1`` and ``m = N`` are the one-state sectors
``|up; up...up>`` and ``|down; down...down>``.

Within a branch the nuclear bitmasks are kept in colexicographic order, which
for a fixed popcount is plain increasing integer order. Positions are computed
with the combinatorial number system, so no search is needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Iterator, Literal

import numpy as np

from .model import MAX_NUCLEI

__all__ = [
    "Branch",
    "SectorBasis",
    "mz_value",
    "sector_dims",
    "enumerate_sector",
    "rank_mask",
    "unrank_mask",
    "rank_masks",
    "popcount",
    "sector_range",
    "locate",
    "total_state_count",
]

Branch = Literal["Y", "X"]


def _check_n(n_nuclei: int) -> None:
    if not 1 <= n_nuclei <= MAX_NUCLEI:
        raise ValueError(f"N must be in [1, {MAX_NUCLEI}], got {n_nuclei}")


def _check_sector(n_nuclei: int, m: int) -> None:
    _check_n(n_nuclei)
    if not -1 <= m <= n_nuclei:
        raise ValueError(f"sector m={m} outside [-1, {n_nuclei}] for N={n_nuclei}")


def mz_value(n_nuclei: int, m: int) -> int:
    """Total spin projection (in units of 1/2) of sector ``m``."""
    _check_sector(n_nuclei, m)
    return n_nuclei - 2 * m - 1


def sector_range(n_nuclei: int) -> range:
    """All sector labels, extremal one-state sectors included."""
    return range(-1, n_nuclei + 1)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def sector_dims(n_nuclei: int, m: int) -> tuple[int, int]:
    """Return ``(C(N, m), C(N, m+1))``, the Y- and X-branch sizes."""
    _check_sector(n_nuclei, m)
    return (comb(n_nuclei, m) if m >= 0 else 0), comb(n_nuclei, m + 1)


@lru_cache(maxsize=None)
def _binomial_table(n: int) -> np.ndarray:
    table = np.zeros((n + 1, n + 2), dtype=np.int64)
    for i in range(n + 1):
        for j in range(n + 2):
            table[i, j] = comb(i, j)
    return table


def rank_mask(mask: int) -> int:
    """Colex rank of ``mask`` among bitmasks of the same popcount."""
    r, i, pos = 0, 0, 0
    while mask:
        if mask & 1:
            i += 1
            r += comb(pos, i)
        mask >>= 1
        pos += 1
    return r


def unrank_mask(rank: int, k: int, n_nuclei: int) -> int:
    """Inverse of :func:`rank_mask` for popcount ``k`` within ``n_nuclei`` bits."""
    if not 0 <= rank < comb(n_nuclei, k):
        raise IndexError(f"rank {rank} out of range for C({n_nuclei}, {k})")
    mask = 0
    pos = n_nuclei - 1
    for i in range(k, 0, -1):
        while comb(pos, i) > rank:
            pos -= 1
        rank -= comb(pos, i)
        mask |= 1 << pos
        pos -= 1
    return mask


def rank_masks(masks: np.ndarray, n_nuclei: int) -> np.ndarray:
    """Vectorized colex rank of an array of bitmasks (mixed popcounts allowed)."""
    masks = np.asarray(masks, dtype=np.int64)
    table = _binomial_table(n_nuclei)
    ranks = np.zeros(masks.shape, dtype=np.int64)
    seen = np.zeros(masks.shape, dtype=np.int64)
    for pos in range(n_nuclei):
        bit = (masks >> pos) & 1
        seen += bit
        ranks += np.where(bit == 1, table[pos, seen], 0)
    return ranks


def _fixed_popcount(n_nuclei: int, k: int) -> Iterator[int]:
    # Gosper's hack: successive integers with k set bits
    if k == 0:
        yield 0
        return
    x = (1 << k) - 1
    limit = 1 << n_nuclei
    while x < limit:
        yield x
        u = x & -x
        v = x + u
        x = v + (((v ^ x) // u) >> 2)


@dataclass(frozen=True)
class SectorBasis:
    """Ordered Y- and X-branch bitmasks of one sector."""

    n_nuclei: int
    m: int
    y_configs: np.ndarray
    x_configs: np.ndarray

    @property
    def mz(self) -> int:
        return mz_value(self.n_nuclei, self.m)

    @property
    def dims(self) -> tuple[int, int]:
        return len(self.y_configs), len(self.x_configs)

    @property
    def dim(self) -> int:
        return len(self.y_configs) + len(self.x_configs)

    def configs(self, branch: Branch) -> np.ndarray:
        if branch == "Y":
            return self.y_configs
        if branch == "X":
            return self.x_configs
        raise ValueError(f"unknown branch {branch!r}")

    def rank(self, branch: Branch, config: int) -> int:
        """Position of ``config`` in the named branch; raises ``KeyError`` if absent."""
        k = self.m if branch == "Y" else self.m + 1
        configs = self.configs(branch)
        if config < 0 or config >> self.n_nuclei or popcount(config) != k or not len(configs):
            raise KeyError(f"config {config:#b} not in {branch} branch of sector m={self.m}")
        return rank_mask(config)

    def unrank(self, branch: Branch, index: int) -> int:
        configs = self.configs(branch)
        if not 0 <= index < len(configs):
            raise IndexError(f"index {index} out of range for {branch} branch")
        return int(configs[index])


def enumerate_sector(n_nuclei: int, m: int) -> SectorBasis:
    """Enumerate sector ``m``; ``m = -1`` and ``m = N`` give the one-state ends."""
    _check_sector(n_nuclei, m)
    y = np.fromiter(_fixed_popcount(n_nuclei, m), dtype=np.int64) if m >= 0 \
        else np.zeros(0, dtype=np.int64)
    x = np.fromiter(_fixed_popcount(n_nuclei, m + 1), dtype=np.int64) if m < n_nuclei \
        else np.zeros(0, dtype=np.int64)
    y.setflags(write=False)
    x.setflags(write=False)
    return SectorBasis(n_nuclei, m, y, x)


def locate(n_nuclei: int, electron_up: bool, mask: int) -> tuple[int, Branch, int]:
    """Sector, branch and in-branch index of the product state ``|electron; mask>``."""
    if mask < 0 or mask >> n_nuclei:
        raise ValueError(f"mask {mask:#b} exceeds {n_nuclei} bits")
    k = popcount(mask)
    if electron_up:
        return k - 1, "X", rank_mask(mask)
    return k, "Y", rank_mask(mask)


def total_state_count(n_nuclei: int) -> int:
    """Count every state sector by sector and check it against ``2**(N+1)``."""
    total = sum(sum(sector_dims(n_nuclei, m)) for m in sector_range(n_nuclei))
    if total != 2 ** (n_nuclei + 1):
        raise AssertionError(f"sector enumeration gives {total} states, expected 2**{n_nuclei + 1}")
    return total
