from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdspin.basis import (enumerate_sector, locate, mz_value, rank_mask, rank_masks,
                          sector_dims, sector_range, total_state_count, unrank_mask)


@pytest.mark.parametrize("n, m, dims", [(3, 1, (3, 3)), (4, 1, (4, 6)), (4, 0, (1, 4))])
def test_sector_dims(n, m, dims):
    assert sector_dims(n, m) == dims


def test_extremal_sectors():
    assert sector_dims(4, -1) == (0, 1)
    assert sector_dims(4, 4) == (1, 0)
    assert mz_value(4, -1) == 5
    assert mz_value(4, 4) == -5
    top = enumerate_sector(4, -1)
    assert list(top.x_configs) == [0] and len(top.y_configs) == 0
    bottom = enumerate_sector(4, 4)
    assert list(bottom.y_configs) == [0b1111] and len(bottom.x_configs) == 0


@pytest.mark.parametrize("n, m", [(3, -2), (3, 4), (0, 0)])
def test_out_of_range_sector(n, m):
    with pytest.raises(ValueError):
        sector_dims(n, m)


def test_enumerate_examples():
    b = enumerate_sector(3, 0)
    assert list(b.y_configs) == [0] and list(b.x_configs) == [0b001, 0b010, 0b100]
    b = enumerate_sector(3, 1)
    assert list(b.y_configs) == [0b001, 0b010, 0b100]
    assert list(b.x_configs) == [0b011, 0b101, 0b110]
    pairs = {frozenset(k + 1 for k in range(4) if (mask >> k) & 1)
             for mask in enumerate_sector(4, 1).x_configs}
    assert pairs == {frozenset(p) for p in [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]}


def test_rank_examples():
    assert enumerate_sector(3, 1).rank("Y", 0b010) == 1
    b = enumerate_sector(4, 1)
    assert b.rank("X", 0b0011) == 0
    assert b.rank("X", 0b1100) == 5
    with pytest.raises(KeyError):
        b.rank("X", 0b0111)
    with pytest.raises(KeyError):
        b.rank("Y", 0b10000)
    with pytest.raises(IndexError):
        b.unrank("Y", 4)


@pytest.mark.parametrize("n, total", [(1, 4), (3, 16), (4, 32)])
def test_total_state_count(n, total):
    assert total_state_count(n) == total


@pytest.mark.parametrize("n", range(1, 13))
def test_each_mask_in_one_y_and_one_x_list(n):
    y_seen, x_seen = {}, {}
    for m in sector_range(n):
        b = enumerate_sector(n, m)
        assert b.dims == (comb(n, m) if m >= 0 else 0, comb(n, m + 1))
        assert np.all(np.diff(b.y_configs) > 0) and np.all(np.diff(b.x_configs) > 0)
        for s in b.y_configs:
            assert int(s) not in y_seen
            y_seen[int(s)] = m
        for s in b.x_configs:
            assert int(s) not in x_seen
            x_seen[int(s)] = m
    assert set(y_seen) == set(x_seen) == set(range(1 << n))
    assert all(y_seen[s] != x_seen[s] for s in y_seen)
    assert sum(sum(sector_dims(n, m)) for m in sector_range(n)) == 2 ** (n + 1)


@pytest.mark.parametrize("n", [14, 20])
def test_counts_up_to_twenty(n):
    assert total_state_count(n) == 2 ** (n + 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 14), st.data())
def test_rank_unrank_roundtrip(n, data):
    m = data.draw(st.integers(0, n - 1))
    b = enumerate_sector(n, m)
    for branch in ("Y", "X"):
        configs = b.configs(branch)
        idx = data.draw(st.integers(0, len(configs) - 1))
        assert b.rank(branch, b.unrank(branch, idx)) == idx
        assert unrank_mask(idx, popcount_of(branch, m), n) == configs[idx]
    assert np.array_equal(rank_masks(b.x_configs, n), np.arange(len(b.x_configs)))


def popcount_of(branch, m):
    return m if branch == "Y" else m + 1


def test_rank_is_positional_index_for_every_config():
    for n in range(1, 9):
        for m in range(n):
            b = enumerate_sector(n, m)
            assert [rank_mask(int(s)) for s in b.y_configs] == list(range(len(b.y_configs)))
            assert [b.rank("X", int(s)) for s in b.x_configs] == list(range(len(b.x_configs)))


def test_wide_masks():
    b = enumerate_sector(62, 1)
    assert len(b.x_configs) == comb(62, 2)
    assert b.rank("Y", 1 << 61) == 61
    assert unrank_mask(comb(62, 2) - 1, 2, 62) == (1 << 61) | (1 << 60)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10), st.data())
def test_single_flip_adjacency(n, data):
    m = data.draw(st.integers(0, n - 1))
    b = enumerate_sector(n, m)
    xs = set(int(v) for v in b.x_configs)
    for s in b.y_configs:
        for l in range(n):
            if not (s >> l) & 1:
                assert int(s) | (1 << l) in xs


def test_locate():
    assert locate(3, False, 0b010) == (1, "Y", 1)
    assert locate(3, True, 0b010) == (0, "X", 1)
    assert locate(3, True, 0) == (-1, "X", 0)
    with pytest.raises(ValueError):
        locate(3, True, 0b1000)
