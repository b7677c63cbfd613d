import numpy as np
import pytest

from msclab.gf2 import (RankDeficientError, inverse, matmul, nullspace, rank,
                        row_reduce, systematic_form, to_gf2)


def test_to_gf2_rejects_non_binary():
    with pytest.raises(ValueError):
        to_gf2([[0, 2], [1, 0]])


def test_row_reduce_identity_is_fixed_point():
    m, pivots = row_reduce(np.eye(3, dtype=np.uint8))
    assert np.array_equal(m, np.eye(3, dtype=np.uint8))
    assert pivots == [0, 1, 2]


def test_row_reduce_reports_rank():
    m = [[1, 1, 0], [1, 1, 0], [0, 0, 1]]
    red, pivots = row_reduce(m)
    assert len(pivots) == 2
    assert rank(m) == 2


def test_systematic_form_identity():
    g_sys, perm = systematic_form([[1, 0], [0, 1]])
    assert np.array_equal(g_sys, np.eye(2, dtype=np.uint8))
    assert np.array_equal(perm, [0, 1])


def test_systematic_form_no_permutation_needed():
    g_sys, perm = systematic_form([[1, 1, 0, 1], [0, 1, 1, 1]])
    assert np.array_equal(g_sys, [[1, 0, 1, 0], [0, 1, 1, 1]])
    assert np.array_equal(perm, [0, 1, 2, 3])


def test_systematic_form_moves_pivot_columns_forward():
    # both pivots live in the last two columns, so they must be pulled
    # to the front
    g_sys, perm = systematic_form([[0, 0, 1, 1], [0, 0, 0, 1]])
    assert np.array_equal(g_sys[:, :2], np.eye(2, dtype=np.uint8))
    assert list(perm[:2]) == [2, 3]


def test_systematic_form_rejects_dependent_rows():
    with pytest.raises(RankDeficientError):
        systematic_form([[1, 0, 1], [1, 0, 1]])


def test_systematic_form_random_property():
    rng = np.random.default_rng(7)
    for _ in range(50):
        k, n = rng.integers(1, 6), rng.integers(6, 12)
        g = np.concatenate([np.eye(k, dtype=np.uint8),
                            rng.integers(0, 2, (k, n - k), dtype=np.uint8)],
                           axis=1)
        cols = rng.permutation(n)
        shuffled = g[:, cols]
        g_sys, perm = systematic_form(shuffled)
        assert np.array_equal(g_sys[:, :k], np.eye(k, dtype=np.uint8))
        # undoing the column permutation must recover the input's row space
        unperm = np.empty_like(g_sys)
        unperm[:, perm] = g_sys
        assert rank(np.concatenate([unperm, shuffled])) == k


def test_inverse_round_trip():
    rng = np.random.default_rng(3)
    found = 0
    while found < 20:
        m = rng.integers(0, 2, (5, 5), dtype=np.uint8)
        if rank(m) < 5:
            continue
        found += 1
        assert np.array_equal(matmul(m, inverse(m)), np.eye(5, dtype=np.uint8))


def test_inverse_rejects_singular():
    with pytest.raises(RankDeficientError):
        inverse([[1, 1], [1, 1]])


def test_nullspace_annihilates():
    rng = np.random.default_rng(11)
    for _ in range(30):
        m = rng.integers(0, 2, (4, 9), dtype=np.uint8)
        ns = nullspace(m)
        assert ns.shape == (9 - rank(m), 9)
        assert not matmul(m, ns.T).any()
        assert rank(ns) == ns.shape[0]
