import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from negamplify.loss import compute_similarities
from negamplify.pools import (VIEW_K, VIEW_M, Pool, build_pools, debug_report, pool_bounds,
                              pool_membership, pool_of_rank, pool_sizes)


def oracle_pools(sims, anchor_view):
    """Sort-and-slice by hand with python tuples, per anchor."""
    n = sims.num_nodes
    intra = sims.intra_k if anchor_view == VIEW_K else sims.intra_m
    out = []
    for i in range(n):
        cands = []
        for j in range(n):
            if j == i:
                continue
            if anchor_view == VIEW_K:
                cands.append((intra[i, j], VIEW_K, j))
                cands.append((sims.inter[i, j], VIEW_M, j))
            else:
                cands.append((intra[i, j], VIEW_M, j))
                cands.append((sims.inter[j, i], VIEW_K, j))
        cands.sort()
        m = len(cands)
        e, h = math.ceil(0.25 * m), math.ceil(0.75 * m)
        codes = [view * n + node for _, view, node in cands]
        out.append((codes[:e], codes[e:h], codes[h:]))
    return out


def check_against_oracle(sims):
    for view in (VIEW_K, VIEW_M):
        idx = build_pools(sims, view)
        for i, (easy, medium, hard) in enumerate(oracle_pools(sims, view)):
            assert idx.pool("easy")[i].tolist() == easy
            assert idx.pool("medium")[i].tolist() == medium
            assert idx.pool("hard")[i].tolist() == hard


@pytest.mark.parametrize("n, sizes", [(8, (2, 4, 2)), (10, (3, 5, 2)), (2, (1, 1, 0)),
                                      (4, (1, 2, 1))])
def test_pool_sizes(n, sizes):
    assert pool_sizes(n) == sizes


def test_pool_sizes_exhaustive():
    for n in range(2, 10_001):
        e, m = pool_bounds(n)
        assert e == math.ceil(0.25 * n) and m == math.ceil(0.75 * n)
        assert sum(pool_sizes(n)) == n


def test_matches_oracle_random(rng):
    K, M = rng.standard_normal((6, 3)), rng.standard_normal((6, 3))
    check_against_oracle(compute_similarities(K, M))


def test_ties_broken_by_view_then_node():
    # identical embeddings: every similarity is 1, so order is (view, node)
    K = np.ones((4, 2))
    idx = build_pools(compute_similarities(K, K), VIEW_K)
    assert idx.ranking[0].tolist() == [1, 2, 3, 5, 6, 7]
    idx_m = build_pools(compute_similarities(K, K), VIEW_M)
    assert idx_m.ranking[0].tolist() == [1, 2, 3, 5, 6, 7]


def test_positive_never_a_candidate(rng):
    K, M = rng.standard_normal((7, 3)), rng.standard_normal((7, 3))
    sims = compute_similarities(K, M)
    for view in (VIEW_K, VIEW_M):
        idx = build_pools(sims, view)
        for i in range(7):
            row = set(idx.ranking[i].tolist())
            assert i not in row and 7 + i not in row
            assert len(row) == 12


def test_membership_boundaries(rng):
    K, M = rng.standard_normal((6, 3)), rng.standard_normal((6, 3))
    idx = build_pools(compute_similarities(K, M))
    n = idx.num_candidates  # 10
    row = idx.ranking[0]
    assert pool_membership(idx, 0, int(row[0])) is Pool.EASY
    assert pool_membership(idx, 0, int(row[n - 1])) is Pool.HARD
    assert pool_membership(idx, 0, int(row[math.ceil(0.25 * n)])) is Pool.MEDIUM
    assert pool_of_rank(math.ceil(0.25 * n), n) is Pool.EASY
    assert pool_of_rank(math.ceil(0.75 * n) + 1, n) is Pool.HARD


def test_membership_rejects_positive(rng):
    K, M = rng.standard_normal((4, 2)), rng.standard_normal((4, 2))
    idx = build_pools(compute_similarities(K, M))
    with pytest.raises(ValueError):
        pool_membership(idx, 1, (VIEW_M, 1))
    with pytest.raises(ValueError):
        pool_membership(idx, 1, (VIEW_K, 1))


def test_needs_two_nodes():
    with pytest.raises(ValueError):
        build_pools(compute_similarities(np.ones((1, 2)), np.ones((1, 2))))


def test_debug_report(rng):
    K, M = rng.standard_normal((5, 3)), rng.standard_normal((5, 3))
    text = debug_report(build_pools(compute_similarities(K, M)), anchors=[0, 1], k=2)
    assert text.startswith("anchor_view=K candidates=8 easy_end=2 medium_end=6")
    assert len(text.splitlines()) == 3


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 12), st.integers(1, 4))
def test_pools_sorted_disjoint_and_oracle_equal(seed, n, d):
    rng = np.random.default_rng(seed)
    # coarse values make ties common, exercising the tie-break
    K = rng.integers(-2, 3, (n, d)).astype(float)
    M = rng.integers(-2, 3, (n, d)).astype(float)
    sims = compute_similarities(K, M)
    check_against_oracle(sims)
    for view in (VIEW_K, VIEW_M):
        idx = build_pools(sims, view)
        assert np.all(np.diff(idx.similarity, axis=1) >= 0)
        e, m, h = (idx.pool(p) for p in Pool)
        for i in range(n):
            sets = [set(x[i].tolist()) for x in (e, m, h)]
            assert not (sets[0] & sets[1] or sets[1] & sets[2] or sets[0] & sets[2])
            assert set.union(*sets) == set(idx.ranking[i].tolist())
        if h.shape[1]:
            assert np.all(idx.similarity[:, idx.medium_end] >= idx.similarity[:, idx.medium_end - 1])
        again = build_pools(sims, view)
        assert np.array_equal(again.ranking, idx.ranking)
