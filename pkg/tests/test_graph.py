import filecmp
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import binom

from negamplify.graph import (DatasetError, Graph, SbmSpec, degree, generate_sbm, load_dataset,
                              write_dataset)

from conftest import make_graph


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


@pytest.fixture
def feats3(tmp_path):
    return write(tmp_path / "f.csv", "1.0,2.0\n3.0,4.0\n5.0,6.0\n")


def test_load_small(tmp_path, feats3):
    g = load_dataset(write(tmp_path / "e.tsv", "0\t1\n1\t2\n"), feats3)
    assert g.num_nodes == 3
    assert g.num_edges == 2
    assert g.num_features == 2
    assert g.labels is None
    assert g.is_symmetric()


def test_reversed_duplicate_merged(tmp_path, feats3):
    g = load_dataset(write(tmp_path / "e.tsv", "0\t1\n1\t0\n0\t1\n"), feats3)
    assert g.num_edges == 1
    assert list(g.neighbors(0)) == [1]
    assert list(g.neighbors(1)) == [0]


def test_comments_skipped(tmp_path, feats3):
    g = load_dataset(write(tmp_path / "e.tsv", "# header\n0\t2\n"), feats3)
    assert g.edge_list().tolist() == [[0, 2]]


def test_self_loop_rejected(tmp_path, feats3):
    with pytest.raises(DatasetError, match="self-loop"):
        load_dataset(write(tmp_path / "e.tsv", "0\t0\n"), feats3)


@pytest.mark.parametrize("edges, match", [
    ("0\t1\nfoo\n", ":2:"),
    ("0 1\n", ":1:"),
    ("0\t7\n", "out of range"),
])
def test_bad_edge_lines(tmp_path, feats3, edges, match):
    with pytest.raises(DatasetError, match=match):
        load_dataset(write(tmp_path / "e.tsv", edges), feats3)


def test_ragged_features(tmp_path):
    feats = write(tmp_path / "f.csv", "1,2\n3\n")
    with pytest.raises(DatasetError):
        load_dataset(write(tmp_path / "e.tsv", "0\t1\n"), feats)


def test_labels(tmp_path, feats3):
    e = write(tmp_path / "e.tsv", "0\t1\n")
    g = load_dataset(e, feats3, write(tmp_path / "l.tsv", "2\t1\n0\t0\n1\t1\n"))
    assert g.labels.tolist() == [0, 1, 1]
    with pytest.raises(DatasetError, match="no label"):
        load_dataset(e, feats3, write(tmp_path / "l2.tsv", "0\t0\n1\t1\n"))
    with pytest.raises(DatasetError, match="out of range"):
        load_dataset(e, feats3, write(tmp_path / "l3.tsv", "0\t0\n1\t-1\n2\t0\n"))


def test_graph_is_immutable(triangle):
    with pytest.raises(ValueError):
        triangle.features[0, 0] = 9.0


def test_degree(triangle):
    assert [degree(triangle, v) for v in range(3)] == [2, 2, 2]
    edgeless = make_graph(4, [])
    assert [degree(edgeless, v) for v in range(4)] == [0] * 4
    star = make_graph(6, [(0, k) for k in range(1, 6)])
    assert degree(star, 0) == 5
    with pytest.raises(IndexError):
        degree(star, 6)


def test_sbm_degenerate_cases():
    g = generate_sbm(SbmSpec(blocks=2, nodes_per_block=3, p_in=1.0, p_out=0.0, feature_dim=2))
    assert g.labels.tolist() == [0, 0, 0, 1, 1, 1]
    assert g.edge_list().tolist() == [[0, 1], [0, 2], [1, 2], [3, 4], [3, 5], [4, 5]]
    empty = generate_sbm(SbmSpec(blocks=2, nodes_per_block=3, p_in=0.0, p_out=0.0))
    assert empty.num_edges == 0


def test_sbm_intra_edge_count_in_binomial_ci():
    spec = SbmSpec(blocks=3, nodes_per_block=100, p_in=0.5, p_out=0.05, seed=7)
    g = generate_sbm(spec)
    e = g.edge_list()
    intra = int(np.sum(g.labels[e[:, 0]] == g.labels[e[:, 1]]))
    trials = 3 * math.comb(100, 2)
    lo, hi = binom.interval(0.99, trials, 0.5)
    assert lo <= intra <= hi


def test_sbm_spec_validation():
    with pytest.raises(ValueError):
        generate_sbm(SbmSpec(blocks=1))
    with pytest.raises(ValueError):
        generate_sbm(SbmSpec(p_in=0.1, p_out=0.2))


def test_sbm_reproducible_bytes(tmp_path):
    spec = SbmSpec(blocks=3, nodes_per_block=20, p_in=0.4, p_out=0.05, seed=3)
    a = write_dataset(generate_sbm(spec), tmp_path / "a")
    b = write_dataset(generate_sbm(spec), tmp_path / "b")
    for key in a:
        assert filecmp.cmp(a[key], b[key], shallow=False)


def test_round_trip(tmp_path):
    g = generate_sbm(SbmSpec(blocks=2, nodes_per_block=15, p_in=0.3, p_out=0.05, seed=1))
    paths = write_dataset(g, tmp_path)
    h = load_dataset(paths["edges"], paths["features"], paths["labels"])
    assert np.array_equal(g.edge_list(), h.edge_list())
    assert np.array_equal(g.features, h.features)
    assert np.array_equal(g.labels, h.labels)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 12).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.tuples(st.integers(0, n - 1),
                                                       st.integers(0, n - 1)), max_size=40))))
def test_csr_symmetric_no_self_loops(case):
    n, pairs = case
    pairs = [(u, v) for u, v in pairs if u != v]
    g = Graph.from_edges(n, np.array(pairs, dtype=np.int64).reshape(-1, 2), np.zeros((n, 1)))
    assert g.is_symmetric()
    for u in range(n):
        nb = g.neighbors(u)
        assert u not in nb
        assert len(set(nb.tolist())) == len(nb)
        for v in nb:
            assert u in g.neighbors(v)
    assert g.num_edges == len({frozenset(p) for p in pairs})
