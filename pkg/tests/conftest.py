import numpy as np
import pytest

from negamplify.graph import Graph


def make_graph(n, edges, features=None, labels=None):
    if features is None:
        features = np.ones((n, 2))
    return Graph.from_edges(n, np.array(edges, dtype=np.int64).reshape(-1, 2), features, labels)


@pytest.fixture
def triangle():
    return make_graph(3, [(0, 1), (1, 2), (0, 2)], np.arange(6.0).reshape(3, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_graph(rng, n, p, f):
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    return Graph.from_edges(n, np.stack([iu[keep], ju[keep]], axis=1),
                            rng.standard_normal((n, f)))
