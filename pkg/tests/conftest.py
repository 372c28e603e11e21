import numpy as np
import pytest

from sarod import Bipartition, Framework, Graph


def random_connected_graph(n, rng, p=0.5):
    """Random connected graph with m >= n edges (so cycles exist)."""
    while True:
        edges = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1) if rng.random() < p]
        g = Graph(n, tuple(edges))
        if g.m >= n and g.is_connected():
            return g


def random_bipartition(n, rng):
    a = [v for v in range(1, n + 1) if rng.random() < 0.5]
    if not a:
        a = [int(rng.integers(1, n + 1))]
    if len(a) == n:
        a.pop()
    return Bipartition.from_a_set(n, a)


def random_framework(n, rng, p=0.5):
    g = random_connected_graph(n, rng, p)
    return Framework(g, random_bipartition(n, rng), rng.uniform(0.0, 1.0, (n, 2)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
