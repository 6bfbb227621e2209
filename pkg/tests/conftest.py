import numpy as np
import pytest

import nrpembed as ne
from nrpembed.graph import EdgeList, from_edges


@pytest.fixture(scope="session")
def example():
    return ne.example_graph()


def random_graph(n, p, seed, undirected=False, self_loops=False):
    rng = np.random.default_rng(seed)
    M = rng.random((n, n)) < p
    if not self_loops:
        np.fill_diagonal(M, False)
    if undirected:
        M = np.triu(M)
    pairs = np.argwhere(M)
    return from_edges(EdgeList(pairs, directed=not undirected, n=n))


def random_embedding(n, k, seed):
    rng = np.random.default_rng(seed)
    return ne.EmbeddingPair(X=rng.normal(size=(n, k)), Y=rng.normal(size=(n, k)))


def random_weights(n, seed, lam=10.0):
    rng = np.random.default_rng(seed)
    return ne.WeightState(fwd=1.0 / n + rng.exponential(1.0, n), bwd=1.0 / n + rng.exponential(1.0, n), lam=lam)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[num])
