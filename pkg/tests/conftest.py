import numpy as np
import pytest

import commkit as ck

# Acceptance-criterion results collected by tests/test_acceptance.py; printed
# in the terminal summary so each criterion gets one visible pass/fail line.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def two_triangle():
    """Two triangles {0,1,2} and {3,4,5} joined by the single edge 2-3.

    Undirected: 7 edges, so L = 14 ordered pairs.  The planted split has
    Q = 5/14, which exhaustive enumeration confirms is the global maximum.
    """
    src = [0, 0, 1, 3, 3, 4, 2]
    dst = [1, 2, 2, 4, 5, 5, 3]
    g = ck.Graph.build(6, src, dst, np.ones(7), directed=False)
    truth = ck.canonicalize([0, 0, 0, 1, 1, 1])
    return g, truth


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_graph(rng, n, density=0.3, directed=True, weights="positive"):
    """Random weighted graph for property tests."""
    mask = rng.random((n, n)) < density
    np.fill_diagonal(mask, False)
    if not directed:
        mask = np.triu(mask)
    src, dst = np.nonzero(mask)
    if src.size == 0:  # guarantee at least one edge
        src, dst = np.array([0]), np.array([1 % n])
    if weights == "positive":
        w = rng.uniform(0.1, 5.0, size=src.size)
    elif weights == "unit":
        w = np.ones(src.size)
    else:  # signed
        w = rng.uniform(-3.0, 5.0, size=src.size)
        w[w == 0] = 1.0
    return ck.Graph.build(n, src, dst, w, directed=directed)


def set_partitions(items):
    """Yield every partition of `items` as a list of blocks (Bell-number many)."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for smaller in set_partitions(rest):
        for i in range(len(smaller)):
            yield smaller[:i] + [[first] + smaller[i]] + smaller[i + 1:]
        yield [[first]] + smaller
