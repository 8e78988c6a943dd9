import numpy as np
import pytest

from patient_zero.graph import Graph, from_edge_list

ACCEPTANCE_LINES: list[str] = []


def random_connected_graph(n: int, extra_p: float, rng) -> Graph:
    """Random spanning tree (each node hooks to an earlier one) plus extra edges."""
    edges = {(int(rng.integers(v)), v) for v in range(1, n)}
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < extra_p:
                edges.add((a, b))
    perm = rng.permutation(n)
    return Graph.from_edges(n, [(int(perm[a]), int(perm[b])) for a, b in edges])


def random_connected_subset(g: Graph, k: int, rng) -> list[int]:
    """Connected k-subset grown from a random node by random frontier picks."""
    start = int(rng.integers(g.n))
    inside = {start}
    frontier = set(g.adj[start])
    while len(inside) < k and frontier:
        v = sorted(frontier)[int(rng.integers(len(frontier)))]
        inside.add(v)
        frontier.discard(v)
        frontier.update(w for w in g.adj[v] if w not in inside)
    return sorted(inside)


@pytest.fixture
def p4():
    # path 0-1-2-3
    return from_edge_list("0 1\n1 2\n2 3\n")


@pytest.fixture
def k3():
    return from_edge_list("0 1\n1 2\n0 2\n")


@pytest.fixture
def star5():
    # center 0, leaves 1..4
    return from_edge_list("0 1\n0 2\n0 3\n0 4\n")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
