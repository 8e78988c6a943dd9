import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from patient_zero.graph import (
    UNREACHABLE,
    Graph,
    GraphFormatError,
    NodeSet,
    bfs_distances,
    boundary_volume,
    connected_components,
    cut_volume,
    degrees_within,
    from_edge_list,
    induced_connectivity,
    induced_dense,
    largest_component,
    read_edge_list,
    subgraph,
    two_path_volume,
    write_edge_list,
)

from conftest import random_connected_graph


@st.composite
def small_graphs(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return Graph.from_edges(n, chosen)


def test_path_from_lines(p4):
    assert (p4.n, p4.m) == (4, 3)
    assert p4.adj == ((1,), (0, 2), (1, 3), (2,))


def test_duplicates_collapse():
    g = from_edge_list("0 1\n1 0\n0 1\n")
    assert g.m == 1 and g.n == 2


def test_self_loop_rejected():
    with pytest.raises(GraphFormatError, match="self-loop"):
        from_edge_list("0 1\n0 0\n")


def test_malformed_line_reports_line_number():
    with pytest.raises(GraphFormatError, match="line 3"):
        from_edge_list("0 1\n# note\n7\n")
    with pytest.raises(GraphFormatError, match="line 2"):
        from_edge_list("0 1\n1 x\n")


def test_isolated_nodes_kept_and_comments_skipped():
    g = from_edge_list("# header\n\n0 4\n")
    assert g.n == 5 and g.m == 1
    assert g.degrees.tolist() == [1, 0, 0, 0, 1]


def test_one_based_shift():
    g = from_edge_list("1 2\n2 3\n", one_based=True)
    assert g.adj == ((1,), (0, 2), (1,))
    with pytest.raises(GraphFormatError):
        from_edge_list("0 1\n", one_based=True)


def test_labelled_file_roundtrip(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("alice bob\nbob carol\n")
    g, labels = read_edge_list(path)
    assert labels == ["alice", "bob", "carol"]
    assert g.adj == ((1,), (0, 2), (1,))
    out = tmp_path / "out.edges"
    write_edge_list(g, out, one_based=True)
    assert out.read_text() == "1 2\n2 3\n"


def test_graph_arrays_are_read_only(p4):
    with pytest.raises(ValueError):
        p4.indices[0] = 3


@given(small_graphs())
@settings(max_examples=100, deadline=None)
def test_graph_invariants(g):
    for i, nb in enumerate(g.adj):
        assert i not in nb
        assert list(nb) == sorted(set(nb))
        for j in nb:
            assert i in g.adj[j]
    assert g.degrees.sum() == 2 * g.m


def test_cut_volume_examples(p4):
    # nodes 0..3 stand for the path's 1..4
    assert cut_volume(p4, [0, 1], [2, 3]) == 1
    assert cut_volume(p4, [1], [0, 2]) == 2
    assert cut_volume(p4, [0, 1, 2], []) == 0
    assert boundary_volume(p4, [1, 2]) == 2


def test_cut_volume_out_of_range(p4):
    with pytest.raises(IndexError):
        cut_volume(p4, [7], [0])


@given(small_graphs(), st.data())
@settings(max_examples=100, deadline=None)
def test_cut_volume_symmetry_and_decomposition(g, data):
    S = data.draw(st.sets(st.integers(0, g.n - 1)))
    T = data.draw(st.sets(st.integers(0, g.n - 1)))
    assert cut_volume(g, S, T) == cut_volume(g, T, S)
    rest = [j for j in range(g.n) if j not in S]
    assert boundary_volume(g, S) == sum(cut_volume(g, S, [j]) for j in rest)


def test_two_path_volume_examples(k3, p4):
    assert two_path_volume(k3, 0, 1, [0, 1, 2]) == 1
    assert two_path_volume(p4, 0, 2, [0, 1, 2, 3]) == 1
    assert two_path_volume(p4, 0, 2, []) == 0


def test_two_path_matches_matrix_square(rng):
    for _ in range(30):
        g = random_connected_graph(9, 0.3, rng)
        S = sorted(rng.choice(g.n, size=6, replace=False).tolist())
        _, _, A = induced_dense(g, S)
        A2 = A @ A
        for a, b in itertools.combinations(range(len(S)), 2):
            assert two_path_volume(g, S[a], S[b], S) == A2[a, b]


def test_degrees_within(p4):
    assert degrees_within(p4, [0, 1, 2]).tolist() == [1, 2, 1, 1]


def test_bfs_distances(p4, k3):
    assert bfs_distances(p4, 0).tolist() == [0, 1, 2, 3]
    assert bfs_distances(k3, 2).tolist() == [1, 1, 0]
    g = from_edge_list("0 1\n2 3\n")
    assert bfs_distances(g, 0).tolist() == [0, 1, UNREACHABLE, UNREACHABLE]


def test_induced_connectivity_examples(p4, k3):
    assert induced_connectivity(p4, [0, 1, 2]) == (True, frozenset({1}))
    assert induced_connectivity(k3, [0, 1, 2]) == (True, frozenset())
    assert induced_connectivity(p4, [0, 2])[0] is False
    with pytest.raises(ValueError):
        induced_connectivity(p4, [])


def _naive_cut_vertices(g, S):
    def connected(nodes):
        nodes = set(nodes)
        if not nodes:
            return True
        start = min(nodes)
        seen, stack = {start}, [start]
        while stack:
            u = stack.pop()
            for w in g.adj[u]:
                if w in nodes and w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen == nodes

    ok = connected(S)
    cuts = {v for v in S if ok and not connected(set(S) - {v})}
    return ok, cuts


def test_induced_connectivity_against_remove_and_bfs(rng):
    for _ in range(300):
        n = int(rng.integers(2, 11))
        g = random_connected_graph(n, float(rng.uniform(0, 0.4)), rng)
        S = sorted(rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False).tolist())
        ok, cuts = induced_connectivity(g, S)
        want_ok, want_cuts = _naive_cut_vertices(g, S)
        assert ok == want_ok
        if ok:
            assert cuts == want_cuts


def test_articulation_points_match_networkx(rng):
    for _ in range(50):
        g = random_connected_graph(30, 0.05, rng)
        G = nx.Graph(g.edges().tolist())
        assert induced_connectivity(g, range(g.n))[1] == set(nx.articulation_points(G))


def test_nodeset_masks():
    ns = NodeSet([9, 3, 5, 3])
    assert ns.members == (3, 5, 9)
    assert ns.mask_of([3, 9]) == 0b101
    assert ns.nodes_of(0b110) == (5, 9)
    with pytest.raises(OverflowError):
        NodeSet(range(64)).mask_of([0])


def test_components_and_subgraph():
    g = from_edge_list("0 1\n1 2\n3 4\n")
    comps = connected_components(g)
    assert [c.tolist() for c in comps] == [[0, 1, 2], [3, 4]]
    assert largest_component(g).tolist() == [0, 1, 2]
    h, old = subgraph(g, [1, 2, 3])
    assert old.tolist() == [1, 2, 3] and h.m == 1


def test_to_scipy_matches_adjacency(p4):
    A = p4.to_scipy().toarray()
    assert np.array_equal(A, A.T)
    assert A.sum() == 2 * p4.m
