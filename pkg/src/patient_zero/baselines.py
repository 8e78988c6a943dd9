"""Reference estimators: rumor centrality, Jordan center, degree, random guess.

All of them rank only the infected nodes. Distances and spanning trees are
taken inside the infected subgraph G[O].
"""

from __future__ import annotations

from collections import deque
from math import factorial, lgamma, log

import numpy as np

from .graph import DisconnectedSnapshotError, Graph, as_nodeset, induced_adjacency, local_bfs
from .ranking import Ranking


def _connected_local(g: Graph, O):
    members, local = induced_adjacency(g, O)
    if not members:
        raise ValueError("snapshot is empty")
    if min(local_bfs(local, 0)) < 0:
        raise DisconnectedSnapshotError("snapshot does not induce a connected subgraph")
    return members, local


def _bfs_subtree_sizes(local, root: int) -> list[int]:
    """Subtree sizes in the BFS tree of ``local`` rooted at ``root``.

    Neighbours are scanned in ascending order, so the tree is deterministic.
    """
    parent = [-1] * len(local)
    parent[root] = root
    order = [root]
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w in local[u]:
            if parent[w] < 0:
                parent[w] = u
                order.append(w)
                queue.append(w)
    size = [1] * len(local)
    for v in reversed(order[1:]):
        size[parent[v]] += size[v]
    return size


def rumor_centrality_scores(g: Graph, O) -> tuple[tuple[int, ...], np.ndarray]:
    """``log R(v) = log |O|! - sum_u log T_u(v)`` with T from v's BFS tree in G[O].

    On a tree-shaped G[O] this is the log of the number of permitted
    permutations that start at v.
    """
    members, local = _connected_local(g, O)
    k = len(members)
    logk = lgamma(k + 1)
    scores = np.array([logk - sum(log(s) for s in _bfs_subtree_sizes(local, v))
                       for v in range(k)])
    return members, scores


def rumor_centrality_rank(g: Graph, O) -> Ranking:
    members, scores = rumor_centrality_scores(g, O)
    return Ranking.from_scores(members, scores)


def rumor_centrality_count(g: Graph, O, root: int) -> int:
    """Exact integer ``|O|! / prod_u T_u(root)`` on the BFS tree."""
    members, local = _connected_local(g, O)
    denom = 1
    for s in _bfs_subtree_sizes(local, members.index(root)):
        denom *= s
    return factorial(len(members)) // denom


def eccentricities(g: Graph, O) -> tuple[tuple[int, ...], list[int]]:
    members, local = _connected_local(g, O)
    return members, [max(local_bfs(local, v)) for v in range(len(members))]


def jordan_center_rank(g: Graph, O) -> Ranking:
    """Ascending eccentricity inside G[O]; equal eccentricities share midranks."""
    members, ecc = eccentricities(g, O)
    return Ranking.from_scores(members, ecc, descending=False)


def degree_centrality_rank(g: Graph, O) -> Ranking:
    ns = as_nodeset(O, g)
    if not len(ns):
        raise ValueError("snapshot is empty")
    return Ranking.from_scores(ns.members, g.degrees[list(ns.members)])


def random_rank(O, rng) -> Ranking:
    members = as_nodeset(O).members
    if not members:
        raise ValueError("snapshot is empty")
    rng = np.random.default_rng(rng)
    return Ranking.from_order([members[i] for i in rng.permutation(len(members))])
