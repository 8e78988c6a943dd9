"""Undirected simple graphs in compressed sparse row form, plus the cut-volume,
distance and connectivity primitives the estimators are built on."""

from __future__ import annotations

import io
import os
from bisect import bisect_left
from collections import deque
from typing import Iterable, Sequence

import numpy as np

UNREACHABLE = -1


class GraphFormatError(ValueError):
    """Raised when an edge list cannot be parsed into a simple graph."""


class DisconnectedSnapshotError(ValueError):
    """The snapshot does not induce a connected subgraph."""


class Graph:
    """Immutable undirected simple graph on nodes ``0..n-1``.

    Adjacency is kept in CSR form (``indptr``, ``indices``) with every
    neighbor list sorted ascending; ``adj`` exposes the same lists as Python
    tuples for the pure-Python loops.
    """

    __slots__ = ("n", "m", "indptr", "indices", "degrees", "_adj", "_csr")

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray):
        self.n = int(n)
        self.indptr = indptr
        self.indices = indices
        self.degrees = np.diff(indptr)
        self.m = int(indices.size // 2)
        self._adj = None
        self._csr = None
        for arr in (self.indptr, self.indices, self.degrees):
            arr.setflags(write=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        """Build a graph from node pairs; duplicates collapse, self-loops are rejected."""
        pairs = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if pairs.size:
            if (pairs < 0).any() or (pairs >= n).any():
                raise IndexError(f"edge endpoint outside [0, {n})")
            loops = pairs[:, 0] == pairs[:, 1]
            if loops.any():
                raise GraphFormatError(f"self-loop on node {int(pairs[loops][0, 0])}")
        both = np.concatenate([pairs, pairs[:, ::-1]])
        if both.size:
            both = np.unique(both, axis=0)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, both[:, 0] + 1, 1)
        np.cumsum(indptr, out=indptr)
        # np.unique sorts rows lexicographically, so neighbor lists come out sorted
        return cls(n, indptr, both[:, 1].copy())

    @property
    def adj(self) -> tuple[tuple[int, ...], ...]:
        if self._adj is None:
            ip, ix = self.indptr.tolist(), self.indices.tolist()
            self._adj = tuple(tuple(ix[ip[i]:ip[i + 1]]) for i in range(self.n))
        return self._adj

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def edges(self) -> np.ndarray:
        """Each undirected edge once, as an ``(m, 2)`` array with ``u < v``."""
        rows = np.repeat(np.arange(self.n), self.degrees)
        keep = rows < self.indices
        return np.column_stack([rows[keep], self.indices[keep]])

    def to_scipy(self):
        """Cached float64 CSR adjacency matrix (treat as read-only)."""
        if self._csr is None:
            import scipy.sparse as sp

            data = np.ones(self.indices.size, dtype=np.float64)
            self._csr = sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))
        return self._csr

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


class NodeSet:
    """A sorted set of node ids with an optional bitmask view.

    Bit ``b`` of a mask stands for ``members[b]``. Masks are plain Python
    ints, so the view is only offered while ``len(members) <= 63``.
    """

    __slots__ = ("members", "_pos")

    MAX_MASK_BITS = 63

    def __init__(self, nodes: Iterable[int]):
        self.members = tuple(sorted({int(v) for v in nodes}))
        self._pos = {v: b for b, v in enumerate(self.members)}

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, v) -> bool:
        return v in self._pos

    def __repr__(self) -> str:
        return f"NodeSet({list(self.members)})"

    def index(self, v: int) -> int:
        return self._pos[v]

    def mask_of(self, nodes: Iterable[int]) -> int:
        if len(self.members) > self.MAX_MASK_BITS:
            raise OverflowError("bitmask view needs at most 63 members")
        mask = 0
        for v in nodes:
            mask |= 1 << self._pos[v]
        return mask

    def nodes_of(self, mask: int) -> tuple[int, ...]:
        return tuple(v for b, v in enumerate(self.members) if mask >> b & 1)

    def check_within(self, g: Graph) -> "NodeSet":
        if self.members and (self.members[0] < 0 or self.members[-1] >= g.n):
            raise IndexError(f"node set has members outside [0, {g.n})")
        return self


def as_nodeset(nodes, g: Graph | None = None) -> NodeSet:
    ns = nodes if isinstance(nodes, NodeSet) else NodeSet(nodes)
    return ns.check_within(g) if g is not None else ns


def _membership(g: Graph, nodes) -> np.ndarray:
    ns = as_nodeset(nodes, g)
    flag = np.zeros(g.n, dtype=bool)
    flag[list(ns.members)] = True
    return flag


# ---------------------------------------------------------------------------
# loading


def from_edge_list(lines: Iterable[str], one_based: bool = False) -> Graph:
    """Parse whitespace-separated integer pairs into a graph.

    Blank lines and lines starting with ``#`` are skipped. Nodes are numbered
    up to the largest index seen, so isolated nodes below it are kept.
    """
    graph, _ = _parse(lines, one_based=one_based, allow_labels=False)
    return graph


def read_edge_list(path, one_based: bool = False) -> tuple[Graph, list[str] | None]:
    """Load an edge-list file.

    Integer ids are used directly (shifted down by one when ``one_based``).
    If any token is not an integer, all tokens are treated as opaque labels,
    mapped to dense ids in order of first appearance, and the label table is
    returned alongside the graph (``None`` otherwise).
    """
    with open(path) as fh:
        return _parse(fh, one_based=one_based, allow_labels=True)


def _parse(lines, one_based, allow_labels):
    if isinstance(lines, str):
        lines = io.StringIO(lines)
    records = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 2:
            raise GraphFormatError(f"line {lineno}: expected two node ids, got {line!r}")
        records.append((lineno, parts[0], parts[1]))

    try:
        pairs = [(ln, int(a), int(b)) for ln, a, b in records]
        labels = None
    except ValueError:
        if not allow_labels:
            bad = next(ln for ln, a, b in records if not (_is_int(a) and _is_int(b)))
            raise GraphFormatError(f"line {bad}: node ids must be integers") from None
        table: dict[str, int] = {}
        pairs = [(ln, table.setdefault(a, len(table)), table.setdefault(b, len(table)))
                 for ln, a, b in records]
        labels = list(table)
        one_based = False

    offset = 1 if one_based else 0
    edges = []
    for ln, a, b in pairs:
        a, b = a - offset, b - offset
        if a < 0 or b < 0:
            raise GraphFormatError(f"line {ln}: negative node id")
        if a == b:
            raise GraphFormatError(f"line {ln}: self-loop on node {a + offset} is not allowed")
        edges.append((a, b))
    if labels is not None:
        n = len(labels)
    else:
        n = 1 + max((max(e) for e in edges), default=-1)
    return Graph.from_edges(n, edges), labels


def _is_int(tok: str) -> bool:
    try:
        int(tok)
    except ValueError:
        return False
    return True


def write_edge_list(g: Graph, path, one_based: bool = False) -> None:
    off = 1 if one_based else 0
    with open(path, "w") as fh:
        for u, v in g.edges().tolist():
            fh.write(f"{u + off} {v + off}\n")


def write_label_table(labels: Sequence[str], path) -> None:
    with open(path, "w") as fh:
        for i, lab in enumerate(labels):
            fh.write(f"{i}\t{lab}\n")


def label_table_path(edge_path) -> str:
    return os.fspath(edge_path) + ".labels.tsv"


# ---------------------------------------------------------------------------
# volumes


def cut_volume(g: Graph, S, T) -> int:
    """Number of ordered pairs ``(i, j)`` with ``i`` in S, ``j`` in T and an edge i-j."""
    s = as_nodeset(S, g).members
    in_t = _membership(g, T)
    if not s:
        return 0
    idx = np.asarray(s)
    starts, stops = g.indptr[idx], g.indptr[idx + 1]
    nbrs = np.concatenate([g.indices[a:b] for a, b in zip(starts, stops)])
    return int(in_t[nbrs].sum())


def boundary_volume(g: Graph, S) -> int:
    """``vol(S, S^c)``: edges leaving S."""
    in_s = _membership(g, S)
    s = np.flatnonzero(in_s)
    if not s.size:
        return 0
    total = int(g.degrees[s].sum())
    return total - cut_volume(g, s.tolist(), s.tolist())


def two_path_volume(g: Graph, i: int, j: int, S) -> int:
    """Number of length-2 paths ``i - r - j`` with the middle node r in S."""
    if not (0 <= i < g.n and 0 <= j < g.n):
        raise IndexError("node outside graph")
    in_s = _membership(g, S)
    common = np.intersect1d(g.neighbors(i), g.neighbors(j), assume_unique=True)
    return int(in_s[common].sum())


def degrees_within(g: Graph, S) -> np.ndarray:
    """For every node, the number of its neighbors lying in S."""
    in_s = _membership(g, S).astype(np.int64)
    rows = np.repeat(np.arange(g.n), g.degrees)
    return np.bincount(rows, weights=in_s[g.indices], minlength=g.n).astype(np.int64)


# ---------------------------------------------------------------------------
# distances and connectivity


def bfs_distances(g: Graph, source: int) -> np.ndarray:
    """Hop distances from ``source``; unreachable nodes get ``UNREACHABLE`` (-1)."""
    if not 0 <= source < g.n:
        raise IndexError(f"node {source} outside graph")
    import scipy.sparse.csgraph as csg

    d = csg.shortest_path(g.to_scipy(), unweighted=True, indices=source, directed=False)
    out = np.full(g.n, UNREACHABLE, dtype=np.int64)
    finite = np.isfinite(d)
    out[finite] = d[finite].astype(np.int64)
    return out


def induced_adjacency(g: Graph, S) -> tuple[tuple[int, ...], list[list[int]]]:
    """Local adjacency lists of the subgraph induced by S.

    Returns the sorted member tuple and, for each member position, the
    positions of its neighbors inside S (ascending).
    """
    members = as_nodeset(S, g).members
    pos = {v: k for k, v in enumerate(members)}
    adj = g.adj
    k = len(members)
    local = []
    for v in members:
        nb = adj[v]
        if len(nb) > 4 * k:
            # hub: probe its sorted neighbor list for each member instead
            row = []
            for b, u in enumerate(members):
                i = bisect_left(nb, u)
                if i < len(nb) and nb[i] == u:
                    row.append(b)
            local.append(row)
        else:
            local.append([pos[w] for w in nb if w in pos])
    return members, local


def induced_matrix(g: Graph, S):
    """Sparse adjacency of G[S] with rows/columns in sorted member order."""
    ns = as_nodeset(S, g)
    idx = np.asarray(ns.members, dtype=np.int64)
    A = g.to_scipy()[idx][:, idx].tocsr()
    A.sort_indices()
    return ns, idx, A


def induced_dense(g: Graph, S):
    """Dense 0/1 adjacency of G[S] (float64) in sorted member order."""
    ns = as_nodeset(S, g)
    members, local = induced_adjacency(g, ns)
    k = len(members)
    A = np.zeros(k * k)
    A[[a * k + b for a, nb in enumerate(local) for b in nb]] = 1.0
    return ns, np.asarray(members, dtype=np.int64), A.reshape(k, k)


def local_bfs(local: Sequence[Sequence[int]], root: int) -> list[int]:
    """Hop distances inside a local adjacency structure (-1 when unreachable)."""
    dist = [-1] * len(local)
    dist[root] = 0
    queue = deque([root])
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for w in local[u]:
            if dist[w] < 0:
                dist[w] = du
                queue.append(w)
    return dist


def articulation_points(local: Sequence[Sequence[int]], root: int = 0) -> tuple[list[int], list[bool]]:
    """Iterative Tarjan low-link pass over a local adjacency structure.

    Returns the nodes reached from ``root`` (in discovery order) and a
    per-node flag marking the cut vertices of root's component.
    """
    k = len(local)
    disc = [-1] * k
    low = [0] * k
    cut = [False] * k
    disc[root] = low[root] = 0
    order = [root]
    root_children = 0
    stack = [(root, -1, iter(local[root]))]
    while stack:
        u, parent, it = stack[-1]
        advanced = False
        for w in it:
            if disc[w] < 0:
                disc[w] = low[w] = len(order)
                order.append(w)
                if u == root:
                    root_children += 1
                stack.append((w, u, iter(local[w])))
                advanced = True
                break
            if w != parent and disc[w] < low[u]:
                low[u] = disc[w]
        if advanced:
            continue
        stack.pop()
        if parent >= 0:
            if low[u] < low[parent]:
                low[parent] = low[u]
            if parent != root and low[u] >= disc[parent]:
                cut[parent] = True
    cut[root] = root_children > 1
    return order, cut


def induced_connectivity(g: Graph, S) -> tuple[bool, frozenset[int]]:
    """Whether G[S] is connected, and the cut vertices of G[S].

    For a disconnected G[S] the cut vertices are reported per component.
    """
    members, local = induced_adjacency(g, S)
    if not members:
        raise ValueError("induced_connectivity needs a nonempty node set")
    visited = [False] * len(members)
    cuts: set[int] = set()
    components = 0
    for start in range(len(members)):
        if visited[start]:
            continue
        components += 1
        order, cut = articulation_points(local, start)
        for v in order:
            visited[v] = True
            if cut[v]:
                cuts.add(members[v])
    return components == 1, frozenset(cuts)


def connected_components(g: Graph) -> list[np.ndarray]:
    """Node arrays of each connected component, largest first."""
    import scipy.sparse.csgraph as csg

    ncomp, labels = csg.connected_components(g.to_scipy(), directed=False)
    comps = [np.flatnonzero(labels == c) for c in range(ncomp)]
    comps.sort(key=lambda c: (-c.size, c[0] if c.size else 0))
    return comps


def largest_component(g: Graph) -> np.ndarray:
    return connected_components(g)[0]


def subgraph(g: Graph, nodes) -> tuple[Graph, np.ndarray]:
    """Induced subgraph relabelled to ``0..len(nodes)-1`` plus the old ids."""
    keep = np.asarray(sorted(set(int(v) for v in nodes)), dtype=np.int64)
    new_id = np.full(g.n, -1, dtype=np.int64)
    new_id[keep] = np.arange(keep.size)
    e = g.edges()
    e = e[(new_id[e[:, 0]] >= 0) & (new_id[e[:, 1]] >= 0)]
    return Graph.from_edges(keep.size, new_id[e]), keep
