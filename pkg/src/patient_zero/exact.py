"""Exact SI likelihoods over the subset lattice of a snapshot, and the Bayes
estimators built on them.

Subsets of a snapshot O are bitmasks: bit b stands for the b-th smallest
member of O. ``rho[I]`` is the probability that, starting from infected set I,
every node of O is infected before any node outside O.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse.csgraph as csg

from .graph import Graph, NodeSet, as_nodeset
from .ranking import Ranking

DP_LIMIT = 24
BACKWARD_LIMIT = 13
BRUTE_FORCE_LIMIT = 8


class InfeasibleError(ValueError):
    """The requested exact computation is beyond the configured size cap."""


class NoSingleSourceError(ValueError):
    """No single node can produce the snapshot (e.g. G[O] is disconnected)."""


@dataclass(frozen=True)
class TransitionTable:
    snapshot: NodeSet
    values: np.ndarray

    def rho(self, nodes) -> float:
        return float(self.values[self.snapshot.mask_of(nodes)])

    def singletons(self) -> np.ndarray:
        """``rho[{i}]`` for each member i of O, in member order."""
        k = len(self.snapshot)
        return self.values[1 << np.arange(k, dtype=np.int64)]


@dataclass(frozen=True)
class Posterior:
    snapshot: NodeSet
    probs: np.ndarray

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.snapshot.members, self.probs.tolist()))


# ---------------------------------------------------------------------------
# lattice bookkeeping


@lru_cache(maxsize=8)
def _popcount_layers(k: int) -> tuple[np.ndarray, ...]:
    masks = np.arange(1 << k, dtype=np.int64)
    pc = np.bitwise_count(masks)
    order = np.argsort(pc, kind="stable")
    bounds = np.cumsum(np.bincount(pc, minlength=k + 1))
    return tuple(np.split(masks[order], bounds[:-1]))


class _Lattice:
    """Per-snapshot constants: O-relative neighbour masks and full degrees."""

    def __init__(self, g: Graph, O, limit: int):
        self.snapshot = as_nodeset(O, g)
        k = self.k = len(self.snapshot)
        if k == 0:
            raise ValueError("snapshot is empty")
        if k > limit:
            raise InfeasibleError(
                f"|O| = {k} exceeds the exact-likelihood cap of {limit}; the "
                "subset-lattice recursion needs O(2^|O|) states")
        pos = {v: b for b, v in enumerate(self.snapshot.members)}
        adj = g.adj
        self.nbr = np.zeros(k, dtype=np.int64)
        for b, v in enumerate(self.snapshot.members):
            m = 0
            for w in adj[v]:
                p = pos.get(w)
                if p is not None:
                    m |= 1 << p
            self.nbr[b] = m
        self.deg = g.degrees[list(self.snapshot.members)].astype(np.int64)

    def inflow(self, masks: np.ndarray, b: int) -> np.ndarray:
        """vol(I, member b) for each mask I."""
        return np.bitwise_count(masks & self.nbr[b]).astype(np.int64)

    def boundary(self, masks: np.ndarray) -> np.ndarray:
        """vol(I, I^c) for each mask I, counted against the whole graph."""
        out = np.zeros(masks.shape, dtype=np.int64)
        for b in range(self.k):
            has = (masks >> b) & 1
            out += has * (self.deg[b] - self.inflow(masks, b))
        return out


# ---------------------------------------------------------------------------
# dynamic programs


def _forward(lat: _Lattice, stop: int = 1) -> np.ndarray:
    k = lat.k
    rho = np.zeros(1 << k, dtype=np.float64)
    rho[(1 << k) - 1] = 1.0
    layers = _popcount_layers(k)
    for c in range(k - 1, stop - 1, -1):
        L = layers[c]
        num = np.zeros(L.size, dtype=np.float64)
        bnd = np.zeros(L.size, dtype=np.int64)
        for b in range(k):
            has = (L >> b) & 1
            cnt = lat.inflow(L, b)
            bnd += has * (lat.deg[b] - cnt)
            # only boundary members (cnt > 0, bit clear) contribute
            num += np.where(has == 0, cnt, 0) * rho[L | (1 << b)]
        with np.errstate(invalid="ignore", divide="ignore"):
            rho[L] = np.where(bnd > 0, num / np.maximum(bnd, 1), 0.0)
    return rho


def transition_prob_forward(g: Graph, O, limit: int = DP_LIMIT) -> TransitionTable:
    """All ``rho[I -> O]``, filled from ``rho[O -> O] = 1`` downward in |I|.

    ``rho[I] = sum_j vol(I, j) / vol(I, I^c) * rho[I + j]`` over boundary
    members j of O outside I.
    """
    lat = _Lattice(g, O, limit)
    return TransitionTable(lat.snapshot, _forward(lat))


@lru_cache(maxsize=4)
def _ternary_layout(k: int):
    # digit 2: node in I, digit 1: node in O' \ I, digit 0: node outside O'
    codes = np.arange(3 ** k, dtype=np.int64)
    digits = np.empty((k, codes.size), dtype=np.int8)
    rest = codes.copy()
    for b in range(k):
        digits[b] = rest % 3
        rest //= 3
    outer = np.zeros(codes.size, dtype=np.int64)
    for b in range(k):
        outer |= (digits[b] != 0).astype(np.int64) << b
    ones = (digits == 1).sum(axis=0)
    order = np.argsort(ones, kind="stable")
    bounds = np.cumsum(np.bincount(ones, minlength=k + 1))
    layers = tuple(np.split(codes[order], bounds[:-1]))
    masks = np.arange(1 << k, dtype=np.int64)
    tern = np.zeros(masks.size, dtype=np.int64)
    for b in range(k):
        tern += ((masks >> b) & 1) * 3 ** b
    return digits, outer, layers, tern


def transition_prob_backward(g: Graph, O, limit: int = BACKWARD_LIMIT) -> TransitionTable:
    """All ``rho[I -> O]`` through the last-infected-node recursion.

    ``rho[I -> O'] = sum_j rho[I -> O' - j] * vol(O' - j, j) / vol(O' - j, (O' - j)^c)``
    starting from ``rho[I -> I] = 1``. Every pair I <= O' <= O is visited once,
    so work and memory are 3^|O|; this route exists to cross-check the
    forward program.
    """
    lat = _Lattice(g, O, limit)
    k = lat.k
    masks = np.arange(1 << k, dtype=np.int64)
    bnd = lat.boundary(masks)
    # weight[O', b]: chance that member b is the last one to join O'
    weight = np.zeros((1 << k, k), dtype=np.float64)
    for b in range(k):
        inside = (masks >> b) & 1
        rest = masks & ~(1 << b)
        num = lat.inflow(rest, b)
        den = bnd[rest]
        with np.errstate(invalid="ignore", divide="ignore"):
            weight[:, b] = np.where((inside == 1) & (den > 0), num / np.maximum(den, 1), 0.0)

    digits, outer, layers, tern = _ternary_layout(k)
    f = np.zeros(3 ** k, dtype=np.float64)
    base = layers[0]
    f[base[base > 0]] = 1.0
    for t in range(1, k + 1):
        L = layers[t]
        acc = np.zeros(L.size, dtype=np.float64)
        for b in range(k):
            sel = np.flatnonzero(digits[b, L] == 1)
            if sel.size == 0:
                continue
            codes = L[sel]
            acc[sel] += f[codes - 3 ** b] * weight[outer[codes], b]
        f[L] = acc
    values = f[(3 ** k - 1) // 2 + tern]
    values[0] = 0.0
    return TransitionTable(lat.snapshot, values)


def multi_source_map(g: Graph, O, s: int, limit: int = DP_LIMIT) -> tuple[tuple[int, ...], float]:
    """Most likely source set of size ``s`` under a uniform prior.

    The forward recursion only has to reach subsets of size s. Ties go to the
    lexicographically smallest sorted node tuple.
    """
    lat = _Lattice(g, O, limit)
    if not 1 <= s <= lat.k:
        raise ValueError(f"source count must lie in [1, {lat.k}]")
    rho = _forward(lat, stop=s)
    L = _popcount_layers(lat.k)[s]
    vals = rho[L]
    best = vals.max()
    tied = L[vals >= best - 1e-12 * max(best, 1.0)]
    winner = min((lat.snapshot.nodes_of(int(m)) for m in tied))
    return winner, float(rho[lat.snapshot.mask_of(winner)])


# ---------------------------------------------------------------------------
# path view and oracles


def path_probability(g: Graph, sigma, n_sources: int = 1) -> float:
    """Probability of an infection order given its first ``n_sources`` entries.

    Each step multiplies ``vol(prefix, next) / vol(prefix, prefix^c)``; an
    order that is not a permitted permutation has probability 0.
    """
    order = list(getattr(sigma, "order", sigma))
    n_sources = getattr(sigma, "n_sources", n_sources)
    if len(set(order)) != len(order):
        return 0.0
    adj = g.adj
    infected = set(order[:n_sources])
    cut = sum(len(adj[v]) for v in infected) - sum(
        1 for v in infected for w in adj[v] if w in infected)
    p = 1.0
    for v in order[n_sources:]:
        into = sum(1 for w in adj[v] if w in infected)
        if into == 0:
            return 0.0
        p *= into / cut
        cut += len(adj[v]) - 2 * into
        infected.add(v)
    return p


def brute_force_likelihood(g: Graph, i: int, O, limit: int = BRUTE_FORCE_LIMIT) -> float:
    """Sum of path probabilities over every permitted order of O starting at i."""
    members = set(as_nodeset(O, g).members)
    if len(members) > limit:
        raise InfeasibleError(f"path enumeration capped at |O| <= {limit}")
    if i not in members:
        return 0.0
    adj = g.adj

    def extend(infected, cut):
        if len(infected) == len(members):
            return 1.0
        total = 0.0
        for v in members - infected:
            into = sum(1 for w in adj[v] if w in infected)
            if into:
                total += into / cut * extend(infected | {v}, cut + len(adj[v]) - 2 * into)
        return total

    return extend(frozenset([i]), len(adj[i]))


def transition_prob_memo(g: Graph, I, O) -> float:
    """``rho[I -> O]`` by memoised top-down recursion on frozensets (test oracle)."""
    members = frozenset(as_nodeset(O, g).members)
    start = frozenset(as_nodeset(I, g).members)
    if not start <= members:
        return 0.0
    adj = g.adj

    @lru_cache(maxsize=None)
    def rho(cur: frozenset) -> float:
        if cur == members:
            return 1.0
        cut = 0
        flows = {}
        for v in cur:
            for w in adj[v]:
                if w not in cur:
                    cut += 1
                    if w in members:
                        flows[w] = flows.get(w, 0) + 1
        if cut == 0:
            return 0.0
        return sum(c / cut * rho(cur | {w}) for w, c in flows.items())

    return rho(start)


def brute_force_multi_source(g: Graph, O, s: int) -> tuple[tuple[int, ...], float]:
    """Scan every s-subset of O with :func:`transition_prob_memo`."""
    members = as_nodeset(O, g).members
    best, arg = -1.0, None
    for combo in itertools.combinations(members, s):
        r = transition_prob_memo(g, combo, members)
        if r > best + 1e-12 * max(best, 1.0):
            best, arg = r, combo
    return arg, best


# ---------------------------------------------------------------------------
# Bayes estimators (uniform prior)


def posterior(g: Graph, O, limit: int = DP_LIMIT) -> Posterior:
    table = transition_prob_forward(g, O, limit)
    lik = table.singletons()
    total = lik.sum()
    if total <= 0:
        raise NoSingleSourceError("no single node can produce this snapshot")
    return Posterior(table.snapshot, lik / total)


def _argbest(values: np.ndarray, nodes, maximize: bool, rtol: float = 1e-12) -> int:
    v = values if maximize else -values
    best = v.max()
    scale = max(abs(best), 1.0)
    for node, x in sorted(zip(nodes, v)):
        if x >= best - rtol * scale:
            return node
    raise AssertionError("unreachable")


def map_estimate(post: Posterior) -> int:
    return _argbest(post.probs, post.snapshot.members, maximize=True)


def expected_distances(g: Graph, post: Posterior) -> np.ndarray:
    """Posterior-weighted mean hop distance from each member of O to the source."""
    members = list(post.snapshot.members)
    d = csg.shortest_path(g.to_scipy(), unweighted=True, indices=members, directed=False)
    return d[:, members] @ post.probs


def distance_estimate(g: Graph, post: Posterior) -> int:
    return _argbest(expected_distances(g, post), post.snapshot.members, maximize=False)


def rank_estimate(post: Posterior) -> Ranking:
    return Ranking.from_scores(post.snapshot.members, post.probs)


def bayes_rank(g: Graph, O, limit: int = DP_LIMIT) -> Ranking:
    return rank_estimate(posterior(g, O, limit))


def bayes_distance_rank(g: Graph, O, limit: int = DP_LIMIT) -> Ranking:
    """Members of O ordered by increasing posterior expected distance."""
    post = posterior(g, O, limit)
    return Ranking.from_scores(post.snapshot.members, expected_distances(g, post),
                               descending=False)
