"""Greedy elimination: peel the snapshot backwards, one node at a time."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .graph import DisconnectedSnapshotError, Graph, articulation_points, induced_adjacency
from .ranking import Ranking


@dataclass(frozen=True)
class EliminationLog:
    removed: tuple[tuple[int, float], ...]
    survivor: int
    candidate_sets: tuple[frozenset[int], ...] | None = None

    @property
    def order(self) -> tuple[int, ...]:
        return tuple(v for v, _ in self.removed)


def _score(d_in: int, den: int) -> float:
    if den > 0:
        return d_in / den
    return math.inf if d_in > 0 else -math.inf


def ge_eliminate(g: Graph, O, record: bool = False) -> EliminationLog:
    """Repeatedly drop the node most likely to have been infected last.

    At each step the candidates are the nodes whose removal keeps the rest
    connected, and node j scores ``vol(O_i - j, j) / vol(O_i - j, (O_i - j)^c)``.
    The highest score is removed (smallest id on ties). The survivor is the
    source estimate. With ``record=True`` the candidate set of every step is
    kept in the log.
    """
    members, local = induced_adjacency(g, O)
    k = len(members)
    if k == 0:
        raise ValueError("snapshot is empty")
    order, _ = articulation_points(local, 0)
    if len(order) != k:
        raise DisconnectedSnapshotError(
            "greedy elimination needs a connected snapshot; run it per component")

    deg = [int(g.degrees[v]) for v in members]
    d_in = [len(nb) for nb in local]
    boundary = sum(deg) - sum(d_in)
    inner_edges = sum(d_in) // 2
    nbrs = [set(nb) for nb in local]
    alive = set(range(k))
    removed = []
    cand_log = [] if record else None

    for _ in range(k - 1):
        if inner_edges == len(alive) - 1:
            # G[alive] is a tree: exactly its leaves can go
            cands = [v for v in sorted(alive) if d_in[v] <= 1]
        else:
            _, cut = articulation_points(nbrs, min(alive))
            cands = [v for v in sorted(alive) if not cut[v]]
        if record:
            cand_log.append(frozenset(members[v] for v in cands))
        scores = {v: _score(d_in[v], boundary - deg[v] + 2 * d_in[v]) for v in cands}
        if all(s == -math.inf for s in scores.values()):
            scores = {v: float(d_in[v]) for v in cands}
        # members are sorted, so the first maximal local index has the smallest id
        best = max(cands, key=lambda v: (scores[v], -v))
        boundary += 2 * d_in[best] - deg[best]
        inner_edges -= d_in[best]
        for w in nbrs[best]:
            nbrs[w].discard(best)
            d_in[w] -= 1
        nbrs[best] = set()
        alive.discard(best)
        removed.append((members[best], scores[best]))

    survivor = members[next(iter(alive))]
    return EliminationLog(tuple(removed), survivor,
                          tuple(cand_log) if record else None)


def ge_rank(g: Graph, O) -> Ranking:
    """Survivor first, then nodes in reverse order of elimination.

    The score of a node is minus its distance (in steps) from the survivor.
    """
    log = ge_eliminate(g, O)
    ordered = [log.survivor] + [v for v, _ in reversed(log.removed)]
    return Ranking(tuple(ordered), tuple(float(-p) for p in range(len(ordered))),
                   tuple(float(p) for p in range(1, len(ordered) + 1)))
