"""Scored total orders over candidate sources."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

SMALL = 64


@dataclass(frozen=True)
class Ranking:
    """Candidate nodes listed best first, with scores and midrank positions.

    ``positions[k]`` is the 1-based rank of ``nodes[k]``; nodes whose scores
    tie share the average of the positions they jointly occupy.
    """

    nodes: tuple[int, ...]
    scores: tuple[float, ...]
    positions: tuple[float, ...]
    flagged: bool = False

    @classmethod
    def from_scores(cls, nodes: Sequence[int], scores: Sequence[float],
                    descending: bool = True, rtol: float = 1e-9,
                    flagged: bool = False) -> "Ranking":
        """Rank ``nodes`` by ``scores``.

        Scores within ``rtol`` (relative to the largest finite magnitude) of
        their sorted neighbour are treated as ties, so floating-point noise on
        symmetric inputs does not split a tie. Tied nodes are listed by id.
        """
        if len(nodes) <= SMALL and len(nodes) == len(scores):
            return cls._from_scores_small(nodes, scores, descending, rtol, flagged)
        nodes = np.asarray(nodes, dtype=np.int64)
        s = np.asarray(scores, dtype=np.float64)
        if nodes.shape != s.shape:
            raise ValueError("nodes and scores differ in length")
        if nodes.size == 0:
            raise ValueError("cannot rank an empty candidate set")
        key = -s if descending else s
        order = np.lexsort((nodes, key))
        ks = key[order]
        finite = np.isfinite(ks)
        scale = np.abs(ks[finite]).max() if finite.any() else 0.0
        tol = rtol * scale
        # group consecutive sorted keys into tie blocks
        gaps = np.ones(ks.size, dtype=bool)
        if ks.size > 1:
            with np.errstate(invalid="ignore"):
                diff = ks[1:] - ks[:-1]
            same = (ks[1:] == ks[:-1]) | (finite[1:] & finite[:-1] & (diff <= tol))
            gaps[1:] = ~same
        block = np.cumsum(gaps) - 1
        first = np.flatnonzero(gaps)
        last = np.append(first[1:], ks.size) - 1
        mid = (first + last) / 2.0 + 1.0
        pos = mid[block]
        return cls(tuple(nodes[order].tolist()), tuple(s[order].tolist()),
                   tuple(pos.tolist()), flagged)

    @classmethod
    def _from_scores_small(cls, nodes, scores, descending, rtol, flagged):
        # same rule as the array path; plain Python is faster for a few dozen items
        if not len(nodes):
            raise ValueError("cannot rank an empty candidate set")
        sign = -1.0 if descending else 1.0
        items = sorted((sign * float(x), int(v), float(x)) for v, x in zip(nodes, scores))
        finite = [abs(k) for k, _, _ in items if math.isfinite(k)]
        tol = rtol * max(finite) if finite else 0.0
        pos = [0.0] * len(items)
        start = 0
        for i in range(1, len(items) + 1):
            if i < len(items):
                a, b = items[i - 1][0], items[i][0]
                if a == b or (math.isfinite(a) and math.isfinite(b) and b - a <= tol):
                    continue
            mid = (start + i - 1) / 2.0 + 1.0
            for t in range(start, i):
                pos[t] = mid
            start = i
        return cls(tuple(v for _, v, _ in items), tuple(x for _, _, x in items),
                   tuple(pos), flagged)

    @classmethod
    def from_order(cls, ordered_nodes: Sequence[int]) -> "Ranking":
        """A strict ranking with the given best-first order (score = -position)."""
        k = len(ordered_nodes)
        return cls(tuple(int(v) for v in ordered_nodes),
                   tuple(float(-p) for p in range(1, k + 1)),
                   tuple(float(p) for p in range(1, k + 1)))

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def top(self) -> int:
        return self.nodes[0]

    def position_of(self, node: int) -> float:
        try:
            return self.positions[self.nodes.index(node)]
        except ValueError:
            raise KeyError(f"node {node} is not among the ranked candidates") from None

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.nodes, self.positions))

    def rows(self):
        return list(zip(self.nodes, self.scores, self.positions))
