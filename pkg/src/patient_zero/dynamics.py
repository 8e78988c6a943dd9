"""Continuous-time SI contagion: jump-chain and timed (Gillespie) samplers."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .graph import Graph, as_nodeset


class AbsorbedError(RuntimeError):
    """The infected set has no susceptible neighbours left."""


@dataclass(frozen=True)
class InfectionTrace:
    order: tuple[int, ...]
    n_sources: int = 1
    times: tuple[float, ...] | None = None
    beta: float | None = None

    @property
    def sources(self) -> tuple[int, ...]:
        return self.order[:self.n_sources]

    @property
    def snapshot(self) -> frozenset[int]:
        return frozenset(self.order)

    def __len__(self) -> int:
        return len(self.order)


def is_permitted(g: Graph, order, n_sources: int = 1) -> bool:
    """True when every node after the sources touches an earlier node."""
    if len(set(order)) != len(order):
        return False
    seen = set(order[:n_sources])
    adj = g.adj
    for v in order[n_sources:]:
        if not any(w in seen for w in adj[v]):
            return False
        seen.add(v)
    return True


def next_infection_distribution(g: Graph, infected) -> list[tuple[int, float]]:
    """Probability that each susceptible node is the next one infected.

    Node j is hit with probability ``vol(I, j) / vol(I, I^c)``; only nodes with
    at least one infected neighbour are listed, in ascending id order.
    """
    I = set(as_nodeset(infected, g).members)
    if not I:
        raise ValueError("infected set is empty")
    counts: dict[int, int] = {}
    adj = g.adj
    for v in I:
        for w in adj[v]:
            if w not in I:
                counts[w] = counts.get(w, 0) + 1
    total = sum(counts.values())
    if total == 0:
        raise AbsorbedError("infected set is closed: no edges leave it")
    return [(j, counts[j] / total) for j in sorted(counts)]


def _reach_at_least(g: Graph, sources, k: int) -> bool:
    seen = set(sources)
    if len(seen) >= k:
        return True
    queue = deque(seen)
    adj = g.adj
    while queue:
        for w in adj[queue.popleft()]:
            if w not in seen:
                seen.add(w)
                if len(seen) >= k:
                    return True
                queue.append(w)
    return False


class _Frontier:
    """Half-edges leaving the infected set, pruned lazily.

    A uniformly drawn live half-edge lands on susceptible node j with
    probability vol(I, j) / vol(I, I^c), which is exactly the jump law.
    """

    def __init__(self, g: Graph, sources):
        self.adj = g.adj
        self.infected = bytearray(g.n)
        self.stubs: list[int] = []
        self.cut = 0
        for s in sources:
            self.add(s)

    def add(self, v: int) -> None:
        nb = self.adj[v]
        inside = 0
        for w in nb:
            inside += self.infected[w]
        self.infected[v] = 1
        self.cut += len(nb) - 2 * inside
        self.stubs.extend(nb)

    def draw(self, rng) -> int:
        stubs, infected = self.stubs, self.infected
        while stubs:
            idx = int(rng.random() * len(stubs))
            t = stubs[idx]
            if not infected[t]:
                return t
            stubs[idx] = stubs[-1]
            stubs.pop()
        raise AbsorbedError("infected set is closed: no edges leave it")


def simulate_until_size(g: Graph, sources, k: int, rng) -> InfectionTrace:
    """Run the jump chain from ``sources`` until ``k`` nodes are infected.

    Only the order of infections is produced; the infection rate plays no
    role in which snapshot of size k is reached.
    """
    src = list(dict.fromkeys(int(s) for s in sources))
    if not src:
        raise ValueError("need at least one source")
    as_nodeset(src, g)
    if k < len(src):
        raise ValueError(f"target size {k} is smaller than the source set")
    if not _reach_at_least(g, src, k):
        raise ValueError(f"fewer than {k} nodes are reachable from the sources")
    rng = np.random.default_rng(rng)
    front = _Frontier(g, src)
    order = list(src)
    while len(order) < k:
        t = front.draw(rng)
        front.add(t)
        order.append(t)
    return InfectionTrace(tuple(order), n_sources=len(src))


def simulate_until_time(g: Graph, sources, beta: float, t: float, rng) -> InfectionTrace:
    """Gillespie simulation with per-edge rate ``beta`` up to time ``t``.

    The waiting time out of infected set I is Exp(beta * vol(I, I^c)); all
    sources start infected at time 0.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    if t < 0:
        raise ValueError("t must be nonnegative")
    src = list(dict.fromkeys(int(s) for s in sources))
    if not src:
        raise ValueError("need at least one source")
    as_nodeset(src, g)
    rng = np.random.default_rng(rng)
    front = _Frontier(g, src)
    order = list(src)
    times = [0.0] * len(src)
    now = 0.0
    while front.cut > 0:
        now += rng.exponential(1.0 / (beta * front.cut))
        if now > t or math.isinf(now):
            break
        v = front.draw(rng)
        front.add(v)
        order.append(v)
        times.append(now)
    return InfectionTrace(tuple(order), n_sources=len(src), times=tuple(times), beta=beta)
