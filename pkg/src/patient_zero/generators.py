"""Synthetic networks: regular trees, uniform random trees and degree-corrected
stochastic block models."""

from __future__ import annotations

import heapq
from dataclasses import asdict, dataclass

import numpy as np

from .graph import Graph, largest_component, subgraph


def regular_tree(degree: int, depth: int) -> Graph:
    """Root 0 has ``degree`` children, every other internal node ``degree - 1``.

    Nodes are numbered breadth first.
    """
    if degree < 2 or depth < 0:
        raise ValueError("need degree >= 2 and depth >= 0")
    edges = []
    frontier = [0]
    n = 1
    for level in range(depth):
        fan = degree if level == 0 else degree - 1
        nxt = []
        for parent in frontier:
            for _ in range(fan):
                edges.append((parent, n))
                nxt.append(n)
                n += 1
        frontier = nxt
    return Graph.from_edges(n, edges)


def regular_tree_size(degree: int, depth: int) -> int:
    if depth == 0:
        return 1
    return 1 + degree * sum((degree - 1) ** h for h in range(depth))


def prufer_to_edges(seq, n: int) -> list[tuple[int, int]]:
    """Decode a Prufer sequence of length ``n - 2`` into tree edges."""
    degree = np.ones(n, dtype=np.int64)
    for v in seq:
        degree[v] += 1
    leaves = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    edges = []
    for v in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, int(v)))
        degree[v] -= 1
        if degree[v] == 1:
            heapq.heappush(leaves, int(v))
    u, w = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append((u, w))
    return edges


def random_tree(n: int, seed=None) -> Graph:
    """Uniformly random labelled tree on ``n`` nodes (Prufer decoding)."""
    if n < 1:
        raise ValueError("need n >= 1")
    if n == 1:
        return Graph.from_edges(1, [])
    rng = np.random.default_rng(seed)
    seq = rng.integers(0, n, size=n - 2)
    return Graph.from_edges(n, prufer_to_edges(seq.tolist(), n))


@dataclass(frozen=True)
class DcsbmConfig:
    n: int = 1962
    communities: int = 3
    p_in: float = 0.5
    p_out: float = 0.02
    pareto_alpha: float = 2.0
    pareto_threshold: float = 1.0
    target_mean_degree: float | None = 66.0
    seed: int | None = 0
    largest_component: bool = False

    def __post_init__(self):
        if self.communities < 1 or self.n < 1:
            raise ValueError("need n >= 1 and at least one community")
        if not 0.0 <= self.p_out <= self.p_in <= 1.0:
            raise ValueError("need 0 <= p_out <= p_in <= 1")
        if self.pareto_alpha <= 1.0:
            raise ValueError("pareto_alpha must exceed 1")

    def to_dict(self) -> dict:
        return asdict(self)


def dcsbm_blocks(n: int, communities: int) -> np.ndarray:
    """Equal-size contiguous blocks (sizes differ by at most one)."""
    return (np.arange(n) * communities) // n


def pareto_propensities(n: int, alpha: float, threshold: float, rng) -> np.ndarray:
    # classical Pareto: P(theta > x) = (threshold / x) ** alpha for x >= threshold
    return threshold * (1.0 + rng.pareto(alpha, size=n))


def dcsbm_scale(theta: np.ndarray, blocks: np.ndarray, p_in: float, p_out: float,
                target_mean_degree: float) -> float:
    """Constant c making the expected mean degree of the unclipped model equal the target.

    Expected degree sum is ``c * sum_{i != j} theta_i theta_j P_ij``; clipping at
    probability one is ignored here, so heavy tails can land slightly low.
    """
    k = int(blocks.max()) + 1
    per_block = np.bincount(blocks, weights=theta, minlength=k)
    sq_block = np.bincount(blocks, weights=theta ** 2, minlength=k)
    total = per_block.sum()
    within = (per_block ** 2 - sq_block).sum()
    across = total ** 2 - (per_block ** 2).sum()
    weight = p_in * within + p_out * across
    if weight <= 0:
        return 0.0
    return target_mean_degree * theta.size / weight


def dcsbm(cfg: DcsbmConfig) -> Graph:
    """Sample a degree-corrected planted-partition graph.

    Edge ``i < j`` appears with probability ``min(1, c * theta_i * theta_j * P_ij)``.
    When ``target_mean_degree`` is None the scale c is 1.
    """
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n
    blocks = dcsbm_blocks(n, cfg.communities)
    theta = pareto_propensities(n, cfg.pareto_alpha, cfg.pareto_threshold, rng)
    return sample_dcsbm(theta, blocks, cfg, rng)


def sample_dcsbm(theta, blocks, cfg: DcsbmConfig, rng) -> Graph:
    """Edge sampling step of :func:`dcsbm` for given propensities and block labels."""
    n = theta.size
    c = 1.0 if cfg.target_mean_degree is None else dcsbm_scale(
        theta, blocks, cfg.p_in, cfg.p_out, cfg.target_mean_degree)
    chunks = []
    # row-blocked upper triangle keeps memory at O(n * rows)
    rows_per = max(1, 4_000_000 // max(n, 1))
    for start in range(0, n, rows_per):
        stop = min(n, start + rows_per)
        i = np.arange(start, stop)[:, None]
        j = np.arange(start + 1, n)[None, :]
        P = np.where(blocks[i] == blocks[j], cfg.p_in, cfg.p_out)
        prob = np.minimum(1.0, c * theta[i] * theta[j] * P)
        hit = (rng.random(prob.shape) < prob) & (j > i)
        ii, jj = np.nonzero(hit)
        chunks.append(np.column_stack([ii + start, jj + start + 1]))
    edges = np.concatenate(chunks) if chunks else np.empty((0, 2), dtype=np.int64)
    g = Graph.from_edges(n, edges)
    if cfg.largest_component:
        g, _ = subgraph(g, largest_component(g))
    return g


def erdos_renyi(n: int, p: float, seed=None) -> Graph:
    """G(n, p) as the one-block, constant-propensity case of the sampler."""
    rng = np.random.default_rng(seed)
    cfg = DcsbmConfig(n=n, communities=1, p_in=p, p_out=0.0, target_mean_degree=None, seed=None)
    return sample_dcsbm(np.ones(n), np.zeros(n, dtype=np.int64), cfg, rng)


GENERATORS = ("regular_tree", "random_tree", "dcsbm", "erdos_renyi")


def graph_from_config(spec: dict) -> Graph:
    """Build a graph from a JSON-style description.

    ``{"file": path, "one_based": bool}`` loads an edge list; otherwise
    ``{"generator": name, ...}`` with the generator's keyword arguments.
    """
    spec = dict(spec)
    if "file" in spec:
        from .graph import read_edge_list

        g, _ = read_edge_list(spec["file"], one_based=bool(spec.get("one_based", False)))
        return g
    name = spec.pop("generator", None)
    if name == "regular_tree":
        return regular_tree(int(spec.get("degree", 3)), int(spec.get("depth", 10)))
    if name == "random_tree":
        return random_tree(int(spec.get("n", 500)), spec.get("seed"))
    if name == "dcsbm":
        return dcsbm(DcsbmConfig(**spec))
    if name == "erdos_renyi":
        return erdos_renyi(int(spec["n"]), float(spec["p"]), spec.get("seed"))
    raise ValueError(f"unknown generator {name!r}; choose from {', '.join(GENERATORS)}")
