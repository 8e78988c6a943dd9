"""Monte-Carlo evaluation: expected relative rank of the true source versus
infection size, plus per-method wall time."""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import baselines, exact, greedy, meanfield
from .dynamics import simulate_until_size
from .graph import Graph, largest_component
from .ranking import Ranking

METHODS = ("bayes", "bayes-dist", "ge", "mfa", "rc", "jc", "dc", "random")
EXACT_METHODS = ("bayes", "bayes-dist")


def rank_snapshot(method: str, g: Graph, O, rng=None, bayes_cap: int = exact.DP_LIMIT) -> Ranking:
    """Ranking of the members of O produced by one named estimator."""
    if method == "bayes":
        return exact.bayes_rank(g, O, limit=bayes_cap)
    if method == "bayes-dist":
        return exact.bayes_distance_rank(g, O, limit=bayes_cap)
    if method == "ge":
        return greedy.ge_rank(g, O)
    if method == "mfa":
        return meanfield.mfa_rank(g, O)
    if method == "rc":
        return baselines.rumor_centrality_rank(g, O)
    if method == "jc":
        return baselines.jordan_center_rank(g, O)
    if method == "dc":
        return baselines.degree_centrality_rank(g, O)
    if method == "random":
        return baselines.random_rank(O, rng)
    raise ValueError(f"unknown method {method!r}; valid methods: {', '.join(METHODS)}")


def normalized_rank(ranking: Ranking, true_source: int, denominator: float) -> float:
    """``(R - 1) / denominator`` with R the midrank of the true source."""
    try:
        pos = ranking.position_of(true_source)
    except KeyError:
        raise ValueError(f"true source {true_source} missing from the ranking") from None
    return (pos - 1.0) / denominator


def graph_stats(g: Graph) -> dict:
    """Node count, mean and max degree, and global transitivity."""
    deg = g.degrees.astype(np.float64)
    A = g.to_scipy()
    closed = float((A @ A).multiply(A).sum()) / 2.0  # = 3 * triangles
    triples = float((deg * (deg - 1) / 2.0).sum())
    return {
        "n": g.n,
        "mean_degree": float(deg.mean()) if g.n else 0.0,
        "max_degree": int(deg.max()) if g.n else 0,
        "clustering": closed / triples if triples else 0.0,
    }


@dataclass
class ExperimentConfig:
    graph: dict = field(default_factory=lambda: {"generator": "regular_tree", "degree": 3, "depth": 5})
    methods: list = field(default_factory=lambda: ["ge", "mfa", "rc", "jc", "dc", "random"])
    sizes: list = field(default_factory=lambda: [2, 5, 10])
    replicates: int = 500
    seed: int = 0
    normalization: str = "snapshot"
    bayes_cap: int = 10
    workers: int = 0
    record_timing: bool = True

    def __post_init__(self):
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ValueError(f"unknown method(s) {bad}; valid methods: {', '.join(METHODS)}")
        if any(int(k) < 2 for k in self.sizes):
            raise ValueError("infection sizes must be at least 2")
        if self.replicates < 1:
            raise ValueError("need at least one replicate")
        if self.normalization not in ("snapshot", "network"):
            raise ValueError("normalization must be 'snapshot' or 'network'")

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls(**json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ExperimentResult:
    rows: list
    metadata: dict

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["method", "k", "replicates", "mean_rank", "stderr", "mean_ms"])
            for r in self.rows:
                w.writerow([r["method"], r["k"], r["replicates"],
                            _fmt(r["mean_rank"]), _fmt(r["stderr"]), _fmt(r["mean_ms"])])

    def write_metadata(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.metadata, fh, indent=2, sort_keys=True)

    def lookup(self, method: str, k: int) -> dict:
        for r in self.rows:
            if r["method"] == method and r["k"] == k:
                return r
        raise KeyError((method, k))


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x))


def _replicate(args):
    g, component, methods, k, rep, seed, denom_network, bayes_cap = args
    rng = np.random.default_rng([seed, k, rep])
    source = int(component[rng.integers(component.size)])
    trace = simulate_until_size(g, [source], k, rng)
    O = sorted(trace.order)
    denom = g.n if denom_network else len(O)
    out = {}
    for m in methods:
        if m in EXACT_METHODS and k > bayes_cap:
            out[m] = None
            continue
        t0 = time.perf_counter()
        ranking = rank_snapshot(m, g, O, rng, bayes_cap=max(bayes_cap, exact.DP_LIMIT))
        elapsed = time.perf_counter() - t0
        out[m] = (normalized_rank(ranking, source, denom), elapsed)
    return k, rep, out


def run_experiment(cfg: ExperimentConfig, g: Graph | None = None) -> ExperimentResult:
    """Average the normalized rank of the true source over random SI snapshots.

    Each (size, replicate) pair draws a uniform source from the largest
    component using its own generator seeded by ``(seed, k, replicate)``, so
    results do not depend on execution order or worker count. Exact Bayes
    methods are skipped (empty cells) above ``bayes_cap``.
    """
    if g is None:
        from .generators import graph_from_config

        g = graph_from_config(cfg.graph)
    component = largest_component(g)
    sizes = [int(k) for k in cfg.sizes]
    too_big = [k for k in sizes if k > component.size]
    if too_big:
        raise ValueError(f"sizes {too_big} exceed the largest component ({component.size} nodes)")

    tasks = [(g, component, list(cfg.methods), k, rep, cfg.seed,
              cfg.normalization == "network", cfg.bayes_cap)
             for k in sizes for rep in range(cfg.replicates)]
    workers = cfg.workers or int(os.environ.get("PATIENT_ZERO_WORKERS", "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_replicate, tasks, chunksize=max(1, len(tasks) // (8 * workers))))
    else:
        outputs = [_replicate(t) for t in tasks]

    table = {(k, rep): out for k, rep, out in outputs}
    rows = []
    for m in cfg.methods:
        for k in sizes:
            cells = [table[(k, rep)][m] for rep in range(cfg.replicates)]
            if any(c is None for c in cells):
                rows.append({"method": m, "k": k, "replicates": 0, "mean_rank": None,
                             "stderr": None, "mean_ms": None, "skipped": True})
                continue
            ranks = np.array([c[0] for c in cells])
            secs = np.array([c[1] for c in cells])
            se = float(ranks.std(ddof=1) / math.sqrt(ranks.size)) if ranks.size > 1 else 0.0
            rows.append({"method": m, "k": k, "replicates": ranks.size,
                         "mean_rank": float(ranks.mean()), "stderr": se,
                         "mean_ms": float(secs.mean() * 1e3) if cfg.record_timing else None,
                         "skipped": False})
    meta = {"config": cfg.to_dict(), "graph_stats": graph_stats(g),
            "largest_component": int(component.size)}
    return ExperimentResult(rows, meta)
