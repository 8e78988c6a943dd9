"""Command-line entry point: generate, simulate, infer, evaluate, stats, plot.

Exit codes: 0 ok, 1 usage error, 2 input error, 3 infeasible request.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__, exact, greedy, meanfield
from .dynamics import AbsorbedError, simulate_until_size, simulate_until_time
from .evaluation import METHODS, ExperimentConfig, graph_stats, rank_snapshot, run_experiment
from .generators import GENERATORS, graph_from_config
from .graph import (
    DisconnectedSnapshotError,
    GraphFormatError,
    largest_component,
    read_edge_list,
    write_edge_list,
    write_label_table,
)

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INFEASIBLE = 0, 1, 2, 3
INFER_METHODS = METHODS + ("multi",)


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


class NodeCodec:
    """Translates between node tokens in files and dense internal ids."""

    def __init__(self, n: int, labels=None, one_based: bool = False):
        self.n = n
        self.labels = labels
        self.offset = 1 if (one_based and labels is None) else 0
        self._index = {lab: i for i, lab in enumerate(labels)} if labels is not None else None

    def decode(self, token: str) -> int:
        token = token.strip()
        if self._index is not None:
            if token not in self._index:
                raise InputError(f"unknown node label {token!r}")
            return self._index[token]
        try:
            v = int(token) - self.offset
        except ValueError:
            raise InputError(f"node id {token!r} is not an integer") from None
        if not 0 <= v < self.n:
            raise InputError(f"node {token} is outside the graph")
        return v

    def encode(self, v: int) -> str:
        if self.labels is not None:
            return self.labels[v]
        return str(int(v) + self.offset)


# ---------------------------------------------------------------------------
# helpers


def _digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out: str, subcommand: str, config: dict, seed, inputs) -> None:
    manifest = {
        "subcommand": subcommand,
        "config": config,
        "seed": seed,
        "version": __version__,
        "inputs": {os.path.abspath(p): _digest(p) for p in inputs},
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_graph(path: str, one_based: bool, out: str | None = None):
    if not os.path.exists(path):
        raise FileNotFoundError(f"graph file not found: {path}")
    g, labels = read_edge_list(path, one_based=one_based)
    if labels is not None and out is not None:
        write_label_table(labels, os.path.join(out, "labels.tsv"))
    return g, NodeCodec(g.n, labels, one_based)


def _read_nodes(path: str, codec: NodeCodec) -> list[int]:
    if not os.path.exists(path):
        raise FileNotFoundError(f"snapshot file not found: {path}")
    nodes = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            for tok in line.replace(",", " ").split():
                try:
                    nodes.append(codec.decode(tok))
                except InputError as exc:
                    raise InputError(f"{path}, line {lineno}: {exc}") from None
    if not nodes:
        raise InputError(f"{path}: snapshot is empty")
    return sorted(set(nodes))


def _load_json(path: str) -> dict:
    if not os.path.exists(path):
        raise FileNotFoundError(f"config file not found: {path}")
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected a JSON object")
    return data


def _csv_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# subcommands


def cmd_generate(args) -> int:
    spec = _load_json(args.config) if args.config else {}
    overrides = {
        "generator": args.generator, "degree": args.degree, "depth": args.depth, "n": args.n,
        "communities": args.communities, "p_in": args.p_in, "p_out": args.p_out,
        "pareto_alpha": args.pareto_alpha, "pareto_threshold": args.pareto_threshold,
        "target_mean_degree": args.mean_degree, "p": args.p,
    }
    spec.update({k: v for k, v in overrides.items() if v is not None})
    if args.largest_component:
        spec["largest_component"] = True
    if args.seed is not None:
        spec["seed"] = args.seed
    name = spec.get("generator")
    if name not in GENERATORS:
        raise UsageError(f"generate: choose --generator from {', '.join(GENERATORS)}")
    if name in ("random_tree", "dcsbm", "erdos_renyi"):
        spec.setdefault("seed", 0)
    allowed = {
        "regular_tree": {"degree", "depth"},
        "random_tree": {"n", "seed"},
        "erdos_renyi": {"n", "p", "seed"},
        "dcsbm": {"n", "communities", "p_in", "p_out", "pareto_alpha", "pareto_threshold",
                  "target_mean_degree", "seed", "largest_component"},
    }[name]
    extra = sorted(set(spec) - allowed - {"generator"})
    if extra:
        raise UsageError(f"generate: {name} does not take {', '.join(extra)}")
    if name == "erdos_renyi" and ("n" not in spec or "p" not in spec):
        raise UsageError("generate: erdos_renyi needs --n and --p")
    try:
        g = graph_from_config(spec)
    except (TypeError, ValueError) as exc:
        raise InputError(f"generate: {exc}") from None
    write_edge_list(g, os.path.join(args.out, "graph.edges"), one_based=args.one_based)
    side = {"config": spec, "seed": spec.get("seed"), "one_based": args.one_based,
            "stats": graph_stats(g)}
    with open(os.path.join(args.out, "graph.json"), "w") as fh:
        json.dump(side, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_manifest(args.out, "generate", spec, spec.get("seed"),
                    [args.config] if args.config else [])
    print(f"wrote {g.n} nodes, {g.m} edges to {os.path.join(args.out, 'graph.edges')}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    g, codec = _load_graph(args.graph, args.one_based, args.out)
    seed = 0 if args.seed is None else args.seed
    rng = np.random.default_rng(seed)
    if args.source:
        sources = sorted({codec.decode(tok) for s in args.source for tok in s.split(",") if tok})
    else:
        comp = largest_component(g)
        sources = [int(comp[rng.integers(comp.size)])]
    if args.size is not None:
        if args.time is not None or args.beta is not None:
            raise UsageError("simulate: --size cannot be combined with --time/--beta")
        trace = simulate_until_size(g, sources, args.size, rng)
    else:
        if args.time is None or args.beta is None:
            raise UsageError("simulate: give --size K, or both --time T and --beta B")
        trace = simulate_until_time(g, sources, args.beta, args.time, rng)
    if trace.times is None:
        rows = [(i, codec.encode(v)) for i, v in enumerate(trace.order)]
        header = ["step", "node"]
    else:
        rows = [(i, codec.encode(v), _fmt(t)) for i, (v, t) in enumerate(zip(trace.order, trace.times))]
        header = ["step", "node", "time"]
    _csv_rows(os.path.join(args.out, "trace.csv"), header, rows)
    with open(os.path.join(args.out, "snapshot.txt"), "w") as fh:
        for v in sorted(trace.order):
            fh.write(codec.encode(v) + "\n")
    config = {"graph": args.graph, "one_based": args.one_based,
              "sources": [codec.encode(v) for v in sources],
              "size": args.size, "time": args.time, "beta": args.beta}
    _write_manifest(args.out, "simulate", config, seed, [args.graph])
    print(f"infected {len(trace)} nodes from source(s) {', '.join(codec.encode(v) for v in sources)}")
    return EXIT_OK


def cmd_infer(args) -> int:
    g, codec = _load_graph(args.graph, args.one_based, args.out)
    O = _read_nodes(args.snapshot, codec)
    seed = 0 if args.seed is None else args.seed
    cap = args.bayes_cap
    method = args.method
    if method in ("bayes", "bayes-dist", "multi") and len(O) > cap:
        raise exact.InfeasibleError(
            f"exact inference on {len(O)} infected nodes exceeds the configured cap "
            f"of {cap} (cost grows as 2^|O|); raise --bayes-cap or use ge/mfa")
    if args.log and method != "ge":
        raise UsageError("infer: --log applies to --method ge only")
    if args.dump_system and method != "mfa":
        raise UsageError("infer: --dump-system applies to --method mfa only")

    if method == "multi":
        if args.sources is None:
            raise UsageError("infer: --method multi needs --sources S")
        if not 1 <= args.sources <= len(O):
            raise UsageError(f"infer: --sources must lie in [1, {len(O)}]")
        chosen, rho = exact.multi_source_map(g, O, args.sources, limit=cap)
        _csv_rows(os.path.join(args.out, "sources.csv"), ["node", "rho"],
                  [(codec.encode(v), _fmt(rho)) for v in chosen])
        summary = f"estimated sources: {', '.join(codec.encode(v) for v in chosen)} (rho={rho:.6g})"
    else:
        if method == "ge" and args.log:
            elim = greedy.ge_eliminate(g, O)
            _csv_rows(os.path.join(args.out, "elimination_log.csv"), ["step", "node", "score"],
                      [(i + 1, codec.encode(v), _fmt(s)) for i, (v, s) in enumerate(elim.removed)])
        if method == "mfa" and args.dump_system:
            meanfield.write_system(meanfield.build_system(g, O),
                                   os.path.join(args.out, "system_S.csv"),
                                   os.path.join(args.out, "system_z.csv"), label=codec.encode)
        ranking = rank_snapshot(method, g, O, np.random.default_rng(seed), bayes_cap=cap)
        _csv_rows(os.path.join(args.out, "ranking.csv"), ["node", "score", "rank"],
                  [(codec.encode(v), _fmt(s), _fmt(p)) for v, s, p in ranking.rows()])
        summary = f"estimate: {codec.encode(ranking.top)}"
        if ranking.flagged:
            summary += " (least-squares fallback; system was singular or ill-conditioned)"
    config = {"graph": args.graph, "snapshot": args.snapshot, "method": method,
              "one_based": args.one_based, "sources": args.sources, "bayes_cap": cap}
    _write_manifest(args.out, "infer", config, seed, [args.graph, args.snapshot])
    print(summary)
    return EXIT_OK


def _resolve_graph_spec(spec: dict, base_dir: str) -> dict:
    spec = dict(spec)
    if "file" in spec and not os.path.isabs(spec["file"]):
        spec["file"] = os.path.normpath(os.path.join(base_dir, spec["file"]))
    return spec


def cmd_evaluate(args) -> int:
    data = _load_json(args.config) if args.config else {}
    base_dir = os.path.dirname(os.path.abspath(args.config)) if args.config else os.getcwd()
    unknown = sorted(set(data) - set(ExperimentConfig.__dataclass_fields__))
    if unknown:
        raise InputError(f"{args.config}: unknown field(s) {', '.join(unknown)}")
    if "graph" in data:
        data["graph"] = _resolve_graph_spec(data["graph"], base_dir)
    if args.graph is not None:
        data["graph"] = {"file": os.path.abspath(args.graph), "one_based": args.one_based}
    for key in ("methods", "sizes", "replicates", "seed", "bayes_cap", "workers"):
        val = getattr(args, key)
        if val is not None:
            data[key] = val
    if args.normalize is not None:
        data["normalization"] = args.normalize
    if args.no_timing:
        data["record_timing"] = False
    bad = [m for m in data.get("methods", []) if m not in METHODS]
    if bad:
        raise UsageError(f"evaluate: unknown method(s) {', '.join(map(str, bad))}; "
                         f"valid methods: {', '.join(METHODS)}")
    try:
        cfg = ExperimentConfig(**data)
    except (TypeError, ValueError) as exc:
        raise InputError(f"evaluate: {exc}") from None
    inputs = [args.config] if args.config else []
    if "file" in cfg.graph:
        if not os.path.exists(cfg.graph["file"]):
            raise FileNotFoundError(f"graph file not found: {cfg.graph['file']}")
        inputs.append(cfg.graph["file"])
    result = run_experiment(cfg)
    result.write_csv(os.path.join(args.out, "results.csv"))
    result.write_metadata(os.path.join(args.out, "metadata.json"))
    _write_manifest(args.out, "evaluate", cfg.to_dict(), cfg.seed, inputs)
    print(f"wrote {len(result.rows)} rows to {os.path.join(args.out, 'results.csv')}")
    return EXIT_OK


def cmd_stats(args) -> int:
    g, _ = _load_graph(args.graph, args.one_based, args.out)
    st = graph_stats(g)
    header = ["n", "mean_degree", "max_degree", "clustering"]
    _csv_rows(os.path.join(args.out, "stats.csv"), header,
              [(st["n"], _fmt(st["mean_degree"]), st["max_degree"], _fmt(st["clustering"]))])
    _write_manifest(args.out, "stats", {"graph": args.graph, "one_based": args.one_based},
                    args.seed, [args.graph])
    print(" ".join(f"{k}={st[k]:.6g}" if isinstance(st[k], float) else f"{k}={st[k]}" for k in header))
    return EXIT_OK


def cmd_plot(args) -> int:
    from .plot import plot_results

    if not os.path.exists(args.results):
        raise FileNotFoundError(f"results file not found: {args.results}")
    name = "time_vs_size.svg" if args.value == "mean_ms" else "rank_vs_size.svg"
    try:
        plot_results(args.results, os.path.join(args.out, name), value=args.value, title=args.title)
    except (KeyError, ValueError) as exc:
        raise InputError(f"{args.results}: not a results table ({exc})") from None
    _write_manifest(args.out, "plot", {"results": args.results, "value": args.value,
                                       "title": args.title}, args.seed, [args.results])
    print(f"wrote {os.path.join(args.out, name)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser, graph: bool = True) -> None:
    p.add_argument("--seed", type=int, default=None, help="RNG seed (default 0)")
    p.add_argument("--out", default=".", help="output directory (created if missing)")
    if graph:
        p.add_argument("--one-based", action="store_true",
                       help="node ids in files start at 1")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _method_list(text: str) -> list[str]:
    items = [x.strip() for x in text.split(",") if x.strip()]
    bad = [m for m in items if m not in METHODS]
    if bad:
        raise argparse.ArgumentTypeError(
            f"unknown method(s) {', '.join(bad)}; valid methods: {', '.join(METHODS)}")
    return items


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="patient-zero", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("generate", help="write a synthetic network as an edge list")
    _common(p)
    p.add_argument("--config", help="JSON generator description")
    p.add_argument("--generator", choices=GENERATORS)
    p.add_argument("--degree", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float, help="edge probability (erdos_renyi)")
    p.add_argument("--communities", type=int)
    p.add_argument("--p-in", type=float)
    p.add_argument("--p-out", type=float)
    p.add_argument("--pareto-alpha", type=float)
    p.add_argument("--pareto-threshold", type=float)
    p.add_argument("--mean-degree", type=float, help="target mean degree (dcsbm)")
    p.add_argument("--largest-component", action="store_true")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("simulate", help="run SI dynamics and write the trace")
    _common(p)
    p.add_argument("--graph", required=True)
    p.add_argument("--source", action="append",
                   help="source node (repeat or comma-separate; default: random)")
    p.add_argument("--size", type=int, help="stop once K nodes are infected")
    p.add_argument("--time", type=float, help="stop at time T")
    p.add_argument("--beta", type=float, help="infection rate per edge")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("infer", help="rank candidate sources of a snapshot")
    _common(p)
    p.add_argument("--graph", required=True)
    p.add_argument("--snapshot", required=True, help="file with one infected node per line")
    p.add_argument("--method", required=True, choices=INFER_METHODS)
    p.add_argument("--sources", type=int, help="number of sources (multi)")
    p.add_argument("--bayes-cap", type=int, default=exact.DP_LIMIT,
                   help=f"largest snapshot for exact methods (default {exact.DP_LIMIT})")
    p.add_argument("--log", action="store_true", help="also write the elimination log (ge)")
    p.add_argument("--dump-system", action="store_true", help="also write S and z (mfa)")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("evaluate", help="Monte-Carlo rank-versus-size experiment")
    _common(p)
    p.add_argument("--config", help="JSON experiment description")
    p.add_argument("--graph", help="edge-list file (overrides the config's graph)")
    p.add_argument("--methods", type=_method_list)
    p.add_argument("--sizes", type=_int_list)
    p.add_argument("--replicates", type=int)
    p.add_argument("--normalize", choices=("snapshot", "network"))
    p.add_argument("--bayes-cap", type=int)
    p.add_argument("--workers", type=int, help="worker processes (env PATIENT_ZERO_WORKERS)")
    p.add_argument("--no-timing", action="store_true", help="leave mean_ms blank")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("stats", help="network statistics")
    _common(p)
    p.add_argument("--graph", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("plot", help="SVG line chart from a results CSV")
    _common(p, graph=False)
    p.add_argument("--results", required=True)
    p.add_argument("--value", choices=("mean_rank", "mean_ms"), default="mean_rank")
    p.add_argument("--title", default="")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        os.makedirs(args.out, exist_ok=True)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except exact.InfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InputError, OSError, GraphFormatError, DisconnectedSnapshotError,
            exact.NoSingleSourceError, AbsorbedError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


dispatch = main

if __name__ == "__main__":
    sys.exit(main())
