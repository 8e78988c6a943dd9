import csv
import json

import pytest

from patient_zero.cli import main


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def files(tmp_path):
    (tmp_path / "p4.edges").write_text("1 2\n2 3\n3 4\n")
    (tmp_path / "o.txt").write_text("1\n2\n3\n")
    (tmp_path / "k3.edges").write_text("a b\nb c\nc a\n")
    return tmp_path


def test_infer_ge_on_path(files):
    out = files / "ge"
    code = main(["infer", "--method", "ge", "--graph", str(files / "p4.edges"),
                 "--snapshot", str(files / "o.txt"), "--one-based", "--log", "--out", str(out)])
    assert code == 0
    rows = read_csv(out / "ranking.csv")
    assert rows[0]["node"] == "1" and rows[0]["rank"] == "1.0"
    assert [r["node"] for r in read_csv(out / "elimination_log.csv")] == ["3", "2"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["subcommand"] == "infer" and len(manifest["inputs"]) == 2


def test_infer_bayes_and_multi(files):
    out = files / "b"
    args = ["--graph", str(files / "p4.edges"), "--snapshot", str(files / "o.txt"), "--one-based"]
    assert main(["infer", "--method", "bayes", "--out", str(out)] + args) == 0
    rows = read_csv(out / "ranking.csv")
    assert [(r["node"], float(r["score"])) for r in rows] == [("1", 0.5), ("2", 0.375), ("3", 0.125)]
    assert main(["infer", "--method", "multi", "--sources", "2", "--out", str(out)] + args) == 0
    assert [r["node"] for r in read_csv(out / "sources.csv")] == ["1", "2"]
    assert main(["infer", "--method", "multi", "--out", str(out)] + args) == 1


def test_infer_mfa_dump(files):
    out = files / "m"
    assert main(["infer", "--method", "mfa", "--dump-system", "--graph", str(files / "p4.edges"),
                 "--snapshot", str(files / "o.txt"), "--one-based", "--out", str(out)]) == 0
    assert (out / "system_S.csv").read_text().startswith("row,col,value\n")
    assert read_csv(out / "system_z.csv")[0]["node"] == "1"


def test_stats_on_labelled_triangle(files, capsys):
    out = files / "s"
    assert main(["stats", "--graph", str(files / "k3.edges"), "--out", str(out)]) == 0
    row = read_csv(out / "stats.csv")[0]
    assert float(row["clustering"]) == 1.0 and row["n"] == "3"
    assert (out / "labels.tsv").read_text() == "0\ta\n1\tb\n2\tc\n"
    assert "clustering=1" in capsys.readouterr().out


def test_exit_codes(files, capsys):
    assert main(["evaluate", "--config", str(files / "missing.json")]) == 2
    assert "not found" in capsys.readouterr().err
    assert main(["infer", "--method", "magic", "--graph", "x", "--snapshot", "y"]) == 1
    assert "bayes" in capsys.readouterr().err
    assert main(["infer", "--method", "bayes", "--bayes-cap", "2", "--graph",
                 str(files / "p4.edges"), "--snapshot", str(files / "o.txt"),
                 "--one-based", "--out", str(files / "x")]) == 3
    assert "cap of 2" in capsys.readouterr().err
    (files / "bad.edges").write_text("1 1\n")
    assert main(["stats", "--graph", str(files / "bad.edges"), "--out", str(files / "x")]) == 2
    assert main([]) == 1
    (files / "far.txt").write_text("1\n3\n")
    assert main(["infer", "--method", "ge", "--graph", str(files / "p4.edges"),
                 "--snapshot", str(files / "far.txt"), "--one-based",
                 "--out", str(files / "x")]) == 2


def test_evaluate_rejects_unknown_method(files, capsys):
    cfg = files / "cfg.json"
    cfg.write_text(json.dumps({"graph": {"generator": "regular_tree", "degree": 3, "depth": 3},
                               "methods": ["ge", "oracle"], "sizes": [3], "replicates": 2}))
    assert main(["evaluate", "--config", str(cfg), "--out", str(files / "e")]) == 1
    assert "valid methods" in capsys.readouterr().err


def test_pipeline_is_reproducible(files):
    def run(tag):
        out = files / tag
        assert main(["generate", "--generator", "dcsbm", "--n", "400", "--mean-degree", "6",
                     "--largest-component", "--seed", "4", "--out", str(out)]) == 0
        assert main(["simulate", "--graph", str(out / "graph.edges"), "--size", "12",
                     "--seed", "9", "--out", str(out)]) == 0
        assert main(["infer", "--method", "random", "--graph", str(out / "graph.edges"),
                     "--snapshot", str(out / "snapshot.txt"), "--seed", "2",
                     "--out", str(out)]) == 0
        cfg = out / "cfg.json"
        cfg.write_text(json.dumps({"graph": {"file": "graph.edges"}, "methods": ["ge", "rc"],
                                   "sizes": [4, 8], "replicates": 3}))
        assert main(["evaluate", "--config", str(cfg), "--seed", "1", "--no-timing",
                     "--out", str(out)]) == 0
        assert main(["plot", "--results", str(out / "results.csv"), "--out", str(out)]) == 0
        return out

    a, b = run("a"), run("b")
    for name in ("graph.edges", "trace.csv", "snapshot.txt", "ranking.csv", "results.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name
    assert len(read_csv(a / "trace.csv")) == 12
    assert (a / "rank_vs_size.svg").read_text().startswith("<svg")
    sidecar = json.loads((a / "graph.json").read_text())
    assert sidecar["seed"] == 4 and sidecar["config"]["generator"] == "dcsbm"
    results = read_csv(a / "results.csv")
    assert {r["method"] for r in results} == {"ge", "rc"} and results[0]["mean_ms"] == ""


def test_simulate_timed(files):
    out = files / "t"
    assert main(["simulate", "--graph", str(files / "p4.edges"), "--one-based", "--source", "2",
                 "--time", "50", "--beta", "1", "--out", str(out)]) == 0
    rows = read_csv(out / "trace.csv")
    assert rows[0] == {"step": "0", "node": "2", "time": "0.0"}
    assert sorted(r["node"] for r in rows) == ["1", "2", "3", "4"]
    assert main(["simulate", "--graph", str(files / "p4.edges"), "--time", "1",
                 "--out", str(out)]) == 1


def test_evaluate_flag_overrides(files):
    out = files / "ev"
    assert main(["evaluate", "--graph", str(files / "p4.edges"), "--one-based",
                 "--methods", "dc,random", "--sizes", "2,3", "--replicates", "4",
                 "--normalize", "network", "--out", str(out)]) == 0
    rows = read_csv(out / "results.csv")
    assert len(rows) == 4
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["config"]["normalization"] == "network"


def test_plot_time_series(files):
    (files / "r.csv").write_text("method,k,replicates,mean_rank,stderr,mean_ms\n"
                                 "ge,2,5,0.1,0.01,0.2\nge,4,5,0.2,0.01,0.3\n")
    assert main(["plot", "--results", str(files / "r.csv"), "--value", "mean_ms",
                 "--title", "timing", "--out", str(files / "p")]) == 0
    svg = (files / "p" / "time_vs_size.svg").read_text()
    assert "polyline" in svg and "timing" in svg
