import csv
import json

import numpy as np
import pytest

from betaclust.baselines import partition_by_value
from betaclust.cli import build_parser, main, read_assignments
from betaclust.dataset import FeatureSchema, load_csv, synthesize
from betaclust.interpretability import score_clustering
from betaclust.kcenter import make_clustering
from betaclust.metric import DistanceMetric


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("data")
    assert main(["synth", "--n", "200", "--foi-cardinality", "4", "--seed", "0", "--out", str(out)]) == 0
    return out


def data_args(path):
    return ["--data", str(path / "data.csv"), "--schema", str(path / "schema.json")]


def load(path):
    return load_csv(path / "data.csv", FeatureSchema.from_json(path / "schema.json"))


def report(out):
    return json.loads((out / "report.json").read_text())


def rebuild(d, out):
    rep = report(out)
    labels, _ = read_assignments(out / "assignments.csv")
    parts = [(cl["center"], np.flatnonzero(labels == cl["index"])) for cl in rep["clusters"]]
    return rep, make_clustering(d, DistanceMetric(), parts, rep["parameters"]["k"])


def test_ikc_is_pure(synth_dir, tmp_path, capsys):
    assert main(["cluster", *data_args(synth_dir), "--algo", "ikc", "--k", "5", "--out", str(tmp_path)]) == 0
    rep = report(tmp_path)
    assert rep["interpretability"] == 1.0 and rep["k_used"] == 5
    assert "algorithm ikc" in capsys.readouterr().out


def test_pf_one_cluster_per_value(synth_dir, tmp_path):
    assert main(["cluster", *data_args(synth_dir), "--algo", "pf", "--k", "4", "--out", str(tmp_path)]) == 0
    rep = report(tmp_path)
    assert rep["k_used"] == 4 and rep["interpretability"] == 1.0
    assert sorted(c["majority"] for c in rep["clusters"]) == ["f0", "f1", "f2", "f3"]


@pytest.mark.parametrize("algo", ["kc", "kcf", "pf", "beta-ic", "ikc"])
def test_report_self_consistent(synth_dir, tmp_path, algo):
    args = ["cluster", *data_args(synth_dir), "--algo", algo, "--k", "6", "--beta", "0.8", "--out", str(tmp_path)]
    assert main(args) == 0
    d = load(synth_dir)
    rep, c = rebuild(d, tmp_path)
    assert c.objective == rep["objective"]
    assert score_clustering(d, c).clustering_score == rep["interpretability"]
    with open(tmp_path / "assignments.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["foi_value"] for r in rows] == [d.nodes[int(r["node_id"])].foi_value for r in rows]
    assert len(rep["explanations"]) == rep["k_used"]


def test_pf_pure_whenever_k_at_least_F():
    d = synthesize(80, 2, 4, [0.55, 0.25, 0.15, 0.05], seed=3)
    m = DistanceMetric()
    for k in range(4, 15):
        c = partition_by_value(d, m, k)
        c.check(range(d.n))
        assert len(c) == k and score_clustering(d, c).clustering_score == 1.0
    small = partition_by_value(d, m, 2)
    assert len(small) == 2


def test_exit_codes(synth_dir, tmp_path, capsys):
    # beta = 1 with fewer clusters than FoI values cannot converge
    with pytest.warns(UserWarning, match="exceeds"):
        code = main(["cluster", *data_args(synth_dir), "--algo", "beta-ic", "--k", "2", "--beta", "1.0",
                     "--max-iters", "20", "--out", str(tmp_path / "a")])
    assert code == 2
    assert report(tmp_path / "a")["converged"] is False
    assert main(["cluster", *data_args(synth_dir), "--algo", "ikc", "--k", "3", "--out", str(tmp_path / "b")]) == 1
    assert main(["cluster", "--data", str(tmp_path / "nope.csv"), "--foi", "foi", "--k", "2", "--algo", "kc"]) == 1
    assert main(["cluster", *data_args(synth_dir), "--algo", "beta-ic", "--k", "2", "--out", str(tmp_path / "c")]) == 1
    with pytest.raises(SystemExit) as info:
        main(["cluster", "--k", "x"])
    assert info.value.code == 1
    assert "error" in capsys.readouterr().err


def test_foi_and_bins_flags(tmp_path):
    p = tmp_path / "d.csv"
    rng = np.random.default_rng(0)
    with open(p, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "age", "sex"])
        for _ in range(40):
            w.writerow([rng.random(), rng.integers(0, 100), rng.choice(["m", "f"])])
    out = tmp_path / "o"
    args = ["cluster", "--data", str(p), "--foi", "age,sex", "--bins", "age=0,50,100", "--algo", "pf",
            "--k", "4", "--out", str(out)]
    assert main(args) == 0
    rep = report(out)
    assert all(len(c["majority"]) == 2 for c in rep["clusters"])
    with open(out / "assignments.csv", newline="") as fh:
        assert "|" in next(csv.DictReader(fh))["foi_value"]


def test_sweep_outputs(synth_dir, tmp_path):
    args = ["sweep", *data_args(synth_dir), "--betas", "0.5,0.8,1.0", "--k", "5", "--seeds", "2", "--out", str(tmp_path)]
    assert main(args) == 0
    rep = report(tmp_path)
    assert [r["beta"] for r in rep["table"]] == [0.5, 0.8, 1.0]
    assert len(rep["runs"]) == 6
    means = [r["mean_objective"] for r in rep["table"]]
    assert rep["weakly_increasing"] == all(a <= b for a, b in zip(means, means[1:]))
    with open(tmp_path / "tradeoff.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3 and float(rows[0]["mean_objective"]) == means[0]


def test_sweep_k_trend(synth_dir, tmp_path):
    args = ["sweep-k", *data_args(synth_dir), "--algos", "kc", "--ks", "10,20,30,40,50", "--best-of-k", "--out", str(tmp_path)]
    assert main(args) == 0
    rep = report(tmp_path)
    objs = [r["objective"] for r in rep["table"]]
    assert all(b <= a for a, b in zip(objs, objs[1:]))
    assert rep["trend"]["kc"]["non_increasing"]


def test_sweep_k_single_row(synth_dir, tmp_path):
    assert main(["sweep-k", *data_args(synth_dir), "--algos", "pf", "--ks", "2", "--out", str(tmp_path)]) == 0
    assert len(report(tmp_path)["table"]) == 1


def test_ikc_equals_kc_with_one_value(tmp_path):
    data = tmp_path / "one"
    assert main(["synth", "--n", "120", "--foi-cardinality", "1", "--out", str(data)]) == 0
    out = tmp_path / "o"
    args = ["sweep-k", *data_args(data), "--algos", "kc,ikc", "--ks", "2,4,6", "--deterministic", "--out", str(out)]
    assert main(args) == 0
    rows = report(out)["table"]
    kc = [r["objective"] for r in rows if r["algo"] == "kc"]
    ikc = [r["objective"] for r in rows if r["algo"] == "ikc"]
    assert kc == ikc


def test_seeds_parsing():
    p = build_parser()
    assert p.parse_args(["sweep", "--data", "x", "--k", "2", "--seeds", "3"]).seeds == [0, 1, 2]
    assert p.parse_args(["sweep", "--data", "x", "--k", "2", "--seeds", "4,9"]).seeds == [4, 9]
