import json

import pytest

from silencer.cli import main
from silencer.graph import load_edge_list, load_labels, load_matrix_csv


def run(*args):
    return main([str(a) for a in args])


def test_generate_perturb_detect_evaluate(tmp_path):
    g = tmp_path / "g.edges"
    assert run("generate", "ws", "--n", 40, "--k-neighbors", 4, "--seed", 1, "--out", g) == 0
    assert load_edge_list(g).num_edges == 80

    noisy = tmp_path / "noisy.edges"
    assert run("perturb", g, "--kind", "random", "--p", 0.05, "--out", noisy) == 0
    prov = json.loads((tmp_path / "noisy.edges.json").read_text())
    assert prov["spec"]["p"] == 0.05 and "output_digest" in prov

    labels = tmp_path / "labels.txt"
    assert run("detect", noisy, "--method", "danmf", "--layers", "40-8-3", "--out", labels, "--weights", tmp_path / "w.csv") == 0
    assert load_labels(labels, 40).labels.size == 40
    assert load_matrix_csv(tmp_path / "w.csv").shape == (3, 40)

    scores = tmp_path / "scores.json"
    assert run("evaluate", labels, "--truth", labels, "--graph", g, "--out", scores) == 0
    s = json.loads(scores.read_text())
    assert s["nmi"] == pytest.approx(1.0) and "modularity" in s


def test_mixed_and_qattack_outputs(tmp_path):
    g = tmp_path / "g.edges"
    run("generate", "er", "--n", 30, "--p-conn", 0.2, "--out", g)
    assert run("perturb", g, "--kind", "mixed", "--rank", 2, "--base", "random", "--out", tmp_path / "m.csv") == 0
    assert load_matrix_csv(tmp_path / "m.csv").shape == (30, 30)
    assert run("detect", tmp_path / "m.csv", "--method", "silencer-nmf", "--k", 2, "--m", 3, "--out", tmp_path / "l.txt") == 0
    out = tmp_path / "q.edges"
    assert run("perturb", g, "--kind", "qattack", "--population", 6, "--generations", 2, "--out", out) == 0
    assert load_edge_list(out, n_hint=30).num_edges == load_edge_list(g).num_edges


def test_experiment_command(tmp_path, capsys):
    cfg = {
        "dataset": {"name": "karate"},
        "methods": [{"name": "nmf", "max_inner_iters": 20}],
        "repetitions": 2,
        "output_dir": str(tmp_path / "unused"),
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert run("--threads", 2, "experiment", path, "--out", tmp_path / "res", "--seed", 5) == 0
    res = json.loads((tmp_path / "res" / "results.json").read_text())
    assert res["config"]["base_seed"] == 5
    assert "nmf" in capsys.readouterr().out


def test_exit_codes(tmp_path, capsys):
    assert run("detect", tmp_path / "missing.edges", "--k", 2) == 2
    bad = tmp_path / "bad.edges"
    bad.write_text("0 x\n")
    assert run("detect", bad, "--k", 2) == 2
    good = tmp_path / "g.edges"
    good.write_text("0 1\n1 2\n")
    assert run("detect", good, "--layers", "5-2") == 2
    assert run("evaluate", good) == 2
    cfg = tmp_path / "c.json"
    cfg.write_text("{not json")
    assert run("experiment", cfg) == 2
    assert "error:" in capsys.readouterr().err


def test_numerical_failure_exit_code(tmp_path, monkeypatch):
    from silencer import cli
    from silencer.errors import NumericalError

    def boom(*a, **k):
        raise NumericalError("nan")

    monkeypatch.setattr(cli, "fit_method", boom)
    g = tmp_path / "g.edges"
    g.write_text("0 1\n1 2\n")
    assert run("detect", g, "--k", 2) == 3
