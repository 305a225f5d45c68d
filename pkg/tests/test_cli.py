import json
import math
import subprocess
import sys

import numpy as np
import pytest

from embstab import cli, funcsim
from embstab.cli import main

SUBCOMMANDS = ["gen", "embed", "classify", "repsim", "funcsim", "sweep"]


@pytest.fixture
def sbm_files(tmp_path):
    edges, labels = tmp_path / "g.txt", tmp_path / "y.txt"
    assert main(["gen", "--sbm", "30,30", "--p-in", "0.3", "--p-out", "0.02", "--seed", "4",
                 "--edges", str(edges), "--labels", str(labels)]) == 0
    return edges, labels


def write_onehot(path, classes, c=2):
    o = np.zeros((len(classes), c))
    o[np.arange(len(classes)), classes] = 1
    funcsim.write_output(o, path)


def test_help_for_every_subcommand(capsys):
    for cmd in SUBCOMMANDS:
        assert main([cmd, "--help"]) == 0
        out = capsys.readouterr().out
        assert "usage: embstab " + cmd in out
    assert main(["--help"]) == 0


def test_usage_errors(capsys):
    assert main([]) == 1
    assert main(["frobnicate"]) == 1
    assert main(["repsim", "--measure", "cka", "a", "b"]) == 1
    assert main(["embed", "--edges", "x", "--dim", "4", "--out", "y", "--bogus"]) == 1
    assert main(["embed", "--edges", "x", "--dim", "0", "--out", "y"]) == 1
    assert main(["gen", "--sbm", "a,b", "--p-in", "1", "--p-out", "0", "--edges", "e", "--labels", "l"]) == 1


def test_full_pipeline(tmp_path, sbm_files, capsys):
    edges, labels = sbm_files
    for seed in (0, 1):
        assert main(["embed", "--method", "node2vec", "--edges", str(edges), "--dim", "8", "--seed", str(seed),
                     "--walks-per-node", "4", "--walk-length", "20", "--out", str(tmp_path / f"z{seed}.emb")]) == 0
        assert main(["classify", "--emb", str(tmp_path / f"z{seed}.emb"), "--labels", str(labels),
                     "--out", str(tmp_path / f"o{seed}.out"), "--eval-labels", str(tmp_path / "ey.txt"),
                     "--model", str(tmp_path / "m.lrm"), "--grid", "1,0.01"]) == 0
    capsys.readouterr()
    z0, z1 = str(tmp_path / "z0.emb"), str(tmp_path / "z1.emb")
    assert main(["repsim", "--measure", "aligned_cos", z0, z0]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(1.0, abs=1e-12)
    assert main(["repsim", "--measure", "knn_jaccard", "--k", "5", z0, z1]) == 0
    assert 0 <= float(capsys.readouterr().out) < 1
    o0, o1 = str(tmp_path / "o0.out"), str(tmp_path / "o1.out")
    assert main(["funcsim", "--measure", "accuracy", "--labels", str(tmp_path / "ey.txt"), o0]) == 0
    assert float(capsys.readouterr().out) > 0.8
    assert main(["funcsim", "--measure", "stable_core", o0, o1]) == 0
    assert 0 <= float(capsys.readouterr().out) <= 1


def test_jsd_fixture_prints_ln2(tmp_path, capsys):
    write_onehot(tmp_path / "a.out", [0])
    write_onehot(tmp_path / "b.out", [1])
    assert main(["funcsim", "--measure", "jsd", str(tmp_path / "a.out"), str(tmp_path / "b.out")]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(math.log(2), abs=1e-9)


def test_funcsim_argument_checks(tmp_path):
    write_onehot(tmp_path / "a.out", [0, 1])
    a = str(tmp_path / "a.out")
    assert main(["funcsim", "--measure", "norm_disagreement", a, a]) == 1
    assert main(["funcsim", "--measure", "disagreement", a]) == 1
    assert main(["funcsim", "--measure", "stable_core", a]) == 1


def test_degenerate_normalization_exits_3(tmp_path, capsys):
    write_onehot(tmp_path / "a.out", [0, 1])
    funcsim.write_eval_labels([0, 1], tmp_path / "y.txt")
    a = str(tmp_path / "a.out")
    assert main(["funcsim", "--measure", "norm_disagreement", "--labels", str(tmp_path / "y.txt"), a, a]) == 3
    assert "norm_disagreement" in capsys.readouterr().err


def test_data_errors_exit_2(tmp_path):
    bad = tmp_path / "bad.emb"
    bad.write_text("EMB1 2 2\n0 1 x\n")
    assert main(["repsim", "--measure", "dist_corr", str(bad), str(bad)]) == 2
    assert main(["repsim", "--measure", "dist_corr", str(tmp_path / "nope"), str(bad)]) == 2
    (tmp_path / "g.txt").write_text("0 1\n1 two\n")
    assert main(["embed", "--edges", str(tmp_path / "g.txt"), "--dim", "2", "--out", str(tmp_path / "z")]) == 2
    (tmp_path / "c.json").write_text("{not json")
    assert main(["sweep", "--config", str(tmp_path / "c.json")]) == 2
    (tmp_path / "c.json").write_text(json.dumps({"dims": [4, 2], "runs_per_dim": 2}))
    assert main(["sweep", "--config", str(tmp_path / "c.json")]) == 2


def test_subcommands_are_idempotent(tmp_path, sbm_files):
    edges, labels = sbm_files
    before = edges.read_bytes(), labels.read_bytes()
    main(["gen", "--sbm", "30,30", "--p-in", "0.3", "--p-out", "0.02", "--seed", "4",
          "--edges", str(edges), "--labels", str(labels)])
    assert (edges.read_bytes(), labels.read_bytes()) == before
    args = ["embed", "--edges", str(edges), "--dim", "4", "--seed", "3", "--walks-per-node", "2",
            "--walk-length", "10", "--out", str(tmp_path / "z.emb")]
    main(args)
    first = (tmp_path / "z.emb").read_bytes()
    main(args)
    assert (tmp_path / "z.emb").read_bytes() == first
    cargs = ["classify", "--emb", str(tmp_path / "z.emb"), "--labels", str(labels), "--l2", "0.1",
             "--out", str(tmp_path / "o.out")]
    main(cargs)
    first = (tmp_path / "o.out").read_bytes()
    main(cargs)
    assert (tmp_path / "o.out").read_bytes() == first


def test_spectral_embed(tmp_path, sbm_files):
    edges, _ = sbm_files
    assert main(["embed", "--method", "spectral", "--edges", str(edges), "--dim", "3",
                 "--out", str(tmp_path / "s.emb")]) == 0
    assert (tmp_path / "s.emb").read_text().startswith("EMB1 60 3\n")


def sweep_config(tmp_path, sbm_files, **extra):
    edges, labels = sbm_files
    doc = {"dataset": {"name": "tiny", "edges": str(edges), "labels": str(labels)}, "method": "node2vec_lite",
           "dims": [2, 4], "runs_per_dim": 3, "l2_grid": [1.0, 0.01],
           "node2vec": {"walks_per_node": 2, "walk_length": 10, "context_size": 2}, **extra}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    return path


def test_sweep_writes_report(tmp_path, sbm_files):
    cfg = sweep_config(tmp_path, sbm_files, output="rep.csv")
    assert main(["sweep", "--config", str(cfg), "--workers", "2"]) == 0
    text = (tmp_path / "rep.csv").read_text().splitlines()
    assert text[0] == "dataset,method,dim,measure,mean,std,n,optimal_flag,elapsed_seconds"
    assert len(text) == 1 + 2 * 9
    assert main(["sweep", "--config", str(cfg), "--format", "json", "--out", str(tmp_path / "r.json")]) == 0
    assert len(json.loads((tmp_path / "r.json").read_text())) == 18


def test_sweep_seed_override(tmp_path, sbm_files):
    cfg = sweep_config(tmp_path, sbm_files, measures=["aligned_cos"])
    main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "a.csv")])
    main(["sweep", "--config", str(cfg), "--seed", "17", "--out", str(tmp_path / "b.csv")])
    assert (tmp_path / "a.csv").read_bytes() != (tmp_path / "b.csv").read_bytes()


def test_workers_resolution(monkeypatch):
    monkeypatch.delenv("EMBSTAB_WORKERS", raising=False)
    assert cli._resolve_workers(None) is None
    assert cli._resolve_workers(3) == 3
    monkeypatch.setenv("EMBSTAB_WORKERS", "5")
    assert cli._resolve_workers(None) == 5
    assert cli._resolve_workers(2) == 2
    monkeypatch.setenv("EMBSTAB_WORKERS", "zero")
    with pytest.raises(cli.UsageError):
        cli._resolve_workers(None)


def test_env_workers_exit_code(tmp_path, sbm_files, monkeypatch):
    monkeypatch.setenv("EMBSTAB_WORKERS", "-2")
    assert main(["sweep", "--config", str(sweep_config(tmp_path, sbm_files))]) == 1


def test_module_entry_point(tmp_path):
    write_onehot(tmp_path / "a.out", [0])
    write_onehot(tmp_path / "b.out", [1])
    proc = subprocess.run([sys.executable, "-m", "embstab", "funcsim", "--measure", "disagreement",
                           str(tmp_path / "a.out"), str(tmp_path / "b.out")], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "1.0"
