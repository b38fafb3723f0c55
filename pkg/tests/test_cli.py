"""End-to-end command-line tests: the full generate/train/evaluate loop,
the error contract on stderr, and byte-level reproducibility of artifacts."""

import subprocess
import sys

import numpy as np
import pytest

from zeroshift.cli import main
from zeroshift.config import RunConfig
from zeroshift.evaluation import evaluate
from zeroshift.io import load_benchmark, load_embeddings
from zeroshift.model import build_model

SMALL_BENCH = ["c_seen=4", "c_unseen=2", "dim=8", "per_class=6", "seed=0"]
SMALL_TRAIN = ["token_count=4", "warmup_epochs=1", "joint_epochs=2", "batch_size=8"]


def run_cli(argv):
    return main(argv)


def make_bench(tmp_path, name="bench"):
    data = tmp_path / name
    args = ["synth-gen", "--out", str(data)]
    for s in SMALL_BENCH:
        args += ["--set", s]
    assert run_cli(args) == 0
    return data


def train_args(data, out, extra=()):
    args = ["train", "--data", str(data), "--out", str(out)]
    for s in list(SMALL_TRAIN) + list(extra):
        args += ["--set", s]
    return args


# -------------------------------------------------------------- show-config


def test_show_config_defaults(capsys):
    assert run_cli(["show-config"]) == 0
    cfg = dict(
        line.split("=", 1)
        for line in capsys.readouterr().out.strip().splitlines()
    )
    assert cfg["beta"] == "1.0"
    assert cfg["gamma"] == "0.1"
    assert cfg["temperature"] == "30.0"
    assert cfg["margin"] == "0.1"
    assert cfg["warmup_epochs"] == "5"
    assert cfg["joint_epochs"] == "20"
    assert cfg["use_gcn"] == "true"


def test_show_config_set_and_file(tmp_path, capsys):
    path = tmp_path / "run.cfg"
    path.write_text("beta=0.5\nseed=9\n")
    assert run_cli(["show-config", "--config", str(path), "--set", "gamma=0.25"]) == 0
    cfg = dict(
        line.split("=", 1)
        for line in capsys.readouterr().out.strip().splitlines()
    )
    assert cfg["beta"] == "0.5" and cfg["gamma"] == "0.25" and cfg["seed"] == "9"


def test_show_config_rejects_unknown_key(capsys):
    assert run_cli(["show-config", "--set", "not_a_key=1"]) == 2
    err = capsys.readouterr().err.strip().splitlines()[-1]
    assert err.startswith("error: ConfigError:")


# ----------------------------------------------------------------- synth-gen


def test_synth_gen_writes_loadable_benchmark(tmp_path):
    data = make_bench(tmp_path)
    bundle, graph, synonyms = load_benchmark(data)
    assert bundle.num_classes == 6
    assert bundle.source_features.shape == (4 * 6, 8)
    assert len(synonyms) == 6


def test_synth_gen_rejects_unknown_and_malformed_keys(tmp_path, capsys):
    assert run_cli(["synth-gen", "--out", str(tmp_path / "x"),
                    "--set", "bogus=3"]) == 2
    assert "error: ConfigError:" in capsys.readouterr().err
    assert run_cli(["synth-gen", "--out", str(tmp_path / "x"),
                    "--set", "dim"]) == 2
    assert run_cli(["synth-gen", "--out", str(tmp_path / "x"),
                    "--set", "dim=abc"]) == 2


# --------------------------------------------------------------- train/eval


def test_train_eval_round_trip(tmp_path, capsys):
    data = make_bench(tmp_path)
    run = tmp_path / "run"
    capsys.readouterr()  # drop the synth-gen status line
    assert run_cli(train_args(data, run)) == 0
    train_out = capsys.readouterr().out
    assert (run / "metrics.log").exists()
    assert (run / "params.emb").exists()
    assert (run / "params.names").exists()
    assert (run / "config.txt").exists()

    assert run_cli(["eval", "--data", str(data), "--run", str(run),
                    "--out", str(tmp_path / "report")]) == 0
    eval_out = capsys.readouterr().out
    assert eval_out == train_out  # same checkpoint, same scores
    assert (tmp_path / "report" / "eval.txt").read_text() == eval_out

    # the metrics log ends with the same report block
    tail = (run / "metrics.log").read_text()
    assert tail.endswith(eval_out)
    step_lines = [l for l in tail.splitlines() if l.startswith("step=")]
    assert step_lines and step_lines[0].startswith("step=0 phase=source ")


def test_train_zero_epochs_equals_fresh_model(tmp_path, capsys):
    data = make_bench(tmp_path)
    run = tmp_path / "run0"
    extra = ["warmup_epochs=0", "joint_epochs=0"]
    capsys.readouterr()
    assert run_cli(train_args(data, run, extra)) == 0
    out = capsys.readouterr().out

    bundle, graph, synonyms = load_benchmark(data)
    cfg = RunConfig(token_count=4, warmup_epochs=0, joint_epochs=0, batch_size=8)
    model = build_model(graph, synonyms, cfg)
    report = evaluate(bundle.target_features, bundle.target_eval_labels,
                      bundle.seen_mask, model)
    assert out == report.as_text()
    log = (run / "metrics.log").read_text()
    assert not any(line.startswith("step=") for line in log.splitlines())


def test_train_twice_is_byte_identical(tmp_path):
    data = make_bench(tmp_path)
    runs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert run_cli(train_args(data, out)) == 0
        runs.append(out)
    for fname in ("metrics.log", "params.emb", "params.names", "config.txt"):
        assert (runs[0] / fname).read_bytes() == (runs[1] / fname).read_bytes()


def test_eval_baseline_needs_no_checkpoint(tmp_path, capsys):
    data = make_bench(tmp_path)
    capsys.readouterr()
    assert run_cli(["eval", "--data", str(data), "--baseline"]) == 0
    out = capsys.readouterr().out
    parsed = dict(l.split("=", 1) for l in out.strip().splitlines())
    assert 0.0 <= float(parsed["h_score"]) <= 100.0


def test_eval_without_run_or_baseline_fails(tmp_path, capsys):
    data = make_bench(tmp_path)
    assert run_cli(["eval", "--data", str(data)]) == 2
    err = capsys.readouterr().err.strip().splitlines()[-1]
    assert err == "error: ConfigError: eval needs --run or --baseline"


def test_missing_data_directory_reports_error_contract(tmp_path, capsys):
    rc = run_cli(["train", "--data", str(tmp_path / "nope"),
                  "--out", str(tmp_path / "out")])
    assert rc == 2
    err = capsys.readouterr().err.strip().splitlines()[-1]
    assert err.startswith("error: ")
    head, _, msg = err[len("error: "):].partition(": ")
    assert head and msg  # error: <TypeName>: <message>


# --------------------------------------------------------------- grad-check


def test_grad_check_passes_and_prints_per_loss_lines(capsys):
    assert run_cli(["grad-check", "--set", "seed=1"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[-1].startswith("overall_max_rel_err=")
    body = lines[:-1]
    assert len(body) == 5 * 7  # five losses, seven parameter matrices
    for line in body:
        keys = [p.split("=")[0] for p in line.split()]
        assert keys == ["loss", "param", "max_rel_err"]
    overall = float(lines[-1].split("=", 1)[1])
    assert overall <= 1e-5


def test_grad_check_rejects_non_seed_keys(capsys):
    assert run_cli(["grad-check", "--set", "dim=4"]) == 2
    assert "error: ConfigError:" in capsys.readouterr().err


# ----------------------------------------------------------- export-features


def test_export_features_cli(tmp_path, capsys):
    data = make_bench(tmp_path)
    run = tmp_path / "run"
    assert run_cli(train_args(data, run)) == 0
    capsys.readouterr()
    out = tmp_path / "feats"
    assert run_cli(["export-features", "--data", str(data), "--run", str(run),
                    "--out", str(out), "--project-2d"]) == 0
    printed = capsys.readouterr().out.strip().splitlines()
    assert printed == [str(out / "adapted.emb"), str(out / "projection.txt")]
    mat = load_embeddings(out / "adapted.emb")
    bundle, _, _ = load_benchmark(data)
    assert mat.shape == (bundle.target_features.shape[0], 8)
    assert np.allclose(np.linalg.norm(mat, axis=1), 1.0, atol=1e-6)
    rows = (out / "projection.txt").read_text().strip().splitlines()
    assert len(rows) == mat.shape[0]
    labels = [int(r.split()[2]) for r in rows]
    assert labels == bundle.target_eval_labels.tolist()


# ---------------------------------------------------------------- entrypoint


def test_module_entrypoint_runs_in_subprocess(tmp_path):
    data = tmp_path / "bench"
    cmd = [sys.executable, "-m", "zeroshift.cli", "synth-gen", "--out", str(data)]
    for s in SMALL_BENCH:
        cmd += ["--set", s]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "benchmark written" in proc.stdout

    bad = subprocess.run(
        [sys.executable, "-m", "zeroshift.cli", "eval", "--data", str(data)],
        capture_output=True, text=True,
    )
    assert bad.returncode == 2
    assert bad.stderr.strip().splitlines()[-1].startswith("error: ConfigError:")
