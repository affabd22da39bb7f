import csv
import json
import os

import pytest

from cornergrowth.cli import EXIT_CAP, EXIT_CONFIG, _resolve_threads, main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_count_all(capsys):
    code, out, _ = run(capsys, "count", "--M", "3", "--N", "2")
    assert code == 0
    assert out.strip() == "3"


def test_count_hole(capsys):
    code, out, _ = run(capsys, "count", "--ensemble", "hole", "--N", "4", "--B", "2")
    assert code == 0
    assert out.strip() == "8"


def test_include(capsys):
    code, out, _ = run(capsys, "include", "--M", "2", "--N", "2", "--cell", "1,2")
    assert code == 0
    assert out.strip() == "0.5"


def test_sample_deterministic_csv(tmp_path, capsys):
    out_file = str(tmp_path / "paths.csv")
    argv = ["sample", "--M", "4", "--N", "4", "--n-paths", "5", "--seed", "3",
            "--out", out_file]
    assert main(list(argv)) == 0
    first = open(out_file, "rb").read()
    assert main(list(argv)) == 0
    assert open(out_file, "rb").read() == first
    capsys.readouterr()
    rows = list(csv.DictReader(first.decode().splitlines()))
    assert len(rows) == 5
    for r in rows:
        assert sorted(r["steps"]) == ["R", "R", "R", "U", "U", "U"]


def test_json_output(tmp_path, capsys):
    out_file = str(tmp_path / "b.json")
    code, out, _ = run(capsys, "bound", "--n", "1", "--m", "1", "--L", "1",
                       "--K", "1", "--p", "3", "--R", "1", "--s", "1", "--t", "1",
                       "--format", "json", "--out", out_file)
    assert code == 0
    rows = json.loads(open(out_file).read())
    assert rows[0]["epsilon"] == 4.0
    assert rows[0]["prob_bound_raw"] == pytest.approx(1.3678794411714423)
    assert "epsilon=4.0" in out


def test_config_file_fills_unset_options(tmp_path, capsys):
    cfg = tmp_path / "count.cfg"
    cfg.write_text("M=3\nN=2\n# comment line\n")
    code, out, _ = run(capsys, "count", "--config", str(cfg))
    assert code == 0
    assert out.strip() == "3"


def test_cli_flag_overrides_config(tmp_path, capsys):
    cfg = tmp_path / "count.cfg"
    cfg.write_text("M=3\nN=2\n")
    code, out, _ = run(capsys, "count", "--config", str(cfg), "--M", "4")
    assert code == 0
    assert out.strip() == "4"  # C(4+2-2, 3) = C(4,3)


def test_unknown_config_key_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("M=3\nbogus=1\n")
    code, _, err = run(capsys, "count", "--config", str(cfg))
    assert code == EXIT_CONFIG
    assert "bogus" in err


def test_missing_config_file_exits_2(capsys):
    code, _, err = run(capsys, "count", "--M", "2", "--N", "2",
                       "--config", "/nonexistent.cfg")
    assert code == EXIT_CONFIG


def test_parameter_error_exits_2(capsys):
    code, _, err = run(capsys, "include", "--M", "2", "--N", "2")
    assert code == EXIT_CONFIG
    assert "cell" in err


def test_enumeration_cap_exits_4(capsys):
    code, _, err = run(capsys, "oracle", "--check", "counts",
                       "--M", "30", "--N", "30")
    assert code == EXIT_CAP


def test_oracle_counts_and_inclusion(capsys):
    for check in ("counts", "inclusion"):
        code, out, _ = run(capsys, "oracle", "--check", check,
                           "--M", "5", "--N", "4")
        assert code == 0
        assert "enumeration == DP" in out


def test_oracle_sampler(capsys):
    code, out, _ = run(capsys, "oracle", "--check", "sample", "--M", "3",
                       "--N", "3", "--n-paths", "3000", "--seed", "1")
    assert code == 0
    assert "uniform" in out


def test_oracle_on_constrained_ensembles(capsys):
    code, out, _ = run(capsys, "oracle", "--check", "inclusion", "--ensemble",
                       "hole", "--N", "6", "--B", "2")
    assert code == 0
    code, out, _ = run(capsys, "oracle", "--check", "inclusion", "--ensemble",
                       "waypoints", "--M", "5", "--N", "5", "--waypoints", "2,2;4,4")
    assert code == 0


def test_lscan(tmp_path, capsys):
    out_file = str(tmp_path / "l.csv")
    code, out, _ = run(capsys, "lscan", "--grid", "8,16,24,32", "--out", out_file)
    assert code == 0
    assert "lambda_hat=" in out
    rows = list(csv.DictReader(open(out_file)))
    assert [r["N"] for r in rows] == ["8", "16", "24", "32"]
    assert {"L", "sum_Mk", "sum_Mk_over_sqrtN", "lambda_hat", "eta", "r2"} <= set(rows[0])


def test_clt_replay_byte_identical(tmp_path, capsys):
    out_file = str(tmp_path / "clt.csv")
    argv = ["clt", "--dist", "rademacher", "--grid", "8,16", "--n-paths", "2000",
            "--env-seed", "1", "--path-seed", "2", "--threads", "1",
            "--out", out_file]
    assert main(list(argv)) == 0
    first = open(out_file, "rb").read()
    assert main(list(argv)) == 0
    assert open(out_file, "rb").read() == first
    capsys.readouterr()
    rows = list(csv.DictReader(first.decode().splitlines()))
    assert [r["N"] for r in rows] == ["8", "16"]
    assert float(rows[0]["ks"]) > 0


def test_lpp_command(tmp_path, capsys):
    code, out, _ = run(capsys, "lpp", "--kind", "geometric", "--q", "0.25",
                       "--N", "32", "--n-env", "3", "--seed", "1")
    assert code == 0
    assert "predicted 2.00000" in out


def test_resolve_threads_env_fallback(monkeypatch):
    class A:
        threads = None
    monkeypatch.setenv("QCLT_THREADS", "7")
    assert _resolve_threads(A()) == 7
    monkeypatch.delenv("QCLT_THREADS")
    assert _resolve_threads(A()) == 1
    A.threads = 3
    monkeypatch.setenv("QCLT_THREADS", "7")
    assert _resolve_threads(A()) == 3
