import csv
import json

import numpy as np
import pytest

from semichain import cli


def _write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def test_invalid_config_missing_key(tmp_path, capsys):
    cfg = _write_config(tmp_path, "bad.json", {"model": "bs"})
    rc = cli.main(["simulate", "--config", cfg])
    assert rc == cli.EXIT_BAD_CONFIG


def test_invalid_config_unknown_key(tmp_path):
    cfg = _write_config(tmp_path, "bad.json", {"model": "bs", "word": "ee", "max_layers": 10, "zzz": 1})
    assert cli.main(["simulate", "--config", cfg]) == cli.EXIT_BAD_CONFIG


def test_budget_exceeded_exit_code(tmp_path):
    cfg = _write_config(tmp_path, "oracle.json", {"model": "bs", "L": 10, "budget": 100})
    assert cli.main(["oracle", "--config", cfg]) == cli.EXIT_BUDGET


def test_simulate_contrast_run(tmp_path, capsys):
    cfg = _write_config(
        tmp_path, "sim.json",
        {"model": "bs", "word": "aBBBAbbbABBBabbb" + "e" * 14, "max_layers": 40000,
         "window": 64, "replicas": 8},
    )
    rc = cli.main(["simulate", "--config", cfg, "--seed", "5", "--out", str(tmp_path / "out")])
    assert rc == cli.EXIT_OK
    summary = json.loads((tmp_path / "out" / "simulate.json").read_text())
    assert summary["rng_algorithm"] == "splitmix64-v1"
    assert summary["result"]["t_th"] is not None
    assert summary["config_sha256"]


def test_checkpoint_resume_bit_exact(tmp_path, monkeypatch):
    # interrupting a checkpointed trajectory at an arbitrary point and
    # resuming must reproduce the uninterrupted run exactly
    from semichain import engine

    base = {"model": "bs", "word": "abABee" * 5, "max_layers": 1_000_000,
            "checkpoint_every": 37_003}
    cfg = _write_config(tmp_path, "ck.json", base)
    out_a = tmp_path / "a"
    rc = cli.main(["simulate", "--config", cfg, "--seed", "7", "--out", str(out_a)])
    assert rc == cli.EXIT_OK
    final_a = json.loads((out_a / "simulate.json").read_text())["result"]

    # crash the same run partway through (after a few checkpoint periods)
    out_b = tmp_path / "b"
    real_advance = engine._advance
    calls = {"n": 0}

    def crashing_advance(*args, **kwargs):
        if calls["n"] == 7:
            raise RuntimeError("simulated crash")
        calls["n"] += 1
        return real_advance(*args, **kwargs)

    monkeypatch.setattr(engine, "_advance", crashing_advance)
    with pytest.raises(RuntimeError):
        cli.main(["simulate", "--config", cfg, "--seed", "7", "--out", str(out_b)])
    monkeypatch.setattr(engine, "_advance", real_advance)
    ck = json.loads((out_b / "checkpoint.json").read_text())
    assert 0 < ck["layer_count"] < base["max_layers"]

    rc = cli.main(["simulate", "--config", cfg, "--seed", "7", "--out", str(out_b), "--resume"])
    assert rc == cli.EXIT_OK
    final_b = json.loads((out_b / "simulate.json").read_text())["result"]
    assert final_b["final_word"] == final_a["final_word"]
    assert final_b["rng_state"] == final_a["rng_state"]


def test_resume_mismatch_rejected(tmp_path):
    base = {"model": "bs", "word": "abAB", "max_layers": 1000, "checkpoint_every": 500}
    cfg = _write_config(tmp_path, "sim.json", base)
    out = tmp_path / "out"
    assert cli.main(["simulate", "--config", cfg, "--seed", "1", "--out", str(out)]) == cli.EXIT_OK
    other = _write_config(tmp_path, "other.json", dict(base, max_layers=2000))
    rc = cli.main(["simulate", "--config", other, "--seed", "1", "--out", str(out), "--resume"])
    assert rc == cli.EXIT_BAD_CONFIG


def test_oracle_command(tmp_path):
    cfg = _write_config(tmp_path, "oracle.json",
                        {"model": "bs", "L": 3, "markov_sector": "eee"})
    out = tmp_path / "out"
    rc = cli.main(["oracle", "--config", cfg, "--out", str(out)])
    assert rc == cli.EXIT_OK
    summary = json.loads((out / "oracle.json").read_text())
    assert summary["result"]["largest_sector"] == 13
    assert summary["result"]["markov"]["sector_size"] == 13


def test_motzkin_probe_default(tmp_path):
    rc = cli.main(["motzkin", "--out", str(tmp_path)])
    assert rc == cli.EXIT_OK
    summary = json.loads((tmp_path / "motzkin.json").read_text())
    assert summary["result"]["strict_subset"] is True


def test_table_dump_and_plot(tmp_path):
    out_csv = tmp_path / "bs.csv"
    assert cli.main(["table-dump", "bs", str(out_csv)]) == cli.EXIT_OK
    with open(out_csv) as fh:
        assert len(list(csv.reader(fh))) == 126

    # plot from a small identity-fraction CSV
    data = tmp_path / "pe.csv"
    with open(data, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["L", "p_e", "wilson_lo", "wilson_hi", "hits"])
        for L, p in [(20, 0.05), (40, 0.01), (60, 0.004)]:
            w.writerow([L, p, p * 0.9, p * 1.1, int(p * 1000)])
    out_pdf = tmp_path / "pe.pdf"
    assert cli.main(["plot", "identity-fraction", str(data), str(out_pdf)]) == cli.EXIT_OK
    assert out_pdf.exists()


def test_plot_tth_and_jamming_kinds(tmp_path):
    tth = tmp_path / "tth.csv"
    with open(tth, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "L", "seed", "t_th", "censored"])
        for n in (4, 5, 6):
            for s in range(3):
                w.writerow([n, 10 * n, s, 2 ** (2 * n) * (s + 1), False])
    assert cli.main(["plot", "tth-scaling", str(tth), str(tmp_path / "tth.pdf")]) == cli.EXIT_OK

    jam = tmp_path / "jam.csv"
    with open(jam, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["L", "seed", "t_th", "censored"])
        for L, t in [(46, ""), (46, ""), (56, 2e7), (56, 3e7), (60, 5e6), (60, 7e6)]:
            w.writerow([L, 0, t, t == ""])
    assert cli.main(["plot", "jamming", str(jam), str(tmp_path / "jam.pdf")]) == cli.EXIT_OK
    assert (tmp_path / "jam.pdf").exists()


def test_plot_schema_mismatch(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,2\n")
    rc = cli.main(["plot", "identity-fraction", str(bad), str(tmp_path / "o.pdf")])
    assert rc == cli.EXIT_BAD_CONFIG


def test_plot_empty_input_rejected(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("L,p_e,wilson_lo,wilson_hi,hits\n")
    rc = cli.main(["plot", "identity-fraction", str(empty), str(tmp_path / "o.pdf")])
    assert rc == cli.EXIT_BAD_CONFIG


def test_scan_tree_walk(tmp_path):
    cfg = _write_config(tmp_path, "tw.json", {"kind": "tree-walk", "steps": 30, "pairs": 40})
    rc = cli.main(["scan", "--config", cfg, "--seed", "3", "--out", str(tmp_path / "o")])
    assert rc == cli.EXIT_OK
    summary = json.loads((tmp_path / "o" / "scan.json").read_text())
    assert 0.30 < summary["result"]["freq_up_same"] < 0.37
