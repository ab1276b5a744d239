"""CLI behavior: artifacts, schemas, determinism, exit codes."""

import json
import re

import numpy as np
import pytest

import chainsolve as cs
from chainsolve import cli


def write_config(path, **overrides):
    doc = {
        "version": 1,
        "model": {
            "cost": {"family": "exp_affine", "a": 2},
            "delta": 1.5,
            "g": {"family": "linear", "beta": 0.1},
        },
        "grid": {"m": 64},
        "solver": {"method": "recursive", "variant": "deterministic"},
        "network": {"seeds": [1, 2]},
    }
    for key, value in overrides.items():
        doc[key] = value
    path.write_text(json.dumps(doc))
    return path


def read_csv_rows(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# schema: ")
    header = lines[1].split(",")
    return header, [line.split(",") for line in lines[2:]]


class TestSolveCommand:
    def test_writes_price_and_policy(self, tmp_path):
        config = write_config(tmp_path / "run.json")
        rc = cli.main(["solve", "--config", str(config), "--out", str(tmp_path / "out")])
        assert rc == 0
        header, rows = read_csv_rows(tmp_path / "out" / "price.csv")
        assert header == ["s", "p"]
        assert len(rows) == 65
        assert float(rows[0][1]) == 0.0
        header, rows = read_csv_rows(tmp_path / "out" / "policy.csv")
        assert header == ["s", "t_star", "k_star"]

    def test_tiny_grid(self, tmp_path):
        config = write_config(tmp_path / "run.json", grid={"m": 2})
        rc = cli.main(["solve", "--config", str(config), "--out", str(tmp_path / "out")])
        assert rc == 0
        _, rows = read_csv_rows(tmp_path / "out" / "price.csv")
        assert len(rows) == 3
        assert float(rows[0][1]) == 0.0

    def test_byte_identical_reruns(self, tmp_path):
        config = write_config(tmp_path / "run.json")
        cli.main(["solve", "--config", str(config), "--out", str(tmp_path / "a")])
        cli.main(["solve", "--config", str(config), "--out", str(tmp_path / "b")])
        assert (tmp_path / "a" / "price.csv").read_bytes() == (tmp_path / "b" / "price.csv").read_bytes()
        assert (tmp_path / "a" / "policy.csv").read_bytes() == (tmp_path / "b" / "policy.csv").read_bytes()

    def test_stochastic_policy_columns(self, tmp_path):
        config = write_config(
            tmp_path / "run.json",
            solver={"method": "recursive", "variant": "stochastic"},
            grid={"m": 32},
        )
        rc = cli.main(["solve", "--config", str(config), "--out", str(tmp_path / "out")])
        assert rc == 0
        header, _ = read_csv_rows(tmp_path / "out" / "policy.csv")
        assert header == ["s", "t_star", "lambda_star"]

    def test_bad_config_exits_one(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert cli.main(["solve", "--config", str(bad), "--out", str(tmp_path / "o")]) == 1
        missing = tmp_path / "nope.json"
        assert cli.main(["solve", "--config", str(missing), "--out", str(tmp_path / "o")]) == 1

    def test_invalid_model_exits_one(self, tmp_path):
        config = write_config(tmp_path / "run.json")
        doc = json.loads(config.read_text())
        doc["model"]["delta"] = 0.5
        config.write_text(json.dumps(doc))
        assert cli.main(["solve", "--config", str(config), "--out", str(tmp_path / "o")]) == 1

    def test_iteration_cap_exits_two_without_allow_partial(self, tmp_path):
        config = write_config(
            tmp_path / "run.json",
            model={"cost": {"family": "exp_affine", "a": 1}, "delta": 1.01,
                   "g": {"family": "linear", "beta": 0.01}},
            solver={"method": "iterate", "variant": "deterministic",
                    "tol": 1e-12, "max_iter": 2},
        )
        assert cli.main(["solve", "--config", str(config), "--out", str(tmp_path / "o")]) == 2
        rc = cli.main(
            ["solve", "--config", str(config), "--out", str(tmp_path / "o"), "--allow-partial"]
        )
        assert rc == 0
        assert (tmp_path / "o" / "price.csv").exists()

    def test_unwritable_out_exits_three(self, tmp_path):
        config = write_config(tmp_path / "run.json")
        blocker = tmp_path / "blocked"
        blocker.write_text("file, not a directory")
        assert cli.main(["solve", "--config", str(config), "--out", str(blocker)]) == 3


class TestCompareCommand:
    def test_columns_and_ordering_report(self, tmp_path, capsys):
        config = write_config(tmp_path / "run.json")
        rc = cli.main(
            ["compare", "--config", str(config), "--m", "48",
             "--vary", "delta=1.6,2.0", "--vary", "beta=0.2",
             "--out", str(tmp_path / "out")]
        )
        assert rc == 0
        header, rows = read_csv_rows(tmp_path / "out" / "compare.csv")
        assert header == ["s", "baseline", "delta=1.6", "delta=2", "beta=0.2"]
        data = np.array([[float(x) for x in row] for row in rows])
        # delta and beta raises push prices up pointwise
        assert np.all(data[:, 1] <= data[:, 3] + 1e-9)
        assert np.all(data[:, 1] <= data[:, 4] + 1e-9)
        out = capsys.readouterr().out
        assert "ordering delta: 1.5 <= 1.6: OK" in out
        assert "ordering beta: 0.1 <= 0.2: OK" in out

    def test_identical_variants_identical_columns(self, tmp_path):
        config = write_config(tmp_path / "run.json")
        rc = cli.main(
            ["compare", "--config", str(config), "--m", "32",
             "--vary", "delta=1.5", "--out", str(tmp_path / "out")]
        )
        assert rc == 0
        _, rows = read_csv_rows(tmp_path / "out" / "compare.csv")
        assert all(row[1] == row[2] for row in rows)  # baseline delta == varied delta

    def test_requires_vary(self, tmp_path):
        config = write_config(tmp_path / "run.json")
        assert cli.main(["compare", "--config", str(config), "--out", str(tmp_path / "o")]) == 1


class TestNetworkCommand:
    def test_writes_json_and_dot_per_seed(self, tmp_path):
        config = write_config(
            tmp_path / "run.json",
            model={"cost": {"family": "power", "theta": 1.2}, "delta": 1.05,
                   "g": {"family": "power", "beta": 0.0005, "gamma": 1.5}},
            solver={"method": "recursive", "variant": "stochastic"},
            grid={"m": 128},
        )
        rc = cli.main(
            ["network", "--config", str(config), "--seeds", "1,2", "--out", str(tmp_path / "nets")]
        )
        assert rc == 0
        doc1 = json.loads((tmp_path / "nets" / "network_seed1.json").read_text())
        doc2 = json.loads((tmp_path / "nets" / "network_seed2.json").read_text())
        assert doc1["schema"] == "chainsolve/network/1"
        assert doc1["root"]["stage"] == 1.0
        assert doc1["root"] != doc2["root"]  # different seeds, different trees
        dot = (tmp_path / "nets" / "network_seed1.dot").read_text()
        assert re.search(r'"n" \[size="[0-9.e+-]+"', dot)

    def test_deterministic_variant_rejected(self, tmp_path):
        config = write_config(tmp_path / "run.json")
        assert cli.main(["network", "--config", str(config), "--out", str(tmp_path / "o")]) == 1


class TestBenchCommand:
    def test_desk_suite_csv(self, tmp_path, monkeypatch):
        import chainsolve.bench as bench_mod

        model = cs.model_from("exp_affine", 1.0, 1.5, "linear", 0.1)
        tiny = [cs.BenchCase(name="model1_delta1.5", model=model, m=64, reference_m=512)]
        monkeypatch.setattr(bench_mod, "desk_suite", lambda: tiny)
        out = tmp_path / "bench.csv"
        rc = cli.main(["bench", "--suite", "desk", "--repeats", "1", "--out", str(out)])
        assert rc == 0
        text = out.read_text()
        assert text.startswith("# schema: chainsolve/bench/1\n")
        assert "model1_delta1.5,recursive" in text
        assert "model1_delta1.5,iterate" in text


def test_usage_error_exits_one():
    assert pytest.raises(SystemExit, cli.main, ["solve"]).value.code == 1
