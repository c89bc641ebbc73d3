import csv
import json
import subprocess
import sys

import pytest

from hidden_ising.cli import main


def write_config(tmp_path, **data):
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(data))
    return str(path)


E1 = {"N": 12, "n": 3, "m": 5, "k": 2, "alpha": 2}


def test_analyze_reports_regime_and_barriers(tmp_path):
    cfg = write_config(tmp_path, spec=E1)
    out = tmp_path / "out"
    assert main(["analyze", "--config", cfg, "--out", str(out)]) == 0
    report = json.loads((out / "analyze.json").read_text())
    assert report["regime"] == "LowAlpha"
    assert report["gamma_star"]["height"] == "-254"
    assert report["gamma_star"]["barrier_from"]["+1"] == "10"
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["exit_code"] == 0 and "analyze.json" in manifest["outputs"]


def test_paths_writes_per_path_files(tmp_path):
    cfg = write_config(tmp_path, spec=E1)
    out = tmp_path / "out"
    assert main(["paths", "--config", cfg, "--out", str(out)]) == 0
    with open(out / "paths.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert rows and all(r["computed_max"] for r in rows)
    assert any(p.name.startswith("path_") for p in out.iterdir())


def test_invalid_spec_exits_2(tmp_path):
    cfg = write_config(tmp_path, spec={"N": 12, "n": 3, "m": 5, "k": 1, "alpha": 2})
    assert main(["analyze", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_non_positive_parameter_exits_2(tmp_path):
    cfg = write_config(tmp_path, spec=E1, replicas=0, seed=1)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_simulate_requires_seed(tmp_path):
    cfg = write_config(tmp_path, spec=E1, replicas=2)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_bruteforce_guard_exits_3(tmp_path):
    cfg = write_config(tmp_path, spec={"N": 8, "n": 3, "m": 3, "k": 1, "alpha": 2})
    assert main(["bruteforce", "--config", cfg, "--out", str(tmp_path / "o")]) == 3


def test_bruteforce_toy(tmp_path):
    cfg = write_config(tmp_path, spec={"N": 4, "n": 1, "m": 1, "k": 1, "alpha": 1, "strict": False})
    out = tmp_path / "o"
    assert main(["bruteforce", "--config", cfg, "--out", str(out)]) == 0
    report = json.loads((out / "landscape.json").read_text())
    assert report["state_count"] == 65536
    assert report["gamma_tilde"] == "2"


def test_simulate_is_reproducible_across_worker_counts(tmp_path):
    spec = {"N": 8, "n": 3, "m": 3, "k": 1, "alpha": 2}
    cfg = write_config(tmp_path, spec=spec, betas=[0.6], replicas=6, cap_factor=1000)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--config", cfg, "--seed", "5", "--out", str(a)]) == 0
    assert main(["simulate", "--config", cfg, "--seed", "5", "--workers", "3", "--out", str(b)]) == 0
    assert (a / "samples.csv").read_bytes() == (b / "samples.csv").read_bytes()


def test_enumerate_small(tmp_path):
    cfg = write_config(tmp_path, sides=[4], max_area=5)
    out = tmp_path / "o"
    assert main(["enumerate", "--config", cfg, "--out", str(out)]) == 0
    with open(out / "shapes.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert {r["area"] for r in rows} == {"1", "2", "3", "4", "5"}


def test_verify_exit_codes(tmp_path):
    assert main(["verify", "A9", "--out", str(tmp_path / "a")]) == 0
    assert main(["verify", "A3", "--out", str(tmp_path / "b")]) == 4
    assert main(["verify", "A0", "--out", str(tmp_path / "c")]) == 2


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "hidden_ising.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "analyze" in res.stdout
